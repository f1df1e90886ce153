fn main() {
    std::process::exit(warpflow_cli::main_with(std::env::args_os()));
}

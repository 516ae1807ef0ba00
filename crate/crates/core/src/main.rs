fn main() {
    std::process::exit(spreadhydro::cli::main_with_args(std::env::args_os()));
}

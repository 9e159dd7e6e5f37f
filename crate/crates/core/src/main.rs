fn main() {
    std::process::exit(divbarrier::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(nlkpp::cli::main_with_args(std::env::args_os()));
}

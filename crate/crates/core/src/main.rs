fn main() {
    std::process::exit(absa::cli::main_with_args(std::env::args_os()));
}

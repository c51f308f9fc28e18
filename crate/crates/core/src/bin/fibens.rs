fn main() {
    std::process::exit(fibens::cli::main_with_args(std::env::args_os()));
}

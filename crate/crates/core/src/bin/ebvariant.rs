fn main() {
    std::process::exit(ebvariant::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(coforest::cli::main_with_args(std::env::args_os()));
}

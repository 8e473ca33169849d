fn main() {
    std::process::exit(trijm::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(fracadi::cli::main_with_args(std::env::args_os()));
}

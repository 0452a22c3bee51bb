fn main() {
    std::process::exit(woah::cli::main_with_args(std::env::args_os()));
}

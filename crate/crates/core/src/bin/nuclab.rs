fn main() {
    std::process::exit(nuclab::cli::main_with(std::env::args_os()));
}

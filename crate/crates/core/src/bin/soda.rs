fn main() {
    std::process::exit(soda::cli::main_with(std::env::args_os()));
}

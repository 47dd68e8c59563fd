fn main() {
    std::process::exit(conic_dual::cli::main_with(std::env::args_os()));
}

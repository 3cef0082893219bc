fn main() {
    std::process::exit(wsregen_core::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(tlk_core::cli::run(std::env::args_os()));
}

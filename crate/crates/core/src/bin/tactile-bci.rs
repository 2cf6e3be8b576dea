fn main() {
    std::process::exit(tactile_bci::cli::run(std::env::args_os()));
}

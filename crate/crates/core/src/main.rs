fn main() {
    std::process::exit(bichroma::cli::main_with_args(std::env::args().collect()));
}

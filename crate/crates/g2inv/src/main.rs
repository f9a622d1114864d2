fn main() {
    std::process::exit(g2inv::cli::run(std::env::args_os()));
}

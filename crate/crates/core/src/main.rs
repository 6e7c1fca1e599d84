fn main() {
    std::process::exit(stieltjes_core::cli::run(std::env::args_os()));
}

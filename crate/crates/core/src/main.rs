fn main() {
    std::process::exit(adpac::cli::run(std::env::args_os()));
}

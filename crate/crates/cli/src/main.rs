fn main() {
    std::process::exit(csqvr_cli::run(std::env::args_os()));
}

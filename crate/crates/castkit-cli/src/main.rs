fn main() {
    std::process::exit(castkit_cli::run(std::env::args_os()));
}

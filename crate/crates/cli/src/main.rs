fn main() {
    std::process::exit(volpo_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(rankspec_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(repulsive_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(hyperroute::cli::run(std::env::args_os().collect()));
}

fn main() {
    std::process::exit(photon_score::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(smr::harness::cli::run(std::env::args_os()));
}

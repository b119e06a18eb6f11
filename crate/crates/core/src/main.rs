fn main() {
    std::process::exit(domain_uq::cli::run(std::env::args_os()));
}

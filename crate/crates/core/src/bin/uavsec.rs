fn main() {
    std::process::exit(uavsec::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(omnicrawl_cli::run(std::env::args_os()));
}

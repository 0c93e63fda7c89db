fn main() {
    std::process::exit(disloc_cli::run(std::env::args_os()));
}

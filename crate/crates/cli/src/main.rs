fn main() {
    std::process::exit(qdep_cli::run(std::env::args_os()));
}

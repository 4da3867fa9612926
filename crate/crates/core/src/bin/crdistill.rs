fn main() {
    std::process::exit(crdistill::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(optpred_cli::run(std::env::args_os()));
}

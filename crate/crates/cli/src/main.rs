fn main() {
    std::process::exit(boolcorr_cli::run(std::env::args_os()));
}

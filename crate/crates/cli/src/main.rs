fn main() {
    std::process::exit(qecverify_cli::run(std::env::args_os()));
}

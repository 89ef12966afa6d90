fn main() {
    std::process::exit(uaosc::harness::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(ineqcond::cli::run(std::env::args_os()));
}

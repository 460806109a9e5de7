fn main() {
    std::process::exit(unified_interp::cli::run(std::env::args_os()));
}

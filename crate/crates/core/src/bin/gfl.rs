fn main() {
    std::process::exit(gfl_core::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(radyn::cli::run_command(std::env::args_os()));
}

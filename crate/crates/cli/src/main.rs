fn main() {
    std::process::exit(sonarwave_cli::run(std::env::args_os()));
}

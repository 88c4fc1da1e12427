fn main() {
    std::process::exit(sure_boundary_cli::run(std::env::args_os()));
}

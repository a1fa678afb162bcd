fn main() {
    std::process::exit(densitylab_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(fetalorient_cli::run(std::env::args_os()));
}

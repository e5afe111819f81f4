fn main() {
    std::process::exit(fbgvib::cli_io::run_cli(std::env::args_os()));
}

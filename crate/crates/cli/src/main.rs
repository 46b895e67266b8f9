fn main() {
    std::process::exit(pdc_cli::run(std::env::args_os()));
}

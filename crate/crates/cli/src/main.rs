fn main() {
    std::process::exit(sdc_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(iqhall_cli::run(std::env::args_os()));
}

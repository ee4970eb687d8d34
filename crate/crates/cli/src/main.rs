fn main() {
    std::process::exit(qcap_cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(seqst_cli::main_with_args(std::env::args_os()));
}

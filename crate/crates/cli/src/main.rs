fn main() {
    std::process::exit(drinfeld_cli::main_with_args(std::env::args_os()));
}

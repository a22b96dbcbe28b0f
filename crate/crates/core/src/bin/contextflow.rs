fn main() {
    std::process::exit(contextflow::cli::cli_main(std::env::args_os()));
}

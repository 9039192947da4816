fn main() {
    std::process::exit(deskbench::cli::cli_main(std::env::args_os()));
}

fn main() {
    std::process::exit(salab::cli_harness::run(std::env::args_os()));
}

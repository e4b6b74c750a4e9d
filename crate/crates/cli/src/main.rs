fn main() {
    std::process::exit(stablemult_cli::dispatch::parse_and_dispatch(
        std::env::args_os(),
    ));
}

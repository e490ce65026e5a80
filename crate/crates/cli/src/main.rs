fn main() {
    std::process::exit(lzctx_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(quasirelax::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(gsc_bench::cli::main_with_args(std::env::args_os()));
}

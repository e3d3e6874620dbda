fn main() {
    std::process::exit(goto_bench::cli::main_with(std::env::args_os()));
}

fn main() {
    std::process::exit(quantized_backreach::cli::run(std::env::args_os()));
}

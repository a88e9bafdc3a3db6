fn main() {
    std::process::exit(thermal_arealaw::cli::main_with_args(std::env::args_os()));
}

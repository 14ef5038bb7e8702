fn main() {
    std::process::exit(vsi_sim::cli::main_with_args(std::env::args_os()));
}

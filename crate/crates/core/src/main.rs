fn main() {
    std::process::exit(ordexp::cli::commands::main_entry(std::env::args_os()));
}

fn main() {
    std::process::exit(special_cube::cli::main_entry());
}

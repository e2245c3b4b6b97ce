fn main() { vcdc::cli::main() }

fn main() {
    let (code, output) = stallings::cli::execute(std::env::args_os());
    if !output.is_empty() {
        println!("{output}");
    }
    std::process::exit(code);
}

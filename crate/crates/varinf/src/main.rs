fn main() {
    std::process::exit(varinf::dispatch(std::env::args_os()));
}

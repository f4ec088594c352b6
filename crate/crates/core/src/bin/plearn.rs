fn main() {
    let code = policy_learner::cli::run(std::env::args_os(), &mut std::io::stdout());
    std::process::exit(code);
}

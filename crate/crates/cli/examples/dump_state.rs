//! Prints the seeded random system state as JSON `[[re, im], ...]`.
//!
//! `cargo run -p relclock-cli --example dump_state -- <seed> <dim>`

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let dim: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(20);
    let state = relclock_cli::states::random_state(seed, dim).expect("valid state");
    let pairs: Vec<[f64; 2]> = state.amplitudes().iter().map(|z| [z.re, z.im]).collect();
    println!("{}", serde_json::to_string(&pairs).expect("serializable"));
}

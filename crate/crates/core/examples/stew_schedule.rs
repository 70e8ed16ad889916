//! The interleaved schedule of coding steps, syntheses (S), enhancements
//! (E) and joint actions (J) for a sequence, with and without joint
//! inference.
//!
//! cargo run --example stew_schedule [frames]

use stenc::codec::ToolFlags;
use stenc::stew::{mode_of, plan_sequence, Step};

fn show(steps: &[Step]) -> String {
    steps
        .iter()
        .map(|s| match s {
            Step::Code(p) => format!("C{p}"),
            Step::Act { action, .. } => format!("{:?}{}", action.kind(), action.target()),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() -> anyhow::Result<()> {
    let n = std::env::args().nth(1).map_or(Ok(17), |s| s.parse())?;
    for p in 0..9 {
        println!("POC {p}: {:?}", mode_of(p));
    }
    println!("all tools:  {}", show(&plan_sequence(n, ToolFlags::ALL)));
    let split = ToolFlags {
        jise: false,
        ..ToolFlags::ALL
    };
    println!("split:      {}", show(&plan_sequence(n, split)));
    Ok(())
}

//! BD-rate between two RD curves read from CSV files
//! (`qp,rate_kbps,psnr_y,psnr_u,psnr_v`), or between two built-in curves
//! when no files are given.
//!
//! cargo run --example bd_rate [anchor.csv test.csv]

use stenc::eval::{bd_rate, curve_from_rows, read_rd_csv, RdRow};

fn builtin(scale: f64, gain: f64) -> Vec<RdRow> {
    [(22, 900.0, 41.0), (27, 520.0, 38.2), (32, 300.0, 35.4), (37, 170.0, 32.7), (42, 100.0, 30.1)]
        .map(|(qp, r, p)| RdRow {
            qp,
            rate_kbps: r * scale,
            psnr_y: p + gain,
            psnr_u: p + 2.0 + gain,
            psnr_v: p + 3.0 + gain,
        })
        .to_vec()
}

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (anchor, test) = match args.as_slice() {
        [a, t] => (
            read_rd_csv(std::fs::File::open(a)?)?,
            read_rd_csv(std::fs::File::open(t)?)?,
        ),
        _ => (builtin(1.0, 0.0), builtin(0.92, 0.1)),
    };
    let r = bd_rate(&curve_from_rows(&anchor)?, &curve_from_rows(&test)?)?;
    println!("{}", serde_json::to_string_pretty(&r)?);
    Ok(())
}

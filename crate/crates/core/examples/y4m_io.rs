//! Reads a Y4M file (the bundled still by default), shows its header and
//! the tile grid used for inference, and writes a camera-path clip built
//! from it.
//!
//! cargo run --example y4m_io [input.y4m] [output.y4m]

use stenc::frame::{make_tile_grid, read_y4m, write_y4m, Y4mHeader};
use stenc::synth::camera_path_sequence;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let input = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/testdata/coffee_still.y4m").into());
    let output = args.next().unwrap_or_else(|| "camera_path.y4m".into());

    let (header, frames) = read_y4m(&std::fs::read(&input)?)?;
    println!(
        "{input}: {}x{} at {}/{} fps, {} frame(s)",
        header.width,
        header.height,
        header.fps_num,
        header.fps_den,
        frames.len()
    );
    let grid = make_tile_grid(header.width, header.height)?;
    println!("tile grid: {} x {} tiles", grid.cols, grid.rows);

    let clip = camera_path_sequence(&frames[0], 176, 144, 33);
    std::fs::write(&output, write_y4m(&Y4mHeader::new(176, 144), &clip)?)?;
    println!("wrote {} frames of 176x144 to {output}", clip.len());
    Ok(())
}

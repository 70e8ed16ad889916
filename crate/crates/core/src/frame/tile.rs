//! Block decomposition used for tiled inference and per-tile filter flags.

use serde::Serialize;

use super::check_dims;
use crate::error::Result;

/// Frames no larger than this many luma samples use the small tile size.
pub const SMALL_FRAME_AREA: usize = 416 * 240;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    /// The co-located chroma rectangle for a luma-aligned rectangle.
    pub fn half(&self) -> Rect {
        Rect::new(self.x / 2, self.y / 2, self.w / 2, self.h / 2)
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Tile {
    pub core: Rect,
    /// `core` grown by the pad on every side, clipped to the frame.
    pub padded: Rect,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TileGrid {
    pub block_size: usize,
    pub pad: usize,
    pub cols: usize,
    pub rows: usize,
    pub width: usize,
    pub height: usize,
    tiles: Vec<Tile>,
}

impl TileGrid {
    pub fn with_block(width: usize, height: usize, block_size: usize, pad: usize) -> Result<Self> {
        check_dims(width, height)?;
        assert!(block_size > 0 && block_size.is_multiple_of(2) && pad.is_multiple_of(2));
        let cols = width.div_ceil(block_size);
        let rows = height.div_ceil(block_size);
        let mut tiles = Vec::with_capacity(cols * rows);
        for r in 0..rows {
            for c in 0..cols {
                let (x0, y0) = (c * block_size, r * block_size);
                let core = Rect::new(x0, y0, block_size.min(width - x0), block_size.min(height - y0));
                let px = x0.saturating_sub(pad);
                let py = y0.saturating_sub(pad);
                let padded = Rect::new(
                    px,
                    py,
                    (x0 + core.w + pad).min(width) - px,
                    (y0 + core.h + pad).min(height) - py,
                );
                tiles.push(Tile { core, padded });
            }
        }
        Ok(Self {
            block_size,
            pad,
            cols,
            rows,
            width,
            height,
            tiles,
        })
    }

    /// Tiles in row-major order.
    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }
}

/// 240-pixel tiles with 8 pixels of padding up to 416×240, 480/16 above.
pub fn make_tile_grid(width: usize, height: usize) -> Result<TileGrid> {
    if width * height <= SMALL_FRAME_AREA {
        TileGrid::with_block(width, height, 240, 8)
    } else {
        TileGrid::with_block(width, height, 480, 16)
    }
}

//! Orthogonal grid fixtures.

use geo::{LineString, Polygon};

use crate::blockmap::Block;
use crate::error::{Error, Result};
use crate::netgraph::{StreetNetwork, DEFAULT_SNAP_TOLERANCE};

/// `n × n` street nodes spaced `block_size` meters apart, giving
/// `2n(n−1)` segments and `(n−1)²` square blocks. Segment ids are
/// `h{row}_{col}` / `v{col}_{row}`; block ids are `b{row}_{col}`.
pub fn make_synthetic_grid(n: usize, block_size: f64) -> Result<(StreetNetwork, Vec<Block>)> {
    if n < 2 {
        return Err(Error::OutOfRange { name: "n".into(), value: n as f64 });
    }
    if !(block_size > 0.0) {
        return Err(Error::OutOfRange { name: "block_size".into(), value: block_size });
    }
    let at = |i: usize| i as f64 * block_size;
    let mut lines = Vec::with_capacity(2 * n * (n - 1));
    for row in 0..n {
        for col in 0..n - 1 {
            lines.push((format!("h{row}_{col}"), LineString::from(vec![(at(col), at(row)), (at(col + 1), at(row))])));
        }
    }
    for col in 0..n {
        for row in 0..n - 1 {
            lines.push((format!("v{col}_{row}"), LineString::from(vec![(at(col), at(row)), (at(col), at(row + 1))])));
        }
    }
    let network = StreetNetwork::from_polylines(lines, DEFAULT_SNAP_TOLERANCE)?;

    let mut blocks = Vec::with_capacity((n - 1) * (n - 1));
    for row in 0..n - 1 {
        for col in 0..n - 1 {
            let (x0, y0, x1, y1) = (at(col), at(row), at(col + 1), at(row + 1));
            let ring = LineString::from(vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)]);
            blocks.push(Block::new(format!("b{row}_{col}"), Polygon::new(ring, vec![]))?);
        }
    }
    Ok((network, blocks))
}

//! Betti numbers over the two-element field from boundary-matrix ranks.
//!
//! Rows are bit-packed in u64 blocks; elimination keeps one reduced row per
//! pivot column. Meshes in this crate stay small enough that the cubic
//! worst case is irrelevant.

use serde::{Deserialize, Serialize};

use crate::mesh::TriMesh;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiProfile {
    pub b0: usize,
    pub b1: usize,
    pub euler: i64,
}

struct Gf2Ranker {
    words: usize,
    pivot_rows: Vec<Option<Vec<u64>>>,
    rank: usize,
}

impl Gf2Ranker {
    fn new(ncols: usize) -> Self {
        Self {
            words: ncols.div_ceil(64),
            pivot_rows: vec![None; ncols],
            rank: 0,
        }
    }

    fn row_from_bits(&self, bits: &[usize]) -> Vec<u64> {
        let mut row = vec![0u64; self.words];
        for &b in bits {
            row[b / 64] ^= 1u64 << (b % 64);
        }
        row
    }

    fn lowest_set(row: &[u64]) -> Option<usize> {
        for (w, &block) in row.iter().enumerate() {
            if block != 0 {
                return Some(w * 64 + block.trailing_zeros() as usize);
            }
        }
        None
    }

    fn reduce(&mut self, mut row: Vec<u64>) {
        while let Some(col) = Self::lowest_set(&row) {
            match &self.pivot_rows[col] {
                Some(p) => {
                    for (r, q) in row.iter_mut().zip(p) {
                        *r ^= q;
                    }
                }
                None => {
                    self.pivot_rows[col] = Some(row);
                    self.rank += 1;
                    return;
                }
            }
        }
    }
}

/// b0 and b1 with mod-2 coefficients: b0 is the component count, b1 comes
/// from E - rank(d1) - rank(d2).
pub fn betti(mesh: &TriMesh) -> Result<BettiProfile> {
    let nv = mesh.vertex_count();
    let ne = mesh.edge_count();

    let mut d1 = Gf2Ranker::new(nv);
    for e in mesh.edges() {
        let row = d1.row_from_bits(&[e.ends[0], e.ends[1]]);
        d1.reduce(row);
    }

    let mut d2 = Gf2Ranker::new(ne);
    for tri in mesh.triangles() {
        let bits: Vec<usize> = [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])]
            .iter()
            .map(|&(a, b)| mesh.edge_between(a, b).unwrap())
            .collect();
        let row = d2.row_from_bits(&bits);
        d2.reduce(row);
    }

    let b0 = mesh.components();
    debug_assert_eq!(b0, nv - d1.rank);
    let b1 = ne - d1.rank - d2.rank;
    Ok(BettiProfile {
        b0,
        b1,
        euler: mesh.euler_characteristic(),
    })
}

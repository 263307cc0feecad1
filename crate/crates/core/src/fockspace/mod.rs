//! Weight-truncated lattice vertex operator algebras.

mod arena;
pub mod io;
mod key;
mod lattice;

pub use arena::LatticeVoa;

pub use key::{FockKey, Parts};
pub use lattice::{Cocycle, Lattice};

/// Coefficients of `Σ_λ q^{<λ,λ>/2} · Π_n (1 - q^n)^{-rank}` up to `q^max`.
pub fn character(lattice: &Lattice, max: u32) -> Vec<u64> {
    let m = max as usize;
    let mut theta = vec![0u64; m + 1];
    for p in lattice.points_up_to(max) {
        theta[(lattice.norm(&p) / 2) as usize] += 1;
    }
    let mut series = theta;
    for _ in 0..lattice.rank() {
        for n in 1..=m {
            for k in n..=m {
                series[k] += series[k - n];
            }
        }
    }
    series
}

//! Quadrature rules on top of `gauss-quad`.

use gauss_quad::{GaussHermite, GaussLegendre};
use std::num::NonZeroUsize;

/// Nodes and weights for E[f(Z)], Z ~ N(0,1). Weights sum to 1.
pub fn standard_normal_grid(n: usize) -> Vec<(f64, f64)> {
    if n <= 1 {
        return vec![(0.0, 1.0)];
    }
    let gh = GaussHermite::new(NonZeroUsize::new(n).unwrap());
    let norm = std::f64::consts::PI.sqrt();
    let mut grid: Vec<(f64, f64)> = gh
        .iter()
        .map(|(x, w)| (x * std::f64::consts::SQRT_2, w / norm))
        .collect();
    grid.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = grid.iter().map(|g| g.1).sum();
    for g in &mut grid {
        g.1 /= total;
    }
    grid
}

/// Composite Gauss–Legendre on [a, b] with `panels` equal panels.
pub struct CompositeLegendre {
    rule: GaussLegendre,
}

impl CompositeLegendre {
    pub fn new(order: usize) -> Self {
        Self { rule: GaussLegendre::new(NonZeroUsize::new(order).unwrap()) }
    }

    pub fn integrate(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + p as f64 * h;
                self.rule.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

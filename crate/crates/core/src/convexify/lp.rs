//! Dense dual simplex on the game form of the epigraph LP.
//!
//! With payoffs scaled into `B = A/s + 2 ∈ [1, 3]` the game value is
//! positive, and substituting `z = λ / t` turns `min t s.t. Bλ ≤ t·1, λ ∈ Δ`
//! into `max 1ᵀz s.t. Bz ≤ 1, z ≥ 0`. We solve its dual
//!
//! ```text
//! min 1ᵀw  s.t.  Bᵀw ≥ 1,  w ≥ 0
//! ```
//!
//! which has one row per function, so the tableau stays `m × (rows + m)`.
//! The all-surplus basis is dual feasible (unit costs), hence the dual
//! simplex needs no phase one. At the optimum `w / 1ᵀw` is the row player's
//! strategy (the certificate) and the surplus reduced costs give `z`.

use super::{finish, DualCertificate, DualEntry, MinimaxSolution, PayoffRows, SimplexWeights};
use super::Backend;
use crate::domain::SampledFunction;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct LpOptions {
    /// Pivot budget; `None` means `20·(rows + m) + 100`.
    pub max_pivots: Option<usize>,
    pub pivot_tolerance: f64,
    pub feasibility_tolerance: f64,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            max_pivots: None,
            pivot_tolerance: 1e-11,
            feasibility_tolerance: 1e-12,
        }
    }
}

struct Tableau {
    width: usize,
    cells: Vec<f64>,
    rhs: Vec<f64>,
    costs: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn row(&self, i: usize) -> &[f64] {
        &self.cells[i * self.width..(i + 1) * self.width]
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let w = self.width;
        let inv = 1.0 / self.cells[p * w + q];
        for v in &mut self.cells[p * w..(p + 1) * w] {
            *v *= inv;
        }
        self.rhs[p] *= inv;
        self.cells[p * w + q] = 1.0;
        let pivot_row = self.cells[p * w..(p + 1) * w].to_vec();
        let pivot_rhs = self.rhs[p];
        for i in 0..self.rhs.len() {
            if i == p {
                continue;
            }
            let factor = self.cells[i * w + q];
            if factor == 0.0 {
                continue;
            }
            for (c, &pv) in self.cells[i * w..(i + 1) * w].iter_mut().zip(&pivot_row) {
                *c -= factor * pv;
            }
            self.cells[i * w + q] = 0.0;
            self.rhs[i] -= factor * pivot_rhs;
        }
        let factor = self.costs[q];
        if factor != 0.0 {
            for (c, &pv) in self.costs.iter_mut().zip(&pivot_row) {
                *c -= factor * pv;
            }
            self.costs[q] = 0.0;
        }
        self.basis[p] = q;
    }
}

pub(super) fn solve(
    fs: &[SampledFunction],
    rows: &PayoffRows,
    options: &LpOptions,
) -> Result<MinimaxSolution> {
    let m = rows.m;
    let r_count = rows.rows();
    let scale = rows.entries.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let width = r_count + m;

    let mut cells = vec![0.0; m * width];
    for r in 0..r_count {
        for (k, &a) in rows.row(r).iter().enumerate() {
            cells[k * width + r] = -(a / scale + 2.0);
        }
    }
    for k in 0..m {
        cells[k * width + r_count + k] = 1.0;
    }
    let mut costs = vec![1.0; width];
    costs[r_count..].iter_mut().for_each(|c| *c = 0.0);
    let mut tab = Tableau {
        width,
        cells,
        rhs: vec![-1.0; m],
        costs,
        basis: (r_count..width).collect(),
    };

    let max_pivots = options.max_pivots.unwrap_or(20 * width + 100);
    // Switch to Bland's rule if Dantzig-style choices have not finished by then.
    let bland_after = width;
    let mut pivots = 0;
    let optimal = loop {
        let bland = pivots >= bland_after;
        let leaving = (0..m)
            .filter(|&i| tab.rhs[i] < -options.feasibility_tolerance)
            .min_by(|&a, &b| {
                if bland {
                    tab.basis[a].cmp(&tab.basis[b])
                } else {
                    tab.rhs[a].total_cmp(&tab.rhs[b]).then(a.cmp(&b))
                }
            });
        let Some(p) = leaving else { break true };
        if pivots >= max_pivots {
            break false;
        }
        let row = tab.row(p);
        let mut entering: Option<(usize, f64, f64)> = None;
        for (j, &a) in row.iter().enumerate() {
            if a >= -options.pivot_tolerance {
                continue;
            }
            let ratio = tab.costs[j].max(0.0) / -a;
            let better = match entering {
                None => true,
                Some((_, best_ratio, best_mag)) => {
                    let tie = (ratio - best_ratio).abs() <= 1e-13 * (1.0 + best_ratio);
                    if tie {
                        !bland && -a > best_mag
                    } else {
                        ratio < best_ratio
                    }
                }
            };
            if better {
                entering = Some((j, ratio, -a));
            }
        }
        let Some((q, _, _)) = entering else {
            return Err(Error::Solver(
                "dual simplex found the covering LP infeasible".into(),
            ));
        };
        tab.pivot(p, q);
        pivots += 1;
    };

    let z: Vec<f64> = tab.costs[r_count..].to_vec();
    let weights = SimplexWeights::normalized(z);
    let mut w = vec![0.0; r_count];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < r_count {
            w[b] = tab.rhs[i].max(0.0);
        }
    }
    let total: f64 = w.iter().sum();
    let certificate = (total > 0.0).then(|| {
        let entries: Vec<DualEntry> = w
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(r, &v)| DualEntry {
                point: rows.labels[r].0,
                sign: rows.labels[r].1,
                weight: v / total,
            })
            .collect();
        let mut cert = DualCertificate {
            entries,
            lower_bound: 0.0,
        };
        cert.lower_bound = cert.evaluate(fs);
        cert
    });
    let solution = finish(fs, weights, Backend::Lp, pivots, certificate);
    if optimal {
        Ok(solution)
    } else {
        let lower = solution
            .certificate
            .as_ref()
            .map_or(f64::NEG_INFINITY, |c| c.lower_bound);
        Err(Error::NotConverged {
            iterations: pivots,
            gap: solution.value - lower,
            best: Box::new(solution),
        })
    }
}

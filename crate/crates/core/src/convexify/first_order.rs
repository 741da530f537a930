//! Entropic mirror-prox on the matrix game, finished by support polishing.
//!
//! The iterates alone converge at `O(1/T)`, too slowly for a tight duality
//! gap. At doubling checkpoints we guess the supports of both players from
//! the current iterates, solve the indifference equations on those supports
//! and keep whichever primal and dual candidates score best.

use nalgebra::{DMatrix, DVector};

use super::{finish, Backend, DualCertificate, DualEntry, MinimaxSolution, PayoffRows, SimplexWeights};
use crate::domain::SampledFunction;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct FirstOrderOptions {
    pub max_iterations: usize,
    pub step: f64,
    /// Duality gap target, relative to the largest payoff magnitude.
    pub gap_tolerance: f64,
    pub polish: bool,
}

impl Default for FirstOrderOptions {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            step: 1.0,
            gap_tolerance: 1e-10,
            polish: true,
        }
    }
}

struct Game<'a> {
    a: &'a [f64],
    rows: usize,
    m: usize,
}

impl Game<'_> {
    fn payoff(&self, r: usize, k: usize) -> f64 {
        self.a[r * self.m + k]
    }

    /// `A λ`, one entry per row.
    fn row_payoffs(&self, lambda: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| {
                self.a[r * self.m..(r + 1) * self.m]
                    .iter()
                    .zip(lambda)
                    .map(|(a, l)| a * l)
                    .sum()
            })
            .collect()
    }

    /// `Aᵀ y`, one entry per function.
    fn column_payoffs(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(&self.a[r * self.m..(r + 1) * self.m]) {
                *o += yr * a;
            }
        }
        out
    }

    fn primal_value(&self, lambda: &[f64]) -> f64 {
        self.row_payoffs(lambda)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn dual_value(&self, y: &[f64]) -> f64 {
        self.column_payoffs(y)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

fn softmax(logs: &[f64]) -> Vec<f64> {
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= total);
    out
}

fn mirror_step(logs: &[f64], grad: &[f64], step: f64) -> Vec<f64> {
    let mut next: Vec<f64> = logs.iter().zip(grad).map(|(l, g)| l + step * g).collect();
    let top = next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    next.iter_mut().for_each(|v| *v -= top);
    next
}

fn top_indices(values: &[f64], count: usize, descending: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let ord = values[a].total_cmp(&values[b]);
        let ord = if descending { ord.reverse() } else { ord };
        ord.then(a.cmp(&b))
    });
    idx.truncate(count);
    idx.sort_unstable();
    idx
}

fn clamp_normalize(mut v: Vec<f64>) -> Option<Vec<f64>> {
    v.iter_mut().for_each(|x| {
        if !x.is_finite() || *x < 0.0 {
            *x = 0.0
        }
    });
    let total: f64 = v.iter().sum();
    (total > 0.0).then(|| v.into_iter().map(|x| x / total).collect())
}

/// Equalise the active rows over the support `cols`.
fn polish_primal(game: &Game, cols: &[usize], act: &[usize]) -> Option<Vec<f64>> {
    let (s, t) = (cols.len(), act.len());
    let mat = DMatrix::from_fn(t + 1, s + 1, |i, j| match (i < t, j < s) {
        (true, true) => game.payoff(act[i], cols[j]),
        (true, false) => -1.0,
        (false, true) => 1.0,
        (false, false) => 0.0,
    });
    let mut rhs = DVector::zeros(t + 1);
    rhs[t] = 1.0;
    let x = mat.svd(true, true).solve(&rhs, 1e-13).ok()?;
    let local = clamp_normalize(x.iter().take(s).copied().collect())?;
    let mut lambda = vec![0.0; game.m];
    for (&c, v) in cols.iter().zip(local) {
        lambda[c] = v;
    }
    Some(lambda)
}

/// Equalise the supported columns over the active rows `act`.
fn polish_dual(game: &Game, cols: &[usize], act: &[usize]) -> Option<Vec<f64>> {
    let (s, t) = (cols.len(), act.len());
    let mat = DMatrix::from_fn(s + 1, t + 1, |i, j| match (i < s, j < t) {
        (true, true) => game.payoff(act[j], cols[i]),
        (true, false) => -1.0,
        (false, true) => 1.0,
        (false, false) => 0.0,
    });
    let mut rhs = DVector::zeros(s + 1);
    rhs[s] = 1.0;
    let x = mat.svd(true, true).solve(&rhs, 1e-13).ok()?;
    let local = clamp_normalize(x.iter().take(t).copied().collect())?;
    let mut y = vec![0.0; game.rows];
    for (&r, v) in act.iter().zip(local) {
        y[r] = v;
    }
    Some(y)
}

struct Best {
    lambda: Vec<f64>,
    primal: f64,
    y: Vec<f64>,
    dual: f64,
}

impl Best {
    fn offer_primal(&mut self, game: &Game, lambda: Vec<f64>) {
        let p = game.primal_value(&lambda);
        if p < self.primal {
            self.primal = p;
            self.lambda = lambda;
        }
    }

    fn offer_dual(&mut self, game: &Game, y: Vec<f64>) {
        let d = game.dual_value(&y);
        if d > self.dual {
            self.dual = d;
            self.y = y;
        }
    }

    fn gap(&self) -> f64 {
        self.primal - self.dual
    }
}

/// Support sizes worth trying: all of them for small games, otherwise the
/// number of clearly nonzero weights at a few thresholds, give or take one.
fn support_sizes(m: usize, lambdas: &[&[f64]]) -> Vec<usize> {
    if m <= 12 {
        return (1..=m).collect();
    }
    let mut sizes = Vec::new();
    for l in lambdas {
        let top = l.iter().copied().fold(0.0, f64::max);
        for rel in [1e-2, 1e-3, 1e-4, 1e-6] {
            let count = l.iter().filter(|&&v| v > rel * top).count();
            for s in [count.saturating_sub(1), count, count + 1] {
                if (1..=m).contains(&s) {
                    sizes.push(s);
                }
            }
        }
    }
    sizes.sort_unstable();
    sizes.dedup();
    sizes
}

fn polish(game: &Game, best: &mut Best, lambdas: &[&[f64]], ys: &[&[f64]]) {
    let mut col_guesses: Vec<Vec<f64>> = lambdas.iter().map(|l| l.to_vec()).collect();
    // Functions with the smallest payoff against the row player are the ones worth mixing.
    col_guesses.extend(ys.iter().map(|y| {
        game.column_payoffs(y).into_iter().map(|v| -v).collect()
    }));
    let mut row_guesses: Vec<Vec<f64>> = ys.iter().map(|y| y.to_vec()).collect();
    row_guesses.extend(lambdas.iter().map(|l| game.row_payoffs(l)));

    for s in support_sizes(game.m, lambdas) {
        for cg in &col_guesses {
            let cols = top_indices(cg, s, true);
            for rg in &row_guesses {
                for t in [s, s + 1] {
                    if t > game.rows {
                        continue;
                    }
                    let act = top_indices(rg, t, true);
                    if let Some(l) = polish_primal(game, &cols, &act) {
                        best.offer_primal(game, l);
                    }
                    if let Some(y) = polish_dual(game, &cols, &act) {
                        best.offer_dual(game, y);
                    }
                }
            }
        }
    }
}

pub(super) fn solve(
    fs: &[SampledFunction],
    rows: &PayoffRows,
    options: &FirstOrderOptions,
) -> Result<MinimaxSolution> {
    if !(options.step > 0.0) || !(options.gap_tolerance >= 0.0) {
        return Err(Error::InvalidParameter(
            "first-order step must be positive and gap tolerance nonnegative".into(),
        ));
    }
    let scale = rows.entries.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let scaled: Vec<f64> = rows.entries.iter().map(|v| v / scale).collect();
    let game = Game {
        a: &scaled,
        rows: rows.rows(),
        m: rows.m,
    };

    let mut log_l = vec![0.0; game.m];
    let mut log_y = vec![0.0; game.rows];
    let mut avg_l = vec![0.0; game.m];
    let mut avg_y = vec![0.0; game.rows];
    let uniform_l = vec![1.0 / game.m as f64; game.m];
    let uniform_y = vec![1.0 / game.rows as f64; game.rows];
    let mut best = Best {
        primal: game.primal_value(&uniform_l),
        lambda: uniform_l,
        dual: game.dual_value(&uniform_y),
        y: uniform_y,
    };

    let eta = options.step;
    let mut checkpoint = 16;
    let mut iterations = 0;
    while iterations < options.max_iterations {
        let (l, y) = (softmax(&log_l), softmax(&log_y));
        let gl: Vec<f64> = game.column_payoffs(&y).into_iter().map(|v| -v).collect();
        let gy = game.row_payoffs(&l);
        let half_log_l = mirror_step(&log_l, &gl, eta);
        let half_log_y = mirror_step(&log_y, &gy, eta);
        let (hl, hy) = (softmax(&half_log_l), softmax(&half_log_y));
        let gl: Vec<f64> = game.column_payoffs(&hy).into_iter().map(|v| -v).collect();
        let gy = game.row_payoffs(&hl);
        log_l = mirror_step(&log_l, &gl, eta);
        log_y = mirror_step(&log_y, &gy, eta);

        iterations += 1;
        let w = 1.0 / iterations as f64;
        for (a, v) in avg_l.iter_mut().zip(&hl) {
            *a += w * (v - *a);
        }
        for (a, v) in avg_y.iter_mut().zip(&hy) {
            *a += w * (v - *a);
        }

        if iterations == checkpoint || iterations == options.max_iterations {
            checkpoint *= 2;
            let (l, y) = (softmax(&log_l), softmax(&log_y));
            best.offer_primal(&game, avg_l.clone());
            best.offer_dual(&game, avg_y.clone());
            if options.polish {
                polish(&game, &mut best, &[&avg_l, &l], &[&avg_y, &y]);
            }
            if best.gap() <= options.gap_tolerance {
                break;
            }
        }
    }

    let y_total: f64 = best.y.iter().sum();
    let mut certificate = DualCertificate {
        entries: best
            .y
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(r, &v)| DualEntry {
                point: rows.labels[r].0,
                sign: rows.labels[r].1,
                weight: v / y_total,
            })
            .collect(),
        lower_bound: 0.0,
    };
    certificate.lower_bound = certificate.evaluate(fs);
    let gap = best.gap();
    let converged = gap <= options.gap_tolerance;
    let solution = finish(
        fs,
        SimplexWeights::normalized(best.lambda),
        Backend::FirstOrder,
        iterations,
        Some(certificate),
    );
    if converged {
        Ok(solution)
    } else {
        Err(Error::NotConverged {
            iterations,
            gap: gap * scale,
            best: Box::new(solution),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{solve_minimax_with, SolverOptions};
    use super::*;
    use crate::domain::Grid;

    #[test]
    fn matching_pennies_style_game() {
        let grid = Grid::uniform(2).unwrap();
        let fs = vec![
            SampledFunction::new(grid.clone(), vec![1.0, -1.0]).unwrap(),
            SampledFunction::new(grid, vec![-1.0, 2.0]).unwrap(),
        ];
        // λ = (3/5, 2/5) gives Σ λ f = (1/5, 1/5)
        let sol = solve_minimax_with(&fs, Backend::FirstOrder, &SolverOptions::default()).unwrap();
        assert!((sol.value - 0.2).abs() < 1e-12);
        assert!((sol.weights.as_slice()[0] - 0.6).abs() < 1e-10);
    }

    #[test]
    fn without_polishing_the_gap_stays_open() {
        let grid = Grid::uniform(16).unwrap();
        let fs: Vec<SampledFunction> = (0..3)
            .map(|k| SampledFunction::from_fn(&grid, |x| (x - 0.3 * k as f64).powi(2) - 0.1).unwrap())
            .collect();
        let options = SolverOptions {
            first_order: FirstOrderOptions {
                max_iterations: 50,
                polish: false,
                ..FirstOrderOptions::default()
            },
            ..SolverOptions::default()
        };
        match solve_minimax_with(&fs, Backend::FirstOrder, &options) {
            Err(Error::NotConverged { gap, best, .. }) => {
                assert!(gap > 0.0);
                let cert = best.certificate.unwrap();
                assert!(cert.lower_bound <= best.value + 1e-15);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}

//! Canonical sequence families with known bounds, Lipschitz constants and
//! integrals, plus the typewriter negative control.
//!
//! Tent-shaped families (sliding hump, typewriter) put their peak on a grid
//! point so the sup-norm is exactly 1; if no grid point lies strictly inside
//! the tent's support the generator refuses with [`Error::Resolution`].
//! [`CorpusEntry::preferred_grid`] adds the support endpoints and peaks as
//! knots so that every requested term is resolvable and quadrature is exact.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{FunctionSequence, Grid, SampledFunction};
use crate::error::{Error, Result};

/// Relative slack added to declared Lipschitz constants when a whole sequence
/// is run; absorbs rounding in sampled slopes.
pub const LIPSCHITZ_MARGIN: f64 = 1e-9;

const MONOTONE_POWER_SCALE: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusId {
    SlidingHump,
    PowerGap,
    ExpSpike,
    MonotonePower,
    Typewriter,
}

impl CorpusId {
    pub const ALL: [CorpusId; 5] = [
        CorpusId::SlidingHump,
        CorpusId::PowerGap,
        CorpusId::ExpSpike,
        CorpusId::MonotonePower,
        CorpusId::Typewriter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CorpusId::SlidingHump => "sliding_hump",
            CorpusId::PowerGap => "power_gap",
            CorpusId::ExpSpike => "exp_spike",
            CorpusId::MonotonePower => "monotone_power",
            CorpusId::Typewriter => "typewriter",
        }
    }

    pub fn entry(self) -> CorpusEntry {
        CorpusEntry::new(self)
    }
}

impl fmt::Display for CorpusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorpusId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CorpusId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown corpus entry `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub pointwise_null: bool,
    pub uniformly_null: bool,
    pub monotone_decreasing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusEntry {
    pub id: CorpusId,
    pub bound: f64,
    pub flags: Flags,
    pub description: &'static str,
}

/// Tent with support `[a, b]` and unit peak at a grid point inside it.
#[derive(Clone, Copy, Debug)]
struct Tent {
    a: f64,
    b: f64,
    peak: f64,
}

impl Tent {
    fn snapped(a: f64, b: f64, grid: &Grid, label: &str) -> Result<Self> {
        let inside = grid.interior(a, b);
        if inside.is_empty() {
            return Err(Error::Resolution(format!(
                "{label}: no grid point inside the support ({a}, {b}); refine the grid or use the preferred grid"
            )));
        }
        let mid = 0.5 * (a + b);
        let peak = inside
            .map(|i| grid.point(i))
            .min_by(|x, y| (x - mid).abs().total_cmp(&(y - mid).abs()))
            .expect("nonempty range");
        Ok(Self { a, b, peak })
    }

    fn eval(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            0.0
        } else if x <= self.peak {
            (x - self.a) / (self.peak - self.a)
        } else {
            (self.b - x) / (self.b - self.peak)
        }
    }

    fn lipschitz(&self) -> f64 {
        (1.0 / (self.peak - self.a)).max(1.0 / (self.b - self.peak))
    }

    /// Exact trapezoid overshoot: the two convex kinks at `a` and `b`. The peak
    /// sits on a grid point and contributes nothing.
    fn trapezoid_error(&self, grid: &Grid) -> f64 {
        hinge_error(grid, self.a, 1.0 / (self.peak - self.a))
            + hinge_error(grid, self.b, 1.0 / (self.b - self.peak))
    }
}

/// Overshoot of the trapezoid rule on a hinge of slope `slope` kinked at `kink`.
fn hinge_error(grid: &Grid, kink: f64, slope: f64) -> f64 {
    let pts = grid.points();
    let right = pts.partition_point(|&p| p <= kink);
    if right == 0 || right == pts.len() || pts[right - 1] == kink {
        return 0.0;
    }
    let (lo, hi) = (pts[right - 1], pts[right]);
    0.5 * slope * (kink - lo) * (hi - kink)
}

fn hump_support(n: usize) -> (f64, f64) {
    (1.0 / (n as f64 + 1.0), 1.0 / n as f64)
}

/// Dyadic block of term `n = 2^k + j`: `[j / 2^k, (j + 1) / 2^k]`, plus its level `k`.
fn typewriter_block(n: usize) -> (f64, f64, u32) {
    let k = usize::BITS - 1 - n.leading_zeros();
    let j = n - (1usize << k);
    let width = 1.0 / (1u64 << k) as f64;
    (j as f64 * width, (j + 1) as f64 * width, k)
}

impl CorpusEntry {
    pub fn new(id: CorpusId) -> Self {
        let (bound, flags, description) = match id {
            CorpusId::SlidingHump => (
                1.0,
                Flags {
                    pointwise_null: true,
                    uniformly_null: false,
                    monotone_decreasing: false,
                },
                "unit tent supported on [1/(n+1), 1/n]",
            ),
            CorpusId::PowerGap => (
                0.25,
                Flags {
                    pointwise_null: true,
                    uniformly_null: false,
                    monotone_decreasing: false,
                },
                "x^n - x^(2n)",
            ),
            CorpusId::ExpSpike => (
                (-1.0f64).exp(),
                Flags {
                    pointwise_null: true,
                    uniformly_null: false,
                    monotone_decreasing: false,
                },
                "n x exp(-n x)",
            ),
            CorpusId::MonotonePower => (
                MONOTONE_POWER_SCALE,
                Flags {
                    pointwise_null: true,
                    uniformly_null: true,
                    monotone_decreasing: true,
                },
                "(0.9 x)^n, i.e. t^n for t in [0, 0.9]",
            ),
            CorpusId::Typewriter => (
                1.0,
                Flags {
                    pointwise_null: false,
                    uniformly_null: false,
                    monotone_decreasing: false,
                },
                "unit tents on dyadic blocks sweeping [0, 1] (negative control)",
            ),
        };
        Self {
            id,
            bound,
            flags,
            description,
        }
    }

    pub fn all() -> Vec<CorpusEntry> {
        CorpusId::ALL.into_iter().map(CorpusEntry::new).collect()
    }

    fn check_index(n: usize) -> Result<()> {
        if n == 0 {
            Err(Error::InvalidParameter("corpus terms are indexed from 1".into()))
        } else {
            Ok(())
        }
    }

    fn tent(&self, n: usize, grid: &Grid) -> Option<Result<Tent>> {
        match self.id {
            CorpusId::SlidingHump => {
                let (a, b) = hump_support(n);
                Some(Tent::snapped(a, b, grid, &format!("sliding_hump term {n}")))
            }
            CorpusId::Typewriter => {
                let (a, b, _) = typewriter_block(n);
                Some(Tent::snapped(a, b, grid, &format!("typewriter term {n}")))
            }
            _ => None,
        }
    }

    /// Term `n` (1-based) sampled on `grid`.
    pub fn generate(&self, n: usize, grid: &Grid) -> Result<SampledFunction> {
        Self::check_index(n)?;
        if let Some(tent) = self.tent(n, grid) {
            let tent = tent?;
            return SampledFunction::from_fn(grid, |x| tent.eval(x));
        }
        let nf = n as f64;
        let exp = n as i32;
        // Sampled values can overshoot the analytic maximum by an ulp; clamp to it.
        let alpha = self.bound;
        match self.id {
            CorpusId::PowerGap => SampledFunction::from_fn(grid, |x| {
                let u = x.powi(exp);
                (u - u * u).min(alpha)
            }),
            CorpusId::ExpSpike => {
                SampledFunction::from_fn(grid, |x| (nf * x * (-nf * x).exp()).min(alpha))
            }
            CorpusId::MonotonePower => {
                SampledFunction::from_fn(grid, |x| (MONOTONE_POWER_SCALE * x).powi(exp))
            }
            CorpusId::SlidingHump | CorpusId::Typewriter => unreachable!("handled as tents"),
        }
    }

    /// Terms `1..=len` as a sequence with the entry's declared bound.
    pub fn sequence(&self, len: usize, grid: &Grid) -> Result<FunctionSequence> {
        let terms = (1..=len)
            .map(|n| self.generate(n, grid))
            .collect::<Result<Vec<_>>>()?;
        FunctionSequence::new(terms, self.bound)
    }

    /// Lipschitz constant of term `n` on `[0, 1]` (for tents, of the snapped tent on `grid`).
    pub fn lipschitz(&self, n: usize, grid: &Grid) -> Result<f64> {
        Self::check_index(n)?;
        if let Some(tent) = self.tent(n, grid) {
            return Ok(tent?.lipschitz());
        }
        let nf = n as f64;
        Ok(match self.id {
            // |n x^(n-1) (1 - 2 x^n)| <= n, attained at x = 1
            CorpusId::PowerGap => nf,
            // |n e^(-nx) (1 - nx)| <= n, attained at x = 0
            CorpusId::ExpSpike => nf,
            CorpusId::MonotonePower => nf * MONOTONE_POWER_SCALE.powi(n as i32),
            CorpusId::SlidingHump | CorpusId::Typewriter => unreachable!(),
        })
    }

    /// A constant valid for every term `1..=len`, inflated by [`LIPSCHITZ_MARGIN`].
    pub fn sequence_lipschitz(&self, len: usize, grid: &Grid) -> Result<f64> {
        let mut best: f64 = 0.0;
        for n in 1..=len {
            best = best.max(self.lipschitz(n, grid)?);
        }
        Ok(best * (1.0 + LIPSCHITZ_MARGIN))
    }

    /// `∫₀¹ g_n`.
    pub fn integral(&self, n: usize) -> Option<f64> {
        if n == 0 {
            return None;
        }
        let nf = n as f64;
        Some(match self.id {
            CorpusId::SlidingHump => {
                let (a, b) = hump_support(n);
                0.5 * (b - a)
            }
            CorpusId::PowerGap => 1.0 / (nf + 1.0) - 1.0 / (2.0 * nf + 1.0),
            CorpusId::ExpSpike => (1.0 - (1.0 + nf) * (-nf).exp()) / nf,
            CorpusId::MonotonePower => MONOTONE_POWER_SCALE.powi(n as i32) / (nf + 1.0),
            CorpusId::Typewriter => {
                let (a, b, _) = typewriter_block(n);
                0.5 * (b - a)
            }
        })
    }

    /// Bound on `|trapezoid(g_n) - ∫₀¹ g_n|` for a grid spanning `[0, 1]`.
    ///
    /// Smooth families use `h²/12 · max|g''|`. Tents use the exact overshoot
    /// of their two off-grid kinks, `slope · (a - x_i)(x_{i+1} - a) / 2` each,
    /// which is at most `(slope_a + slope_b) h² / 8`, i.e. `O(h)` once the
    /// support is narrower than a grid cell.
    pub fn quadrature_budget(&self, n: usize, grid: &Grid) -> Result<f64> {
        Self::check_index(n)?;
        if let Some(tent) = self.tent(n, grid) {
            return Ok(tent?.trapezoid_error(grid));
        }
        let h = grid.max_gap();
        let nf = n as f64;
        let second_derivative = match self.id {
            // n(n-1)x^(n-2) - 2n(2n-1)x^(2n-2)
            CorpusId::PowerGap => 2.0 * nf * (2.0 * nf - 1.0),
            // n² e^(-nx) (nx - 2)
            CorpusId::ExpSpike => 2.0 * nf * nf,
            CorpusId::MonotonePower => {
                nf * (nf - 1.0) * MONOTONE_POWER_SCALE.powi(n as i32)
            }
            CorpusId::SlidingHump | CorpusId::Typewriter => unreachable!(),
        };
        Ok(h * h / 12.0 * second_derivative)
    }

    /// Knots that make terms `1..=len` exactly representable.
    pub fn knots(&self, len: usize) -> Vec<f64> {
        match self.id {
            CorpusId::SlidingHump => {
                let mut knots = Vec::with_capacity(2 * len + 1);
                for n in 1..=len {
                    let (a, b) = hump_support(n);
                    knots.extend([a, b, 0.5 * (a + b)]);
                }
                knots
            }
            CorpusId::Typewriter if len > 0 => {
                let (_, _, level) = typewriter_block(len);
                let denom = (1u64 << (level + 1)) as f64;
                (0..=(1u64 << (level + 1))).map(|i| i as f64 / denom).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Uniform grid of `size` points, refined with [`Self::knots`] for `len` terms.
    pub fn preferred_grid(&self, size: usize, len: usize) -> Result<Grid> {
        let base = Grid::uniform(size)?;
        let knots = self.knots(len);
        if knots.is_empty() {
            Ok(base)
        } else {
            base.with_knots(&knots)
        }
    }

    /// Indices `n <= len` whose term is at least `level` at grid point `point`.
    pub fn hit_indices(&self, len: usize, grid: &Grid, point: usize, level: f64) -> Result<Vec<usize>> {
        let mut hits = Vec::new();
        for n in 1..=len {
            if self.generate(n, grid)?.values()[point] >= level {
                hits.push(n);
            }
        }
        Ok(hits)
    }
}

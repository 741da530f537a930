//! Minimal sup-norm convex combinations and convexifications.
//!
//! [`solve_minimax`] computes `min_{λ ∈ Δ} max_j |Σ_k λ_k f_k(x_j)|`, the
//! epigraph LP `min t  s.t. −t ≤ Σ λ_k f_k(x_j) ≤ t, λ ∈ Δ`. Each (grid
//! point, sign) pair is one row of a payoff matrix and the problem is the
//! column player's side of that matrix game. The row player's optimal mixed
//! strategy is a nonnegative weighting of grid points under which every `f_k`
//! has mean at least `t*`: a [`DualCertificate`], i.e. a positive functional
//! separating the convex hull of the `f_k` from the ball of radius `t* − ε`.
//!
//! Two independent backends solve it: a dual simplex method ([`Backend::Lp`])
//! and an entropic mirror-prox first-order method with an active-set
//! polishing step ([`Backend::FirstOrder`]).
//!
//! [`build_convexification`] then chooses, for each `n`, a window
//! `[n, m]` and weights so that `Σ λ_k |f_k|` has sup-norm at most `ε_n`.

mod first_order;
mod lp;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{FunctionSequence, Grid, SampledFunction};
use crate::error::{Error, Result};

pub use first_order::FirstOrderOptions;
pub use lp::LpOptions;

/// Tolerance on `Σλ = 1`.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;
/// Tolerance for a dual certificate to match the primal value.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-8;
/// Tolerance for recomputing a reported achieved value.
pub const RECOMPUTE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::Empty("simplex weights"));
        }
        if let Some(index) = lambda.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if let Some(point) = lambda.iter().position(|&v| v < 0.0) {
            return Err(Error::Negative {
                what: "simplex weight".into(),
                point,
            });
        }
        let sum: f64 = lambda.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "simplex weights sum to {sum}, not 1"
            )));
        }
        Ok(Self(lambda))
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    /// Clamps tiny negatives from roundoff and rescales onto the simplex.
    pub(crate) fn normalized(mut raw: Vec<f64>) -> Self {
        for v in &mut raw {
            if !(*v > 0.0) {
                *v = 0.0;
            }
        }
        let sum: f64 = raw.iter().sum();
        if sum > 0.0 {
            for v in &mut raw {
                *v /= sum;
            }
            Self(raw)
        } else {
            Self::uniform(raw.len())
        }
    }

    /// Unvalidated weights, for checking corrupted data in tests and verifiers.
    pub fn from_raw(lambda: Vec<f64>) -> Self {
        Self(lambda)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Backend {
    #[serde(rename = "lp")]
    Lp,
    #[serde(rename = "first-order")]
    FirstOrder,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Lp => "lp",
            Backend::FirstOrder => "first-order",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lp" => Ok(Backend::Lp),
            "first-order" => Ok(Backend::FirstOrder),
            _ => Err(Error::InvalidParameter(format!("unknown backend `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DualEntry {
    pub point: usize,
    pub sign: i8,
    pub weight: f64,
}

/// Weights over (grid point, sign) constraints with the lower bound they prove.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualCertificate {
    pub entries: Vec<DualEntry>,
    pub lower_bound: f64,
}

impl DualCertificate {
    /// `min_k Σ_e w_e · s_e · f_k(x_e)`: a lower bound on the minimax value
    /// for any nonnegative weights summing to one.
    pub fn evaluate(&self, fs: &[SampledFunction]) -> f64 {
        fs.iter()
            .map(|f| {
                self.entries
                    .iter()
                    .map(|e| e.weight * f64::from(e.sign) * f.values()[e.point])
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check(&self, fs: &[SampledFunction], claimed: f64) -> CertificateCheck {
        let weight_sum = self.entries.iter().map(|e| e.weight).sum();
        let min_weight = self
            .entries
            .iter()
            .map(|e| e.weight)
            .fold(f64::INFINITY, f64::min);
        let in_range = self
            .entries
            .iter()
            .all(|e| fs.iter().all(|f| e.point < f.len()) && (e.sign == 1 || e.sign == -1));
        let lower_bound = if in_range { self.evaluate(fs) } else { f64::NAN };
        CertificateCheck {
            weight_sum,
            min_weight,
            lower_bound,
            claimed,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CertificateCheck {
    pub weight_sum: f64,
    pub min_weight: f64,
    pub lower_bound: f64,
    pub claimed: f64,
}

impl CertificateCheck {
    pub fn gap(&self) -> f64 {
        self.claimed - self.lower_bound
    }

    pub fn is_valid(&self, tolerance: f64) -> bool {
        !(self.min_weight < 0.0)
            && (self.weight_sum - 1.0).abs() <= tolerance
            && self.gap().abs() <= tolerance
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimaxSolution {
    pub weights: SimplexWeights,
    /// `sup_norm(Σ λ_k f_k)` recomputed from the weights.
    pub value: f64,
    #[serde(skip)]
    pub combined: SampledFunction,
    pub solver: Backend,
    pub iterations: usize,
    pub certificate: Option<DualCertificate>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolverOptions {
    pub lp: LpOptions,
    pub first_order: FirstOrderOptions,
}

/// Payoff rows `(point, sign)` with entries `sign · f_k(x_point)`.
///
/// Points where every `f_k` vanishes are dropped, as is the sign whose row is
/// dominated by its partner (all entries of one sign). Neither changes the
/// optimum because `max(a, −a) ≥ 0` on every kept pair.
pub(crate) struct PayoffRows {
    pub labels: Vec<(usize, i8)>,
    /// Row-major `labels.len() × m`.
    pub entries: Vec<f64>,
    pub m: usize,
}

impl PayoffRows {
    pub fn build(fs: &[SampledFunction]) -> Self {
        let m = fs.len();
        let points = fs[0].len();
        let mut labels = Vec::new();
        let mut entries = Vec::new();
        for j in 0..points {
            let column: Vec<f64> = fs.iter().map(|f| f.values()[j]).collect();
            let any_pos = column.iter().any(|&v| v > 0.0);
            let any_neg = column.iter().any(|&v| v < 0.0);
            if any_pos {
                labels.push((j, 1));
                entries.extend(&column);
            }
            if any_neg {
                labels.push((j, -1));
                entries.extend(column.iter().map(|v| -v));
            }
        }
        Self { labels, entries, m }
    }

    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.entries[r * self.m..(r + 1) * self.m]
    }
}

fn check_inputs(fs: &[SampledFunction]) -> Result<&Grid> {
    let first = fs.first().ok_or(Error::Empty("minimax input"))?;
    for f in fs {
        first.check_grid(f)?;
    }
    Ok(first.grid())
}

/// `Σ λ_k f_k` and its sup-norm.
pub fn combine(fs: &[SampledFunction], weights: &[f64]) -> Result<SampledFunction> {
    let grid = check_inputs(fs)?;
    if weights.len() != fs.len() {
        return Err(Error::LengthMismatch {
            expected: fs.len(),
            actual: weights.len(),
        });
    }
    let mut acc = vec![0.0; grid.len()];
    for (f, &w) in fs.iter().zip(weights) {
        for (a, &v) in acc.iter_mut().zip(f.values()) {
            *a += w * v;
        }
    }
    SampledFunction::new(grid.clone(), acc)
}

pub(crate) fn finish(
    fs: &[SampledFunction],
    weights: SimplexWeights,
    solver: Backend,
    iterations: usize,
    certificate: Option<DualCertificate>,
) -> MinimaxSolution {
    let combined = combine(fs, weights.as_slice()).expect("inputs validated");
    MinimaxSolution {
        value: combined.sup_norm(),
        weights,
        combined,
        solver,
        iterations,
        certificate,
    }
}

pub fn solve_minimax(fs: &[SampledFunction], backend: Backend) -> Result<MinimaxSolution> {
    solve_minimax_with(fs, backend, &SolverOptions::default())
}

pub fn solve_minimax_with(
    fs: &[SampledFunction],
    backend: Backend,
    options: &SolverOptions,
) -> Result<MinimaxSolution> {
    check_inputs(fs)?;
    let rows = PayoffRows::build(fs);
    if rows.rows() == 0 {
        // All functions vanish: every simplex point is optimal.
        let cert = DualCertificate {
            entries: vec![DualEntry {
                point: 0,
                sign: 1,
                weight: 1.0,
            }],
            lower_bound: 0.0,
        };
        return Ok(finish(fs, SimplexWeights::uniform(fs.len()), backend, 0, Some(cert)));
    }
    match backend {
        Backend::Lp => lp::solve(fs, &rows, &options.lp),
        Backend::FirstOrder => first_order::solve(fs, &rows, &options.first_order),
    }
}

/// The first-order backend, kept as a separately named entry point for cross-checks.
pub fn solve_minimax_oracle(fs: &[SampledFunction]) -> Result<MinimaxSolution> {
    solve_minimax(fs, Backend::FirstOrder)
}

/// Target tolerance `ε_n` per step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonSchedule {
    /// `1/n`
    Harmonic,
    /// `c/n`
    Scaled(f64),
    /// `ε_1, ε_2, ...`: positive and strictly decreasing.
    Explicit(Vec<f64>),
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule::Harmonic
    }
}

impl EpsilonSchedule {
    fn validate(&self, steps: usize) -> Result<()> {
        match self {
            EpsilonSchedule::Harmonic => Ok(()),
            EpsilonSchedule::Scaled(c) if c.is_finite() && *c > 0.0 => Ok(()),
            EpsilonSchedule::Scaled(c) => Err(Error::InvalidParameter(format!(
                "schedule scale must be positive, got {c}"
            ))),
            EpsilonSchedule::Explicit(eps) => {
                if eps.len() < steps {
                    return Err(Error::InvalidParameter(format!(
                        "schedule has {} entries for {steps} steps",
                        eps.len()
                    )));
                }
                if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
                    return Err(Error::InvalidParameter("schedule entries must be positive".into()));
                }
                if eps.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(Error::InvalidParameter(
                        "schedule must be strictly decreasing".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn target(&self, n: usize) -> f64 {
        match self {
            EpsilonSchedule::Harmonic => 1.0 / n as f64,
            EpsilonSchedule::Scaled(c) => c / n as f64,
            EpsilonSchedule::Explicit(eps) => eps[n - 1],
        }
    }
}

/// How the window `[n, m]` grows until the target is met.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowPolicy {
    /// Window lengths 1, 2, 4, ...; with `refine`, bisect back to the
    /// shortest length that meets the target.
    Doubling { refine: bool },
    /// Window lengths 1, 1 + step, 1 + 2·step, ...
    Linear { step: usize },
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy::Doubling { refine: true }
    }
}

#[derive(Clone, Debug)]
pub struct ConvexifyOptions {
    pub schedule: EpsilonSchedule,
    pub window: WindowPolicy,
    pub backend: Backend,
    /// Number of steps `n = 1..=steps`; defaults to the sequence length.
    pub steps: Option<usize>,
    /// Slack allowed on `achieved ≤ ε_n`.
    pub tolerance: f64,
    pub solver: SolverOptions,
}

impl Default for ConvexifyOptions {
    fn default() -> Self {
        Self {
            schedule: EpsilonSchedule::Harmonic,
            window: WindowPolicy::default(),
            backend: Backend::Lp,
            steps: None,
            tolerance: 1e-9,
            solver: SolverOptions::default(),
        }
    }
}

/// One term `g_n ∈ co(f_n, f_{n+1}, ...)` of a convexification.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexificationStep {
    pub n: usize,
    /// Source indices `[n, m]`, inclusive and 1-based.
    pub window: (usize, usize),
    pub weights: SimplexWeights,
    /// `sup_norm(Σ λ_k |f_k|)`
    pub achieved: f64,
    /// `sup_norm(Σ λ_k f_k)`, never larger than `achieved`.
    pub signed_achieved: f64,
    pub target: f64,
    pub met: bool,
    pub converged: bool,
    pub dual_certificate: Option<DualCertificate>,
}

#[derive(Serialize)]
struct StepJson<'a> {
    n: usize,
    window: [usize; 2],
    weights: &'a [f64],
    achieved: f64,
    signed_achieved: f64,
    target: f64,
    met: bool,
    dual_certificate: Vec<DualEntryJson>,
}

#[derive(Serialize)]
struct DualEntryJson {
    point: usize,
    x: f64,
    sign: i8,
    weight: f64,
}

#[derive(Serialize)]
struct StepCsv {
    n: usize,
    m: usize,
    achieved: f64,
    target: f64,
}

/// JSON array of steps with their dual certificates.
pub fn steps_to_json(steps: &[ConvexificationStep], grid: &Grid) -> Result<String> {
    let rows: Vec<StepJson> = steps
        .iter()
        .map(|s| StepJson {
            n: s.n,
            window: [s.window.0, s.window.1],
            weights: s.weights.as_slice(),
            achieved: s.achieved,
            signed_achieved: s.signed_achieved,
            target: s.target,
            met: s.met,
            dual_certificate: s
                .dual_certificate
                .iter()
                .flat_map(|c| &c.entries)
                .map(|e| DualEntryJson {
                    point: e.point,
                    x: grid.point(e.point),
                    sign: e.sign,
                    weight: e.weight,
                })
                .collect(),
        })
        .collect();
    Ok(serde_json::to_string_pretty(&rows)?)
}

/// CSV summary with columns `n, m, achieved, target`.
pub fn write_steps_csv<W: Write>(steps: &[ConvexificationStep], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in steps {
        w.serialize(StepCsv {
            n: s.n,
            m: s.window.1,
            achieved: s.achieved,
            target: s.target,
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn solve_window(
    abs_terms: &[SampledFunction],
    n: usize,
    len: usize,
    options: &ConvexifyOptions,
) -> Result<(MinimaxSolution, bool)> {
    let window = &abs_terms[n - 1..n - 1 + len];
    match solve_minimax_with(window, options.backend, &options.solver) {
        Ok(sol) => Ok((sol, true)),
        Err(Error::NotConverged { best, .. }) => Ok((*best, false)),
        Err(e) => Err(e),
    }
}

fn build_step(
    seq: &FunctionSequence,
    abs_terms: &[SampledFunction],
    n: usize,
    options: &ConvexifyOptions,
) -> Result<ConvexificationStep> {
    let target = options.schedule.target(n);
    let available = seq.len() - n + 1;
    let meets = |sol: &MinimaxSolution| sol.value <= target + options.tolerance;

    let mut failed_len = 0;
    let mut len = 1;
    let (mut best_len, mut best) = loop {
        let attempt = solve_window(abs_terms, n, len, options)?;
        if meets(&attempt.0) || len == available {
            break (len, attempt);
        }
        failed_len = len;
        len = match options.window {
            WindowPolicy::Doubling { .. } => 2 * len,
            WindowPolicy::Linear { step } => len + step.max(1),
        }
        .min(available);
    };
    if let WindowPolicy::Doubling { refine: true } = options.window {
        if meets(&best.0) {
            let mut lo = failed_len;
            while best_len - lo > 1 {
                let mid = lo + (best_len - lo) / 2;
                let attempt = solve_window(abs_terms, n, mid, options)?;
                if meets(&attempt.0) {
                    best_len = mid;
                    best = attempt;
                } else {
                    lo = mid;
                }
            }
        }
    }
    let (sol, converged) = best;
    let signed = combine(&seq.terms()[n - 1..n - 1 + best_len], sol.weights.as_slice())?;
    Ok(ConvexificationStep {
        n,
        window: (n, n + best_len - 1),
        achieved: sol.value,
        signed_achieved: signed.sup_norm(),
        target,
        met: meets(&sol),
        converged,
        weights: sol.weights,
        dual_certificate: sol.certificate,
    })
}

/// Builds steps `n = 1..=steps`, solving on `|f_k|` per window.
///
/// Steps are independent and solved in parallel; the output order and
/// contents do not depend on the thread count.
pub fn build_convexification(
    seq: &FunctionSequence,
    options: &ConvexifyOptions,
) -> Result<Vec<ConvexificationStep>> {
    let steps = options.steps.unwrap_or(seq.len());
    if steps == 0 || steps > seq.len() {
        return Err(Error::IndexOutOfRange {
            index: steps,
            len: seq.len(),
        });
    }
    if !(options.tolerance >= 0.0) {
        return Err(Error::InvalidParameter("tolerance must be nonnegative".into()));
    }
    options.schedule.validate(steps)?;
    let abs_terms: Vec<SampledFunction> = seq.terms().iter().map(SampledFunction::abs).collect();
    (1..=steps)
        .into_par_iter()
        .map(|n| build_step(seq, &abs_terms, n, options))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepViolation {
    pub n: usize,
    pub message: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ConvexificationVerdict {
    pub steps_checked: usize,
    pub violations: Vec<StepViolation>,
}

impl ConvexificationVerdict {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-checks every step against the sequence: simplex validity, window
/// support, recomputed values, the signed-vs-absolute bound, claimed target
/// satisfaction, and dual certificates when present.
pub fn verify_convexification(
    steps: &[ConvexificationStep],
    seq: &FunctionSequence,
    tolerance: f64,
) -> ConvexificationVerdict {
    let mut violations = Vec::new();
    for step in steps {
        let mut flag = |message: String| violations.push(StepViolation { n: step.n, message });
        let (start, end) = step.window;
        if start != step.n {
            flag(format!("window starts at {start}, not at n = {}", step.n));
        }
        if start == 0 || end < start || end > seq.len() {
            flag(format!("window [{start}, {end}] outside 1..={}", seq.len()));
            continue;
        }
        let lambda = step.weights.as_slice();
        if lambda.len() != end - start + 1 {
            flag(format!(
                "{} weights for a window of length {}",
                lambda.len(),
                end - start + 1
            ));
            continue;
        }
        if let Some(k) = lambda.iter().position(|&w| !(w >= 0.0)) {
            flag(format!("weight {} (source index {}) is negative", lambda[k], start + k));
        }
        let sum: f64 = lambda.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            flag(format!("weights sum to {sum}"));
        }
        let window = &seq.terms()[start - 1..end];
        let abs: Vec<SampledFunction> = window.iter().map(SampledFunction::abs).collect();
        let achieved = match combine(&abs, lambda) {
            Ok(f) => f.sup_norm(),
            Err(e) => {
                flag(format!("cannot recompute: {e}"));
                continue;
            }
        };
        if (achieved - step.achieved).abs() > RECOMPUTE_TOLERANCE {
            flag(format!(
                "reported achieved {} but recomputed {achieved}",
                step.achieved
            ));
        }
        let signed = combine(window, lambda).map(|f| f.sup_norm()).unwrap_or(f64::NAN);
        if !(signed <= achieved + RECOMPUTE_TOLERANCE) {
            flag(format!("signed sup-norm {signed} exceeds absolute bound {achieved}"));
        }
        if step.met && achieved > step.target + tolerance {
            flag(format!("claims target {} met but achieves {achieved}", step.target));
        }
        if let Some(cert) = &step.dual_certificate {
            let check = cert.check(&abs, achieved);
            if !check.is_valid(CERTIFICATE_TOLERANCE) {
                flag(format!(
                    "dual certificate fails: weight sum {}, min weight {}, lower bound {} vs {}",
                    check.weight_sum, check.min_weight, check.lower_bound, achieved
                ));
            }
        }
    }
    ConvexificationVerdict {
        steps_checked: steps.len(),
        violations,
    }
}

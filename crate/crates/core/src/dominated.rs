//! Dominated convergence for positive functionals without measure theory.
//!
//! * [`lemma2_run`] builds, for a pointwise decreasing sequence `f_n`,
//!   near-optimal minorants `g_n`, their running meets `h_n`, and checks the
//!   inductive bound `Φ̄(f_n) − Φh_n ≤ Σ_{k≤n} ε/2^(k+1)`.
//! * [`dini_certify`] checks the finite-data hypotheses of Dini's theorem.
//! * [`theorem1_report`] sandwiches `Φg_n` under the envelope of the tail
//!   sups `f_n = ∨_{k≥n} g_k` (truncated at a horizon) and records
//!   first-passage indices, a truncation diagnostic, and a diagnostic for the
//!   pointwise-null hypothesis.

use std::io::Write;

use serde::Serialize;

use crate::domain::{tail_sup_envelopes, FunctionSequence, SampledFunction};
use crate::error::{Error, Result};
use crate::functionals::{envelope, PositiveFunctional};

/// Absolute slack for comparisons that are exact up to float roundoff.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct Lemma2Record {
    pub n: usize,
    pub envelope: f64,
    /// `ε / 2^(n+1)`
    pub selection_slack: f64,
    pub delta: f64,
    pub phi_g: f64,
    pub phi_h: f64,
    pub h_sup_norm: f64,
    /// `Σ_{k=1}^{n} ε / 2^(k+1)`
    pub budget: f64,
    #[serde(skip)]
    pub f: SampledFunction,
    #[serde(skip)]
    pub g: SampledFunction,
    #[serde(skip)]
    pub h: SampledFunction,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum TraceViolation {
    /// `Φ̄(f_n) − Φg_n` is not below the selection slack.
    Selection { n: usize, shortfall: f64, slack: f64 },
    InductiveBound { n: usize, defect: f64, budget: f64 },
    HSupNormIncreased { n: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma2Trace {
    pub epsilon: f64,
    pub lipschitz: f64,
    pub records: Vec<Lemma2Record>,
}

#[derive(Serialize)]
struct TraceRow {
    n: usize,
    phi_g: f64,
    envelope: f64,
    h_sup_norm: f64,
    budget: f64,
}

impl Lemma2Trace {
    pub fn violations(&self) -> Vec<TraceViolation> {
        let mut out = Vec::new();
        let mut prev_sup = f64::INFINITY;
        for r in &self.records {
            // Compared as a difference: `Φ̄ − ε/2^(n+1)` rounds to `Φ̄` for large n.
            let shortfall = r.envelope - r.phi_g;
            if !(shortfall < r.selection_slack) {
                out.push(TraceViolation::Selection {
                    n: r.n,
                    shortfall,
                    slack: r.selection_slack,
                });
            }
            let defect = r.envelope - r.phi_h;
            if defect > r.budget + IDENTITY_TOLERANCE {
                out.push(TraceViolation::InductiveBound {
                    n: r.n,
                    defect,
                    budget: r.budget,
                });
            }
            if r.h_sup_norm > prev_sup {
                out.push(TraceViolation::HSupNormIncreased { n: r.n });
            }
            prev_sup = r.h_sup_norm;
        }
        out
    }

    pub fn envelope_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.envelope).collect()
    }

    pub fn running_meets(&self) -> Vec<SampledFunction> {
        self.records.iter().map(|r| r.h.clone()).collect()
    }

    /// CSV with columns `n, phi_g, envelope, h_sup_norm, budget`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(TraceRow {
                n: r.n,
                phi_g: r.phi_g,
                envelope: r.envelope,
                h_sup_norm: r.h_sup_norm,
                budget: r.budget,
            })?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn check_shared_grid(seq: &FunctionSequence, phi: &PositiveFunctional) -> Result<()> {
    if seq.grid().same_as(phi.grid()) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

fn check_nonnegative(seq: &FunctionSequence) -> Result<()> {
    match seq.first_negative() {
        Some((term, point)) => Err(Error::Negative {
            what: format!("term {term}"),
            point,
        }),
        None => Ok(()),
    }
}

/// Runs the inductive construction on a pointwise nonincreasing, nonnegative
/// sequence.
///
/// `g_n` is the exact maximizer of `Φ̄_L(f_n)` lowered by `δ_n / mass(Φ)` and
/// clamped at zero, so `Φg_n ≥ Φ̄_L(f_n) − δ_n`. Every `δ_n` must lie in
/// `[0, ε/2^(n+1))`; missing entries count as zero.
pub fn lemma2_run(
    seq: &FunctionSequence,
    phi: &PositiveFunctional,
    epsilon: f64,
    lipschitz: f64,
    slack: Option<&[f64]>,
) -> Result<Lemma2Trace> {
    check_shared_grid(seq, phi)?;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    check_nonnegative(seq)?;
    if let Some((index, point)) = seq.first_increase() {
        return Err(Error::NotMonotone { index, point });
    }
    let slack = slack.unwrap_or(&[]);
    if slack.len() > seq.len() {
        return Err(Error::InvalidParameter(format!(
            "slack schedule has {} entries for {} terms",
            slack.len(),
            seq.len()
        )));
    }
    let mass = phi.mass();
    let mut records: Vec<Lemma2Record> = Vec::with_capacity(seq.len());
    let mut budget = 0.0;
    for (k, f) in seq.terms().iter().enumerate() {
        let n = k + 1;
        let selection_slack = epsilon * 0.5f64.powi(n as i32 + 1);
        let delta = slack.get(k).copied().unwrap_or(0.0);
        if !(delta >= 0.0 && delta < selection_slack) {
            return Err(Error::InvalidParameter(format!(
                "slack δ_{n} = {delta} must lie in [0, {selection_slack})"
            )));
        }
        let env = envelope(phi, f, lipschitz)?;
        let shift = delta / mass;
        let g = SampledFunction::new(
            f.grid().clone(),
            env.witness.values().iter().map(|&w| (w - shift).max(0.0)).collect(),
        )?;
        let h = match records.last() {
            Some(prev) => prev.h.meet(&g)?,
            None => g.clone(),
        };
        budget += selection_slack;
        records.push(Lemma2Record {
            n,
            envelope: env.value,
            selection_slack,
            delta,
            phi_g: phi.apply(&g)?,
            phi_h: phi.apply(&h)?,
            h_sup_norm: h.sup_norm(),
            budget,
            f: f.clone(),
            g,
            h,
        });
    }
    Ok(Lemma2Trace {
        epsilon,
        lipschitz,
        records,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DiniCondition {
    /// (a) pointwise nonincreasing in the index
    Monotone,
    /// (b) values not below `-tolerance`
    Nonnegative,
    /// (c) sup-norm of the last term within tolerance
    FinalSupNorm,
}

impl DiniCondition {
    pub fn label(self) -> &'static str {
        match self {
            DiniCondition::Monotone => "(a) pointwise nonincreasing",
            DiniCondition::Nonnegative => "(b) nonnegative within tolerance",
            DiniCondition::FinalSupNorm => "(c) final sup-norm within tolerance",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum DiniVerdict {
    Certified {
        terms: usize,
        final_sup_norm: f64,
        tolerance: f64,
    },
    Refused {
        condition: DiniCondition,
        /// 1-based term index where the condition fails.
        index: usize,
        point: usize,
        x: f64,
        value: f64,
    },
}

impl DiniVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, DiniVerdict::Certified { .. })
    }
}

/// Certifies uniform convergence on the grid for a decreasing family, or
/// names the failed condition and a witness grid point.
pub fn dini_certify(hs: &[SampledFunction], tolerance: f64) -> Result<DiniVerdict> {
    let first = hs.first().ok_or(Error::Empty("Dini input"))?;
    for h in hs {
        first.check_grid(h)?;
    }
    let grid = first.grid();
    for (k, w) in hs.windows(2).enumerate() {
        if let Some(point) = w[1]
            .values()
            .iter()
            .zip(w[0].values())
            .position(|(next, prev)| next > prev)
        {
            return Ok(DiniVerdict::Refused {
                condition: DiniCondition::Monotone,
                index: k + 2,
                point,
                x: grid.point(point),
                value: w[1].values()[point],
            });
        }
    }
    for (k, h) in hs.iter().enumerate() {
        if let Some(point) = h.values().iter().position(|&v| v < -tolerance) {
            return Ok(DiniVerdict::Refused {
                condition: DiniCondition::Nonnegative,
                index: k + 1,
                point,
                x: grid.point(point),
                value: h.values()[point],
            });
        }
    }
    let last = &hs[hs.len() - 1];
    let final_sup_norm = last.sup_norm();
    if final_sup_norm > tolerance {
        let point = last.argmax_abs();
        return Ok(DiniVerdict::Refused {
            condition: DiniCondition::FinalSupNorm,
            index: hs.len(),
            point,
            x: grid.point(point),
            value: last.values()[point],
        });
    }
    Ok(DiniVerdict::Certified {
        terms: hs.len(),
        final_sup_norm,
        tolerance,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportOptions {
    pub horizon: usize,
    pub lipschitz: f64,
    pub tolerance: f64,
    /// `ε` for the inductive construction run on the tail envelopes.
    pub epsilon: f64,
    pub sequence_id: String,
    pub functional_id: String,
}

/// How much the truncated tail envelopes move when more data is admitted.
#[derive(Clone, Debug, Serialize)]
pub struct TruncationDiagnostic {
    pub horizon: usize,
    pub extended_horizon: usize,
    /// `sup_x (f_1^{ext} − f_1^{H})(x)`
    pub first_increment: f64,
    /// `max_n sup_x (f_n^{ext} − f_n^{H})(x)`, attained at `n = H`
    pub max_increment: f64,
}

/// Finite-data check of the pointwise-null hypothesis.
///
/// A grid point is flagged when its values recur: some term reaches `level`,
/// a later one drops to `tolerance` or below, and a term in the final window
/// (the second half of the available indices) climbs back to `level`. A
/// sequence that tends to zero at the point cannot do that indefinitely,
/// whereas a single late bump or a slow unimodal decay is not flagged.
#[derive(Clone, Debug, Serialize)]
pub struct PointwiseDiagnostic {
    pub final_window_start: usize,
    pub level: f64,
    pub tolerance: f64,
    /// Largest `|g_k(x)|` over the final window and the grid.
    pub late_max: f64,
    pub late_max_point: usize,
    pub violation: Option<PointwiseViolation>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointwiseViolation {
    pub point: usize,
    pub x: f64,
    /// Indices where `|g_k(x)| >= level`.
    pub hit_indices: Vec<usize>,
}

impl PointwiseDiagnostic {
    pub fn fired(&self) -> bool {
        self.violation.is_some()
    }
}

pub fn pointwise_diagnostic(seq: &FunctionSequence, tolerance: f64) -> PointwiseDiagnostic {
    let len = seq.len();
    let final_window_start = len / 2 + 1;
    let level = 0.5 * seq.bound();
    let grid = seq.grid();
    let mut late_max = 0.0;
    let mut late_max_point = 0;
    let mut violation = None;
    for point in 0..grid.len() {
        let mut seen_high = false;
        let mut dropped = false;
        let mut recurred = false;
        for (k, term) in seq.terms().iter().enumerate() {
            let v = term.values()[point].abs();
            let n = k + 1;
            if n >= final_window_start && v > late_max {
                late_max = v;
                late_max_point = point;
            }
            if level > 0.0 && v >= level {
                if dropped && n >= final_window_start {
                    recurred = true;
                }
                seen_high = true;
            } else if seen_high && v <= tolerance {
                dropped = true;
            }
        }
        if recurred && violation.is_none() {
            let hit_indices = seq
                .terms()
                .iter()
                .enumerate()
                .filter(|(_, t)| t.values()[point].abs() >= level)
                .map(|(k, _)| k + 1)
                .collect();
            violation = Some(PointwiseViolation {
                point,
                x: grid.point(point),
                hit_indices,
            });
        }
    }
    PointwiseDiagnostic {
        final_window_start,
        level,
        tolerance,
        late_max,
        late_max_point,
        violation,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub sequence_id: String,
    pub functional_id: String,
    pub horizon: usize,
    pub lipschitz: f64,
    pub tolerance: f64,
    /// `Φg_n`, `n = 1..=horizon`
    pub phi_g: Vec<f64>,
    pub g_sup_norm: Vec<f64>,
    /// `Φ̄_L(f_n)` for the truncated tail envelopes
    pub envelope: Vec<f64>,
    pub first_passage_phi_g: Option<usize>,
    pub first_passage_envelope: Option<usize>,
    /// Indices where `0 ≤ Φg_n ≤ Φ̄_L(f_n)` fails (empty when `L` admits every `g_n`).
    pub sandwich_violations: Vec<usize>,
    pub truncation: Option<TruncationDiagnostic>,
    pub pointwise: PointwiseDiagnostic,
    pub trace: Lemma2Trace,
}

#[derive(Serialize)]
struct ReportRow {
    n: usize,
    phi_g: f64,
    envelope: f64,
    h_sup_norm: f64,
    budget: f64,
    g_sup_norm: f64,
}

impl ConvergenceReport {
    /// CSV with columns `n, phi_g, envelope, h_sup_norm, budget, g_sup_norm`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (i, r) in self.trace.records.iter().enumerate() {
            w.serialize(ReportRow {
                n: i + 1,
                phi_g: self.phi_g[i],
                envelope: self.envelope[i],
                h_sup_norm: r.h_sup_norm,
                budget: r.budget,
                g_sup_norm: self.g_sup_norm[i],
            })?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn holds(&self) -> bool {
        self.sandwich_violations.is_empty() && self.trace.violations().is_empty()
    }
}

/// Smallest `N` such that every value from index `N` on is below `tolerance`.
pub fn first_passage(values: &[f64], tolerance: f64) -> Option<usize> {
    let tail = values.iter().rev().take_while(|&&v| v.abs() < tolerance).count();
    (tail > 0).then(|| values.len() - tail + 1)
}

/// Tail-envelope pipeline for a nonnegative bounded sequence.
pub fn theorem1_report(
    seq: &FunctionSequence,
    phi: &PositiveFunctional,
    options: &ReportOptions,
) -> Result<ConvergenceReport> {
    check_shared_grid(seq, phi)?;
    check_nonnegative(seq)?;
    let horizon = options.horizon;
    let envelopes = tail_sup_envelopes(seq, horizon)?;
    let tails = FunctionSequence::new(envelopes, seq.bound())?;
    let trace = lemma2_run(&tails, phi, options.epsilon, options.lipschitz, None)?;

    let head = &seq.terms()[..horizon];
    let phi_g = head.iter().map(|g| phi.apply(g)).collect::<Result<Vec<_>>>()?;
    let g_sup_norm: Vec<f64> = head.iter().map(SampledFunction::sup_norm).collect();
    let envelope = trace.envelope_values();
    let sandwich_violations = phi_g
        .iter()
        .zip(&envelope)
        .enumerate()
        .filter(|(_, (&pg, &env))| pg < -IDENTITY_TOLERANCE || pg > env + IDENTITY_TOLERANCE)
        .map(|(i, _)| i + 1)
        .collect();

    let truncation = (seq.len() > horizon).then(|| {
        let extended = seq.len().min(2 * horizon);
        let mut beyond = seq.terms()[horizon].values().to_vec();
        for t in &seq.terms()[horizon + 1..extended] {
            for (b, &v) in beyond.iter_mut().zip(t.values()) {
                *b = b.max(v);
            }
        }
        let increment = |f: &SampledFunction| {
            beyond
                .iter()
                .zip(f.values())
                .fold(0.0f64, |m, (&b, &v)| m.max(b - v))
        };
        TruncationDiagnostic {
            horizon,
            extended_horizon: extended,
            first_increment: increment(&tails.terms()[0]),
            max_increment: increment(&tails.terms()[horizon - 1]),
        }
    });

    Ok(ConvergenceReport {
        sequence_id: options.sequence_id.clone(),
        functional_id: options.functional_id.clone(),
        horizon,
        lipschitz: options.lipschitz,
        tolerance: options.tolerance,
        first_passage_phi_g: first_passage(&phi_g, options.tolerance),
        first_passage_envelope: first_passage(&envelope, options.tolerance),
        phi_g,
        g_sup_norm,
        envelope,
        sandwich_violations,
        truncation,
        pointwise: pointwise_diagnostic(seq, options.tolerance),
        trace,
    })
}

use std::fs;
use std::io::Write;
use std::path::Path;

use domconv::convexify::{
    build_convexification, steps_to_json, verify_convexification, write_steps_csv, ConvexifyOptions,
};
use domconv::corpus::CorpusEntry;
use domconv::domain::{lattice_join, lattice_meet};
use domconv::dominated::{dini_certify, lemma2_run, theorem1_report, DiniVerdict, ReportOptions};
use domconv::functionals::{envelope, greatest_lipschitz_minorant, lemma1_defect_check};
use domconv::{CorpusId, FunctionSequence, Grid, PositiveFunctional, SampledFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, DEFAULT_STEPS};

pub enum Failure {
    /// Bad flags, config or input data: exit 2.
    Usage(String),
    /// A checked mathematical assertion failed: exit 1.
    Violation(String),
}

impl From<domconv::Error> for Failure {
    fn from(e: domconv::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub type Outcome = Result<(), Failure>;

fn emit(cfg: &RunConfig, bytes: &[u8]) -> Outcome {
    match &cfg.out {
        Some(path) => fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, Failure> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

struct Source {
    id: String,
    seq: FunctionSequence,
    lipschitz: f64,
}

/// Terms `1..=len` of the configured corpus entry (on its preferred grid), or
/// the `--input` sequence. `lipschitz_terms` limits which terms the default
/// Lipschitz bound must cover.
fn load_source(cfg: &RunConfig, default: CorpusId, len: usize, lipschitz_terms: usize) -> Result<Source, Failure> {
    if let Some(path) = &cfg.input {
        let seq: FunctionSequence = read_json(path)?;
        let covered = lipschitz_terms.min(seq.len());
        let lipschitz = cfg.lipschitz.unwrap_or_else(|| {
            let l = seq.terms()[..covered]
                .iter()
                .map(SampledFunction::lipschitz_constant)
                .fold(0.0, f64::max);
            l * (1.0 + domconv::corpus::LIPSCHITZ_MARGIN)
        });
        return Ok(Source {
            id: path.display().to_string(),
            seq,
            lipschitz,
        });
    }
    let id = cfg.corpus.unwrap_or(default);
    let entry = id.entry();
    let grid = entry.preferred_grid(cfg.grid, len)?;
    let seq = entry.sequence(len, &grid)?;
    let lipschitz = match cfg.lipschitz {
        Some(l) => l,
        None => entry.sequence_lipschitz(lipschitz_terms, &grid)?,
    };
    Ok(Source {
        id: id.name().to_string(),
        seq,
        lipschitz,
    })
}

#[derive(Serialize)]
struct LatticeReport {
    trials: usize,
    seed: u64,
    grid_sizes: Vec<usize>,
    lattice_identity_violations: usize,
    defect_tolerance: f64,
    defect_violations: usize,
    max_defect_excess: f64,
}

struct TrialOutcome {
    identity_exact: bool,
    defect_excess: f64,
}

fn random_values(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

fn lattice_trial(seed: u64, trial: usize, grid: &Grid) -> Result<TrialOutcome, domconv::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let n = grid.len();
    let g = SampledFunction::new(grid.clone(), random_values(&mut rng, n, -1.0, 1.0))?;
    let h = SampledFunction::new(grid.clone(), random_values(&mut rng, n, -1.0, 1.0))?;
    let lhs = lattice_join(&g, &h)?.add(&lattice_meet(&g, &h)?)?;
    let identity_exact = lhs.values() == g.add(&h)?.values();

    let lipschitz = rng.gen_range(0.1..50.0);
    let f1 = SampledFunction::new(grid.clone(), random_values(&mut rng, n, 0.0, 1.0))?;
    let f2 = SampledFunction::new(grid.clone(), random_values(&mut rng, n, 0.0, 1.0))?.meet(&f1)?;
    let hm = greatest_lipschitz_minorant(&f1, lipschitz)?.scale(rng.gen_range(0.0..1.0))?;
    let gm = greatest_lipschitz_minorant(&f2, lipschitz)?.scale(rng.gen_range(0.0..1.0))?;
    let phi = PositiveFunctional::new(grid.clone(), random_values(&mut rng, n, 0.0, 1.0))?;
    let check = lemma1_defect_check(&phi, &f1, &f2, &gm, &hm, lipschitz)?;
    Ok(TrialOutcome {
        identity_exact,
        defect_excess: check.lhs - check.rhs,
    })
}

pub fn lattice_check(cfg: &RunConfig) -> Outcome {
    const DEFECT_TOLERANCE: f64 = 1e-12;
    let grid_sizes = vec![8, 64, cfg.grid];
    let grids = grid_sizes
        .iter()
        .map(|&n| Grid::uniform(n))
        .collect::<Result<Vec<_>, _>>()?;
    let outcomes = (0..cfg.trials)
        .into_par_iter()
        .map(|t| lattice_trial(cfg.seed, t, &grids[t % grids.len()]))
        .collect::<Result<Vec<_>, _>>()?;
    let report = LatticeReport {
        trials: cfg.trials,
        seed: cfg.seed,
        grid_sizes,
        lattice_identity_violations: outcomes.iter().filter(|o| !o.identity_exact).count(),
        defect_tolerance: DEFECT_TOLERANCE,
        defect_violations: outcomes.iter().filter(|o| o.defect_excess > DEFECT_TOLERANCE).count(),
        max_defect_excess: outcomes.iter().map(|o| o.defect_excess).fold(f64::NEG_INFINITY, f64::max),
    };
    emit(cfg, &to_json(&report)?)?;
    if report.lattice_identity_violations + report.defect_violations > 0 {
        return Err(Failure::Violation(format!(
            "{} lattice identity and {} defect inequality violations",
            report.lattice_identity_violations, report.defect_violations
        )));
    }
    Ok(())
}

pub fn arzela(cfg: &RunConfig) -> Outcome {
    // Twice the horizon so the truncation diagnostic has data beyond it.
    let src = load_source(cfg, CorpusId::SlidingHump, 2 * cfg.horizon, cfg.horizon)?;
    if cfg.horizon > src.seq.len() {
        return Err(Failure::Usage(format!(
            "horizon {} exceeds the {} available terms",
            cfg.horizon,
            src.seq.len()
        )));
    }
    let phi = PositiveFunctional::trapezoid(src.seq.grid());
    let options = ReportOptions {
        horizon: cfg.horizon,
        lipschitz: src.lipschitz,
        tolerance: cfg.tol,
        epsilon: cfg.epsilon,
        sequence_id: src.id,
        functional_id: "trapezoid".into(),
    };
    let report = theorem1_report(&src.seq, &phi, &options)?;
    if cfg.wants_json() {
        emit(cfg, &to_json(&report)?)?;
    } else {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        emit(cfg, &buf)?;
    }
    if let Some(v) = &report.pointwise.violation {
        eprintln!(
            "note: pointwise hypothesis fails at x = {} (hit by terms {:?})",
            v.x, v.hit_indices
        );
    }
    if !report.holds() {
        return Err(Failure::Violation(format!(
            "sandwich violated at {:?}; trace violations {:?}",
            report.sandwich_violations,
            report.trace.violations()
        )));
    }
    Ok(())
}

pub fn lemma2(cfg: &RunConfig) -> Outcome {
    let src = load_source(cfg, CorpusId::MonotonePower, cfg.horizon, cfg.horizon)?;
    let phi = PositiveFunctional::trapezoid(src.seq.grid());
    let trace = lemma2_run(&src.seq, &phi, cfg.epsilon, src.lipschitz, None)?;
    if cfg.wants_json() {
        emit(cfg, &to_json(&trace)?)?;
    } else {
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        emit(cfg, &buf)?;
    }
    let violations = trace.violations();
    if !violations.is_empty() {
        return Err(Failure::Violation(format!("trace violations: {violations:?}")));
    }
    Ok(())
}

pub fn convexify(cfg: &RunConfig) -> Outcome {
    let src = load_source(cfg, CorpusId::SlidingHump, cfg.horizon, cfg.horizon)?;
    let options = ConvexifyOptions {
        schedule: cfg.schedule.clone(),
        backend: cfg.backend,
        steps: Some(cfg.steps.unwrap_or(DEFAULT_STEPS).min(src.seq.len())),
        ..ConvexifyOptions::default()
    };
    let steps = build_convexification(&src.seq, &options)?;
    if cfg.wants_json() {
        let mut bytes = steps_to_json(&steps, src.seq.grid())?.into_bytes();
        bytes.push(b'\n');
        emit(cfg, &bytes)?;
    } else {
        let mut buf = Vec::new();
        write_steps_csv(&steps, &mut buf)?;
        emit(cfg, &buf)?;
    }
    let met = steps.iter().filter(|s| s.met).count();
    eprintln!("{met} of {} steps met their target", steps.len());
    let verdict = verify_convexification(&steps, &src.seq, options.tolerance);
    if !verdict.is_clean() {
        return Err(Failure::Violation(format!("verification failed: {:?}", verdict.violations)));
    }
    Ok(())
}

fn describe_dini(verdict: &DiniVerdict) -> String {
    match verdict {
        DiniVerdict::Certified {
            terms,
            final_sup_norm,
            tolerance,
        } => format!(
            "certified: {terms} terms, nonincreasing and nonnegative, final sup-norm {final_sup_norm:e} <= {tolerance:e}\n"
        ),
        DiniVerdict::Refused {
            condition,
            index,
            point,
            x,
            value,
        } => format!(
            "refused: {} fails at term {index}, grid point {point} (x = {x}), value {value:e}\n",
            condition.label()
        ),
    }
}

pub fn dini(cfg: &RunConfig) -> Outcome {
    let src = load_source(cfg, CorpusId::MonotonePower, cfg.horizon, 1)?;
    let verdict = dini_certify(src.seq.terms(), cfg.tol)?;
    if cfg.wants_json() {
        emit(cfg, &to_json(&verdict)?)
    } else {
        emit(cfg, describe_dini(&verdict).as_bytes())
    }
}

pub fn envelope_cmd(cfg: &RunConfig, n: usize) -> Outcome {
    let (f, default_l) = match &cfg.input {
        Some(path) => {
            let f: SampledFunction = read_json(path)?;
            let l = f.lipschitz_constant();
            (f, l)
        }
        None => {
            let entry = cfg.corpus.unwrap_or(CorpusId::PowerGap).entry();
            let grid = entry.preferred_grid(cfg.grid, n)?;
            (entry.generate(n, &grid)?, entry.lipschitz(n, &grid)?)
        }
    };
    let lipschitz = cfg.lipschitz.unwrap_or(default_l);
    let phi = PositiveFunctional::trapezoid(f.grid());
    let result = envelope(&phi, &f, lipschitz)?;
    emit(cfg, &to_json(&result)?)
}

pub fn corpus_list(cfg: &RunConfig) -> Outcome {
    emit(cfg, &to_json(&CorpusEntry::all())?)
}

pub fn corpus_emit(cfg: &RunConfig, id: CorpusId, n: usize) -> Outcome {
    let entry = id.entry();
    let grid = entry.preferred_grid(cfg.grid, n)?;
    emit(cfg, &to_json(&entry.generate(n, &grid)?)?)
}

//! Acceptance criteria, one test each. Run with `--nocapture` to see the
//! PASS/FAIL lines.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use domconv::convexify::{solve_minimax_oracle, ConvexifyOptions};
use domconv::domain::{lattice_join, lattice_meet, tail_sup_envelopes};
use domconv::dominated::{lemma2_run, pointwise_diagnostic, theorem1_report, ReportOptions};
use domconv::functionals::{envelope, greatest_lipschitz_minorant, lemma1_defect_check, SignedFunctional};
use domconv::{
    build_convexification, solve_minimax, Backend, CorpusId, Grid, PositiveFunctional, SampledFunction,
};
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(id: u32, name: &str, ok: bool, detail: String) {
    let status = if ok { "PASS" } else { "FAIL" };
    println!("{status} criterion {id}: {name} ({detail})");
    assert!(ok, "criterion {id} failed: {detail}");
}

fn random_fn(rng: &mut ChaCha8Rng, grid: &Grid, lo: f64, hi: f64) -> SampledFunction {
    let values = (0..grid.len()).map(|_| rng.gen_range(lo..hi)).collect();
    SampledFunction::new(grid.clone(), values).unwrap()
}

fn random_functional(rng: &mut ChaCha8Rng, grid: &Grid) -> PositiveFunctional {
    let h = grid.max_gap();
    let weights = (0..grid.len()).map(|_| h * rng.gen_range(0.0..1.0)).collect();
    PositiveFunctional::new(grid.clone(), weights).unwrap()
}

fn report_options(id: CorpusId, horizon: usize, lipschitz: f64) -> ReportOptions {
    ReportOptions {
        horizon,
        lipschitz,
        tolerance: 1e-2,
        epsilon: 0.1,
        sequence_id: id.name().into(),
        functional_id: "trapezoid".into(),
    }
}

#[test]
fn criterion_01_lattice_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let grids: Vec<Grid> = [8, 64, 1025].into_iter().map(|n| Grid::uniform(n).unwrap()).collect();
    let mut violations = 0;
    for trial in 0..10_000 {
        let grid = &grids[trial % 3];
        let scale = 10f64.powi(rng.gen_range(-6..6));
        let g = random_fn(&mut rng, grid, -scale, scale);
        let h = random_fn(&mut rng, grid, -1.0, 1.0);
        let lhs = lattice_join(&g, &h).unwrap().add(&lattice_meet(&g, &h).unwrap()).unwrap();
        if lhs.values() != g.add(&h).unwrap().values() {
            violations += 1;
        }
    }
    verdict(1, "join + meet equals sum exactly", violations == 0, format!("{violations} of 10000 pairs differ"));
}

#[test]
fn criterion_02_defect_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for trial in 0..1000 {
        let grid = Grid::uniform([8, 33, 64, 257][trial % 4]).unwrap();
        let lipschitz = rng.gen_range(0.1..50.0);
        let f1 = random_fn(&mut rng, &grid, 0.0, 1.0);
        let f2 = random_fn(&mut rng, &grid, 0.0, 1.0).meet(&f1).unwrap();
        let h = greatest_lipschitz_minorant(&f1.meet(&random_fn(&mut rng, &grid, 0.0, 1.0)).unwrap(), lipschitz)
            .unwrap()
            .scale(rng.gen_range(0.0..=1.0))
            .unwrap();
        let g = greatest_lipschitz_minorant(&f2.meet(&random_fn(&mut rng, &grid, 0.0, 1.0)).unwrap(), lipschitz)
            .unwrap()
            .scale(rng.gen_range(0.0..=1.0))
            .unwrap();
        let phi = random_functional(&mut rng, &grid);
        let check = lemma1_defect_check(&phi, &f1, &f2, &g, &h, lipschitz).unwrap();
        worst = worst.max(check.lhs - check.rhs);
        if !check.holds(1e-12) {
            violations += 1;
        }
    }
    verdict(
        2,
        "defect inequality",
        violations == 0,
        format!("{violations} violations, max lhs - rhs = {worst:e}"),
    );
}

fn lp_minorant(f: &SampledFunction, lipschitz: f64) -> Vec<f64> {
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = f.values().iter().map(|&v| problem.add_var(1.0, (0.0, v))).collect();
    let xs = f.grid().points();
    for i in 0..vars.len() {
        for j in 0..vars.len() {
            if i != j {
                problem.add_constraint(
                    [(vars[i], 1.0), (vars[j], -1.0)],
                    ComparisonOp::Le,
                    lipschitz * (xs[i] - xs[j]).abs(),
                );
            }
        }
    }
    let solution = problem.solve().unwrap();
    vars.iter().map(|&v| solution[v]).collect()
}

#[test]
fn criterion_03_minorant_matches_lp_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = Grid::uniform(32).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let f = random_fn(&mut rng, &grid, 0.0, 1.0);
        let lipschitz = rng.gen_range(0.2..40.0);
        let ours = greatest_lipschitz_minorant(&f, lipschitz).unwrap();
        for (a, b) in ours.values().iter().zip(lp_minorant(&f, lipschitz)) {
            worst = worst.max((a - b).abs());
        }
    }

    let mut extension_failures = 0;
    for trial in 0..100 {
        let grid = Grid::uniform([32, 257, 1025][trial % 3]).unwrap();
        let lipschitz = rng.gen_range(0.2..40.0);
        let (a, b) = (rng.gen_range(0.0..6.0), rng.gen_range(0.0..1.0));
        let smooth = SampledFunction::from_fn(&grid, |x| b * (1.0 + (a * x).sin())).unwrap();
        let fixed = greatest_lipschitz_minorant(&random_fn(&mut rng, &grid, 0.0, 1.0), lipschitz).unwrap();
        for f in [smooth, fixed] {
            if f.is_lipschitz(lipschitz) && greatest_lipschitz_minorant(&f, lipschitz).unwrap() != f {
                extension_failures += 1;
            }
        }
    }
    verdict(
        3,
        "greatest Lipschitz minorant",
        worst <= 1e-9 && extension_failures == 0,
        format!("max LP deviation {worst:e}, {extension_failures} inexact extensions"),
    );
}

#[test]
fn criterion_04_inductive_trace() {
    let start = Instant::now();
    let grid = Grid::uniform(1025).unwrap();
    let seq = CorpusId::MonotonePower.entry().sequence(40, &grid).unwrap();
    let phi = PositiveFunctional::trapezoid(&grid).scaled(0.9).unwrap();
    let trace = lemma2_run(&seq, &phi, 0.1, 10.0, None).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let bounds_hold = trace
        .records
        .iter()
        .all(|r| r.envelope - r.phi_h <= r.budget && (r.budget - 0.1 * (0.5 - 0.5f64.powi(r.n as i32 + 1))).abs() < 1e-15);
    let last = trace.records[39].envelope;
    let analytic = 0.9f64.powi(41) / 41.0;
    let ok = bounds_hold && trace.violations().is_empty() && last < 0.02 && elapsed < 10.0;
    verdict(
        4,
        "inductive trace on monotone powers",
        ok,
        format!("envelope at n = 40 is {last:.3e} (analytic {analytic:.3e}), {elapsed:.2} s"),
    );
}

#[test]
fn criterion_05_dominated_convergence_table() {
    let id = CorpusId::PowerGap;
    let entry = id.entry();
    let grid = Grid::uniform(1025).unwrap();
    let seq = entry.sequence(400, &grid).unwrap();
    let lipschitz = entry.sequence_lipschitz(200, &grid).unwrap();
    let phi = PositiveFunctional::trapezoid(&grid);
    let report = theorem1_report(&seq, &phi, &report_options(id, 200, lipschitz)).unwrap();
    let gap_err = (1..=100)
        .map(|n| {
            let n_f = n as f64;
            (report.phi_g[n - 1] - (1.0 / (n_f + 1.0) - 1.0 / (2.0 * n_f + 1.0))).abs()
        })
        .fold(0.0, f64::max);
    let phi50 = report.phi_g[49];
    let gap_ok = report.holds() && gap_err <= 1e-4 && phi50 < 0.01;

    let id = CorpusId::SlidingHump;
    let entry = id.entry();
    let fine = entry.preferred_grid(1025, 400).unwrap();
    let seq = entry.sequence(400, &fine).unwrap();
    let lipschitz = entry.sequence_lipschitz(200, &fine).unwrap();
    let phi = PositiveFunctional::trapezoid(&fine);
    let report = theorem1_report(&seq, &phi, &report_options(id, 200, lipschitz)).unwrap();
    let mut hump_ok = report.holds();
    for n in 1..=200 {
        let n_f = n as f64;
        let analytic = (1.0 / n_f - 1.0 / (n_f + 1.0)) / 2.0;
        let budget = entry.quadrature_budget(n, &fine).unwrap();
        hump_ok &= (report.phi_g[n - 1] - analytic).abs() <= budget + 1e-15;
        hump_ok &= report.g_sup_norm[n - 1] == 1.0;
    }
    verdict(
        5,
        "integrals vanish without uniform convergence",
        gap_ok && hump_ok,
        format!(
            "power_gap max error {gap_err:.2e}, phi_g(50) = {phi50:.4e}; sliding_hump within budget with sup norm 1: {hump_ok}"
        ),
    );
}

/// Minimum of `sup |Σ λ_k f_k|` over simplex points with denominator `res`.
fn simplex_grid_min(fs: &[SampledFunction], res: usize) -> f64 {
    fn recurse(fs: &[SampledFunction], res: usize, left: usize, acc: &mut Vec<usize>, best: &mut f64) {
        if acc.len() + 1 == fs.len() {
            acc.push(left);
            let mut value: f64 = 0.0;
            for j in 0..fs[0].len() {
                let s: f64 = fs.iter().zip(acc.iter()).map(|(f, &c)| c as f64 * f.values()[j]).sum();
                value = value.max(s.abs());
            }
            *best = best.min(value / res as f64);
            acc.pop();
            return;
        }
        for c in 0..=left {
            acc.push(c);
            recurse(fs, res, left - c, acc, best);
            acc.pop();
        }
    }
    let mut best = f64::INFINITY;
    recurse(fs, res, res, &mut Vec::new(), &mut best);
    best
}

#[test]
fn criterion_06_convexification() {
    let entry = CorpusId::SlidingHump.entry();
    let grid = entry.preferred_grid(1025, 512).unwrap();
    let seq = entry.sequence(512, &grid).unwrap();
    let options = ConvexifyOptions {
        steps: Some(20),
        ..ConvexifyOptions::default()
    };
    let steps = build_convexification(&seq, &options).unwrap();
    let mut ok = steps.len() == 20;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_exact: f64 = 0.0;
    let mut brute_err: f64 = 0.0;
    for step in &steps {
        worst_excess = worst_excess.max(step.achieved - 1.0 / step.n as f64);
        // consecutive humps have disjoint supports, so every window qualifies
        let m = step.window.1 - step.window.0 + 1;
        worst_exact = worst_exact.max((step.achieved - 1.0 / m as f64).abs());
        if (2..=4).contains(&m) {
            let window = &seq.terms()[step.window.0 - 1..step.window.1];
            brute_err = brute_err.max((simplex_grid_min(window, 60) - step.achieved).abs());
        }
    }
    ok &= worst_excess <= 1e-6 && worst_exact <= 1e-9 && brute_err <= 1e-9;
    verdict(
        6,
        "convexification of sliding humps",
        ok,
        format!("max excess over 1/n {worst_excess:.2e}, max |achieved - 1/m| {worst_exact:.2e}, brute-force gap {brute_err:.2e}"),
    );
}

#[test]
fn criterion_07_solver_cross_validation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = Grid::uniform(64).unwrap();
    let mut worst_gap: f64 = 0.0;
    let mut worst_cert: f64 = 0.0;
    let mut missing = 0;
    for _ in 0..200 {
        let fs: Vec<_> = (0..5).map(|_| random_fn(&mut rng, &grid, -1.0, 1.0)).collect();
        let lp = solve_minimax(&fs, Backend::Lp).unwrap();
        let fo = solve_minimax_oracle(&fs).unwrap();
        worst_gap = worst_gap.max((lp.value - fo.value).abs());
        match &lp.certificate {
            Some(cert) => {
                let check = cert.check(&fs, lp.value);
                if !check.is_valid(1e-8) {
                    missing += 1;
                }
                worst_cert = worst_cert.max(check.gap().abs());
            }
            None => missing += 1,
        }
    }
    verdict(
        7,
        "LP and first-order backends agree",
        worst_gap <= 1e-6 && worst_cert <= 1e-8 && missing == 0,
        format!("max value gap {worst_gap:.2e}, max certificate gap {worst_cert:.2e}, {missing} bad certificates"),
    );
}

#[test]
fn criterion_08_signed_functionals() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let grid = Grid::uniform(1025).unwrap();
    let entry = CorpusId::PowerGap.entry();
    let seq = entry.sequence(200, &grid).unwrap();
    let lipschitz = entry.sequence_lipschitz(200, &grid).unwrap();
    let tails = tail_sup_envelopes(&seq, 200).unwrap();
    let mut ok = true;
    let mut worst_final: f64 = 0.0;
    for _ in 0..100 {
        let pos = random_functional(&mut rng, &grid);
        let neg = random_functional(&mut rng, &grid);
        let psi = SignedFunctional::new(pos.clone(), neg.clone()).unwrap();
        let mut last = f64::INFINITY;
        for (i, f) in tails.iter().enumerate() {
            let bound = envelope(&pos, f, lipschitz).unwrap().value + envelope(&neg, f, lipschitz).unwrap().value;
            let value = psi.apply(&seq.terms()[i]).unwrap().abs();
            ok &= value <= bound + 1e-12 && bound <= last;
            last = bound;
        }
        worst_final = worst_final.max(last);
    }
    ok &= worst_final < 1e-2;
    verdict(
        8,
        "signed functionals bounded by part envelopes",
        ok,
        format!("largest certified bound at n = 200 is {worst_final:.3e}"),
    );
}

#[test]
fn criterion_09_negative_control() {
    let entry = CorpusId::Typewriter.entry();
    let grid = entry.preferred_grid(1025, 255).unwrap();
    let seq = entry.sequence(255, &grid).unwrap();
    let diag = pointwise_diagnostic(&seq, 1e-2);
    let phi = PositiveFunctional::trapezoid(&grid);
    let quad: Vec<f64> = seq.terms().iter().map(|g| phi.apply(g).unwrap()).collect();
    let decays = quad[254] < 1e-2 && quad[254] < quad[0] / 50.0;
    let detail = match &diag.violation {
        Some(v) => format!("flagged x = {} (terms {:?}), final integral {:.3e}", v.x, v.hit_indices, quad[254]),
        None => "diagnostic did not fire".into(),
    };
    verdict(9, "typewriter fails the hypothesis, not the conclusion", diag.fired() && decays, detail);
}

fn run_cli(args: &[&str], threads: &str, out: Option<&PathBuf>) -> (i32, Vec<u8>) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_domconv"));
    cmd.args(args).args(["--seed", "42", "--threads", threads]);
    if let Some(path) = out {
        cmd.arg("--out").arg(path);
    }
    let output = cmd.output().unwrap();
    let bytes = match out {
        Some(path) => std::fs::read(path).unwrap(),
        None => output.stdout,
    };
    (output.status.code().unwrap_or(-1), bytes)
}

#[test]
fn criterion_10_determinism() {
    let commands: &[&[&str]] = &[
        &["lattice-check", "--trials", "300"],
        &["arzela"],
        &["arzela", "--corpus", "typewriter"],
        &["convexify"],
        &["convexify", "--corpus", "power_gap", "--backend", "first-order", "--steps", "6"],
        &["dini"],
        &["envelope", "--n", "7"],
        &["lemma2", "--horizon", "60"],
        &["corpus", "list"],
        &["corpus", "emit", "typewriter", "--n", "9"],
    ];
    let dir = std::env::temp_dir().join(format!("domconv-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut mismatches = Vec::new();
    for (i, args) in commands.iter().enumerate() {
        for json in [false, true] {
            let path = json.then(|| dir.join(format!("out-{i}.json")));
            let first = run_cli(args, "1", path.as_ref());
            let second = run_cli(args, "1", path.as_ref());
            let parallel = run_cli(args, "4", path.as_ref());
            if first.0 != 0 || first.1.is_empty() || first != second || first != parallel {
                mismatches.push(format!("{}{}", args.join(" "), if json { " (json)" } else { "" }));
            }
        }
    }
    std::fs::remove_dir_all(&dir).ok();
    verdict(
        10,
        "byte-identical CLI output",
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{} invocations, 3 runs each", 2 * commands.len())
        } else {
            format!("differs: {}", mismatches.join(", "))
        },
    );
}

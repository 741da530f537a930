//! Positive linear functionals on sampled functions and the envelope
//! extension `Φ̄_L(f) = sup { Φg : 0 ≤ g ≤ f, g L-Lipschitz }`.
//!
//! On a finite grid every vector is "continuous", so the feasible class is
//! restricted to `L`-Lipschitz functions. The supremum is attained at the
//! greatest `L`-Lipschitz minorant (positivity of `Φ`), which has a closed
//! form, so `Φ̄_L` is computed exactly rather than by an inner solver.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::domain::{Grid, SampledFunction};
use crate::error::{Error, Result};

/// Nonnegative weights over grid points, `Φf = Σ w_i f(x_i)`, with positive mass.
#[derive(Clone, Debug, PartialEq)]
pub struct PositiveFunctional {
    grid: Grid,
    weights: Vec<f64>,
}

impl PositiveFunctional {
    pub fn new(grid: Grid, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: weights.len(),
            });
        }
        if let Some(index) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if let Some(point) = weights.iter().position(|&w| w < 0.0) {
            return Err(Error::Negative {
                what: "functional weight".into(),
                point,
            });
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidParameter(
                "functional must have positive total mass".into(),
            ));
        }
        Ok(Self { grid, weights })
    }

    /// Composite trapezoid rule on the grid: models `∫ f` over the grid's span.
    pub fn trapezoid(grid: &Grid) -> Self {
        let n = grid.len();
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let half = 0.5 * grid.gap(i);
            weights[i] += half;
            weights[i + 1] += half;
        }
        Self {
            grid: grid.clone(),
            weights,
        }
    }

    /// Same functional multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive, got {c}"
            )));
        }
        Self::new(self.grid.clone(), self.weights.iter().map(|w| c * w).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<f64> {
        if !self.grid.same_as(f.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .weights
            .iter()
            .zip(f.values())
            .map(|(w, v)| w * v)
            .sum())
    }
}

#[derive(Serialize, Deserialize)]
struct PositiveFunctionalWire {
    grid: Grid,
    weights: Vec<f64>,
}

impl Serialize for PositiveFunctional {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PositiveFunctionalWire {
            grid: self.grid.clone(),
            weights: self.weights.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PositiveFunctional {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = PositiveFunctionalWire::deserialize(d)?;
        PositiveFunctional::new(wire.grid, wire.weights).map_err(serde::de::Error::custom)
    }
}

/// `Ψ = Φ⁺ − Φ⁻`. At grid scale the decomposition into positive parts is explicit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignedFunctional {
    positive: PositiveFunctional,
    negative: PositiveFunctional,
}

impl SignedFunctional {
    pub fn new(positive: PositiveFunctional, negative: PositiveFunctional) -> Result<Self> {
        if !positive.grid.same_as(&negative.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { positive, negative })
    }

    pub fn positive_part(&self) -> &PositiveFunctional {
        &self.positive
    }

    pub fn negative_part(&self) -> &PositiveFunctional {
        &self.negative
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<f64> {
        Ok(self.positive.apply(f)? - self.negative.apply(f)?)
    }
}

impl<'de> Deserialize<'de> for SignedFunctional {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            positive: PositiveFunctional,
            negative: PositiveFunctional,
        }
        let wire = Wire::deserialize(d)?;
        SignedFunctional::new(wire.positive, wire.negative).map_err(serde::de::Error::custom)
    }
}

pub fn apply(phi: &PositiveFunctional, f: &SampledFunction) -> Result<f64> {
    phi.apply(f)
}

pub fn apply_signed(psi: &SignedFunctional, f: &SampledFunction) -> Result<f64> {
    psi.apply(f)
}

pub fn trapezoid_functional(grid: &Grid) -> PositiveFunctional {
    PositiveFunctional::trapezoid(grid)
}

fn check_lipschitz_bound(lipschitz: f64) -> Result<()> {
    if lipschitz.is_nan() || lipschitz < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Lipschitz bound must be nonnegative, got {lipschitz}"
        )));
    }
    Ok(())
}

/// Greatest `L`-Lipschitz function `g*` with `0 ≤ g* ≤ f` on the grid:
/// `g*(x) = max(0, min_j f(x_j) + L·d(x, x_j))`.
///
/// Computed with a forward and a backward sweep, which equals the all-pairs
/// formula on a line. The output satisfies [`SampledFunction::is_lipschitz`]
/// exactly in floating point, so the operation is idempotent bit for bit.
pub fn greatest_lipschitz_minorant(f: &SampledFunction, lipschitz: f64) -> Result<SampledFunction> {
    check_lipschitz_bound(lipschitz)?;
    if let Some(point) = f.first_negative() {
        return Err(Error::Negative {
            what: "minorant input".into(),
            point,
        });
    }
    let grid = f.grid();
    let mut g = f.values().to_vec();
    for i in 1..g.len() {
        g[i] = g[i].min(g[i - 1] + lipschitz * grid.gap(i - 1));
    }
    for i in (0..g.len() - 1).rev() {
        g[i] = g[i].min(g[i + 1] + lipschitz * grid.gap(i));
    }
    for v in &mut g {
        *v = v.max(0.0);
    }
    Ok(SampledFunction::from_parts_unchecked(grid.clone(), g))
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeResult {
    pub value: f64,
    pub witness: SampledFunction,
    pub lipschitz_bound: f64,
}

/// `Φ̄_L(f)`, with the maximizing minorant as witness.
pub fn envelope(phi: &PositiveFunctional, f: &SampledFunction, lipschitz: f64) -> Result<EnvelopeResult> {
    if !phi.grid().same_as(f.grid()) {
        return Err(Error::GridMismatch);
    }
    let witness = greatest_lipschitz_minorant(f, lipschitz)?;
    let value = phi.apply(&witness)?;
    Ok(EnvelopeResult {
        value,
        witness,
        lipschitz_bound: lipschitz,
    })
}

/// Both sides of `Φ̄(f₂) − Φ(g∧h) ≤ (Φ̄(f₁) − Φh) + (Φ̄(f₂) − Φg)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DefectCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl DefectCheck {
    pub fn holds(&self, tolerance: f64) -> bool {
        self.lhs <= self.rhs + tolerance
    }
}

fn require_dominates(
    upper: &SampledFunction,
    lower: &SampledFunction,
    what: &str,
) -> Result<()> {
    match upper.first_below(lower)? {
        Some(p) => Err(Error::Precondition(format!("{what} fails at grid point {p}"))),
        None => Ok(()),
    }
}

/// Evaluates the subadditivity-defect inequality for an admissible instance.
///
/// Requires `f₁ ≥ f₂ ≥ 0`, `0 ≤ h ≤ f₁`, `0 ≤ g ≤ f₂`, with `g` and `h`
/// `L`-Lipschitz; any violation is reported by name.
pub fn lemma1_defect_check(
    phi: &PositiveFunctional,
    f1: &SampledFunction,
    f2: &SampledFunction,
    g: &SampledFunction,
    h: &SampledFunction,
    lipschitz: f64,
) -> Result<DefectCheck> {
    check_lipschitz_bound(lipschitz)?;
    for (func, name) in [(f2, "f2 >= 0"), (g, "g >= 0"), (h, "h >= 0")] {
        if let Some(p) = func.first_negative() {
            return Err(Error::Precondition(format!("{name} fails at grid point {p}")));
        }
    }
    require_dominates(f1, f2, "f1 >= f2")?;
    require_dominates(f1, h, "h <= f1")?;
    require_dominates(f2, g, "g <= f2")?;
    if !g.is_lipschitz(lipschitz) {
        return Err(Error::Precondition(format!("g is not {lipschitz}-Lipschitz")));
    }
    if !h.is_lipschitz(lipschitz) {
        return Err(Error::Precondition(format!("h is not {lipschitz}-Lipschitz")));
    }
    let env1 = envelope(phi, f1, lipschitz)?.value;
    let env2 = envelope(phi, f2, lipschitz)?.value;
    let meet = phi.apply(&g.meet(h)?)?;
    let phi_g = phi.apply(g)?;
    let phi_h = phi.apply(h)?;
    Ok(DefectCheck {
        lhs: env2 - meet,
        rhs: (env1 - phi_h) + (env2 - phi_g),
    })
}

/// `Φ̄_L(f₁ + f₂) − Φ̄_L(f₁) − Φ̄_L(f₂)`; positive values witness failure of subadditivity.
pub fn subadditivity_gap(
    phi: &PositiveFunctional,
    f1: &SampledFunction,
    f2: &SampledFunction,
    lipschitz: f64,
) -> Result<f64> {
    let sum = f1.add(f2)?;
    Ok(envelope(phi, &sum, lipschitz)?.value
        - envelope(phi, f1, lipschitz)?.value
        - envelope(phi, f2, lipschitz)?.value)
}

//! Finite sampled models of the compact space, functions on them, and the
//! lattice operations (pointwise max/min) that the rest of the crate builds on.
//!
//! A [`Grid`] is a strictly increasing list of points in `[0, 1]` with the
//! metric `d(x, y) = |x - y|`. Functions are value vectors on a grid; there
//! is no interpolation between grid points, so every "uniform" statement in
//! this crate is a statement about the maximum over the grid.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Strictly increasing sample points in `[0, 1]`, at least two of them.
///
/// Cloning is cheap; clones share storage and compare equal by pointer first.
#[derive(Clone)]
pub struct Grid {
    points: Arc<[f64]>,
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        for (i, &x) in points.iter().enumerate() {
            if !x.is_finite() || !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidGrid(format!(
                    "point {i} = {x} is outside [0, 1]"
                )));
            }
        }
        if let Some(i) = points.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(format!(
                "points not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Self {
            points: points.into(),
        })
    }

    /// `n` equispaced points `i / (n - 1)` covering `[0, 1]`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {n}"
            )));
        }
        let denom = (n - 1) as f64;
        Self::new((0..n).map(|i| i as f64 / denom).collect())
    }

    /// Union of this grid with extra points (duplicates are merged).
    pub fn with_knots(&self, knots: &[f64]) -> Result<Self> {
        let mut points: Vec<f64> = self.points.iter().chain(knots).copied().collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> f64 {
        self.points[i]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        (self.points[i] - self.points[j]).abs()
    }

    /// Spacing `x[i + 1] - x[i]`.
    pub fn gap(&self, i: usize) -> f64 {
        self.points[i + 1] - self.points[i]
    }

    pub fn max_gap(&self) -> f64 {
        (0..self.len() - 1).map(|i| self.gap(i)).fold(0.0, f64::max)
    }

    pub fn span(&self) -> f64 {
        self.points[self.len() - 1] - self.points[0]
    }

    /// Index of the grid point exactly equal to `x`, if any.
    pub fn locate(&self, x: f64) -> Option<usize> {
        self.points
            .binary_search_by(|p| p.total_cmp(&x))
            .ok()
    }

    /// Indices of grid points lying strictly inside `(a, b)`.
    pub fn interior(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        let lo = self.points.partition_point(|&p| p <= a);
        let hi = self.points.partition_point(|&p| p < b);
        lo..hi.max(lo)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.points, &other.points) || self.points[..] == other.points[..]
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Grid({} points on [{}, {}])",
            self.len(),
            self.points[0],
            self.points[self.len() - 1]
        )
    }
}

impl Serialize for Grid {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.points.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let points = Vec::<f64>::deserialize(d)?;
        Grid::new(points).map_err(serde::de::Error::custom)
    }
}

/// A real function on a [`Grid`], stored as one finite value per point.
#[derive(Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Self::new(grid.clone(), values)
    }

    pub fn constant(grid: &Grid, c: f64) -> Result<Self> {
        Self::new(grid.clone(), vec![c; grid.len()])
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self { grid, values }
    }

    pub fn check_grid(&self, other: &SampledFunction) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn zip_with(&self, other: &SampledFunction, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| op(a, b))
            .collect();
        Self::new(self.grid.clone(), values)
    }

    fn map(&self, op: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| op(v)).collect())
    }

    /// Upper envelope `self ∨ other`.
    pub fn join(&self, other: &SampledFunction) -> Result<Self> {
        self.zip_with(other, f64::max)
    }

    /// Lower envelope `self ∧ other`.
    pub fn meet(&self, other: &SampledFunction) -> Result<Self> {
        self.zip_with(other, f64::min)
    }

    pub fn add(&self, other: &SampledFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SampledFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> Self {
        Self::from_parts_unchecked(self.grid.clone(), self.values.iter().map(|v| v.abs()).collect())
    }

    /// `self ∨ 0`.
    pub fn positive_part(&self) -> Self {
        Self::from_parts_unchecked(
            self.grid.clone(),
            self.values.iter().map(|&v| v.max(0.0)).collect(),
        )
    }

    /// Maximum of `|f|` over the grid.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Grid index where `|f|` is largest (first one on ties).
    pub fn argmax_abs(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if v.abs() > self.values[best].abs() {
                best = i;
            }
        }
        best
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// First grid point with a negative value, if any.
    pub fn first_negative(&self) -> Option<usize> {
        self.values.iter().position(|&v| v < 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.first_negative().is_none()
    }

    /// First grid point where `self < other`, if any (i.e. where `self ≥ other` fails).
    pub fn first_below(&self, other: &SampledFunction) -> Result<Option<usize>> {
        self.check_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .position(|(a, b)| a < b))
    }

    pub fn dominates(&self, other: &SampledFunction) -> Result<bool> {
        Ok(self.first_below(other)?.is_none())
    }

    /// Smallest `L` with `|f(x[i+1]) - f(x[i])| <= L * gap(i)` for all neighbours.
    ///
    /// On a line neighbour slopes bound every pairwise slope.
    pub fn lipschitz_constant(&self) -> f64 {
        (0..self.len() - 1)
            .map(|i| (self.values[i + 1] - self.values[i]).abs() / self.grid.gap(i))
            .fold(0.0, f64::max)
    }

    /// Whether `f(x[i]) <= f(x[j]) + lipschitz * d(i, j)` holds between neighbours,
    /// evaluated with the same floating-point expression the minorant uses.
    pub fn is_lipschitz(&self, lipschitz: f64) -> bool {
        (0..self.len() - 1).all(|i| {
            let step = lipschitz * self.grid.gap(i);
            self.values[i + 1] <= self.values[i] + step && self.values[i] <= self.values[i + 1] + step
        })
    }
}

impl fmt::Debug for SampledFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledFunction")
            .field("grid", &self.grid)
            .field("values", &self.values)
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct SampledFunctionWire {
    grid: Grid,
    values: Vec<f64>,
}

impl Serialize for SampledFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SampledFunctionWire {
            grid: self.grid.clone(),
            values: self.values.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SampledFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = SampledFunctionWire::deserialize(d)?;
        SampledFunction::new(wire.grid, wire.values).map_err(serde::de::Error::custom)
    }
}

/// A finite sequence of functions on one grid with a uniform bound `α`.
///
/// Indices are 1-based, matching the way sequences are written in analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionSequence {
    bound: f64,
    terms: Vec<SampledFunction>,
}

impl FunctionSequence {
    pub fn new(terms: Vec<SampledFunction>, bound: f64) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Empty("function sequence"));
        }
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bound must be finite and nonnegative, got {bound}"
            )));
        }
        let grid = terms[0].grid();
        for (k, term) in terms.iter().enumerate() {
            if !term.grid().same_as(grid) {
                return Err(Error::GridMismatch);
            }
            let sup = term.sup_norm();
            if sup > bound {
                return Err(Error::BoundExceeded {
                    index: k + 1,
                    bound,
                    sup,
                });
            }
        }
        Ok(Self { bound, terms })
    }

    /// Sequence whose bound is the largest sup-norm among its terms.
    pub fn with_tight_bound(terms: Vec<SampledFunction>) -> Result<Self> {
        let bound = terms.iter().map(|t| t.sup_norm()).fold(0.0, f64::max);
        Self::new(terms, bound)
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn grid(&self) -> &Grid {
        self.terms[0].grid()
    }

    pub fn terms(&self) -> &[SampledFunction] {
        &self.terms
    }

    /// Term `n`, 1-based.
    pub fn term(&self, n: usize) -> Result<&SampledFunction> {
        self.check_index(n)?;
        Ok(&self.terms[n - 1])
    }

    pub(crate) fn check_index(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.terms.len() {
            Err(Error::IndexOutOfRange {
                index: n,
                len: self.terms.len(),
            })
        } else {
            Ok(())
        }
    }

    /// `|f_1|, |f_2|, ...` with the same bound.
    pub fn abs(&self) -> Self {
        Self {
            bound: self.bound,
            terms: self.terms.iter().map(SampledFunction::abs).collect(),
        }
    }

    /// First `len` terms.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        self.check_index(len)?;
        Ok(Self {
            bound: self.bound,
            terms: self.terms[..len].to_vec(),
        })
    }

    /// First (term index, grid point) with a negative value.
    pub fn first_negative(&self) -> Option<(usize, usize)> {
        self.terms
            .iter()
            .enumerate()
            .find_map(|(k, t)| t.first_negative().map(|p| (k + 1, p)))
    }

    /// First (term index, grid point) where `f_{n} > f_{n-1}`.
    pub fn first_increase(&self) -> Option<(usize, usize)> {
        self.terms.windows(2).enumerate().find_map(|(k, w)| {
            w[1].values()
                .iter()
                .zip(w[0].values())
                .position(|(next, prev)| next > prev)
                .map(|p| (k + 2, p))
        })
    }
}

#[derive(Serialize, Deserialize)]
struct FunctionSequenceWire {
    bound: f64,
    grid: Grid,
    terms: Vec<Vec<f64>>,
}

impl Serialize for FunctionSequence {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FunctionSequenceWire {
            bound: self.bound,
            grid: self.grid().clone(),
            terms: self.terms.iter().map(|t| t.values().to_vec()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FunctionSequence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = FunctionSequenceWire::deserialize(d)?;
        let terms = wire
            .terms
            .into_iter()
            .map(|values| SampledFunction::new(wire.grid.clone(), values))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        FunctionSequence::new(terms, wire.bound).map_err(serde::de::Error::custom)
    }
}

pub fn lattice_join(g: &SampledFunction, h: &SampledFunction) -> Result<SampledFunction> {
    g.join(h)
}

pub fn lattice_meet(g: &SampledFunction, h: &SampledFunction) -> Result<SampledFunction> {
    g.meet(h)
}

pub fn sup_norm(f: &SampledFunction) -> f64 {
    f.sup_norm()
}

/// Prefix meets `h_n = g_1 ∧ ... ∧ g_n`.
pub fn running_meet(gs: &[SampledFunction]) -> Result<Vec<SampledFunction>> {
    let (first, rest) = gs.split_first().ok_or(Error::Empty("running meet input"))?;
    let mut out = Vec::with_capacity(gs.len());
    out.push(first.clone());
    for g in rest {
        let next = out[out.len() - 1].meet(g)?;
        out.push(next);
    }
    Ok(out)
}

/// Upper envelope of terms `n..=horizon` (1-based).
pub fn tail_sup_envelope(
    seq: &FunctionSequence,
    n: usize,
    horizon: usize,
) -> Result<SampledFunction> {
    seq.check_index(horizon)?;
    if n == 0 || n > horizon {
        return Err(Error::IndexOutOfRange {
            index: n,
            len: horizon,
        });
    }
    let mut acc = seq.terms[n - 1].values().to_vec();
    for term in &seq.terms[n..horizon] {
        for (a, &v) in acc.iter_mut().zip(term.values()) {
            *a = a.max(v);
        }
    }
    Ok(SampledFunction::from_parts_unchecked(seq.grid().clone(), acc))
}

/// All envelopes `f_n = ∨_{k=n}^{horizon} g_k` for `n = 1..=horizon`, computed
/// by one backward sweep. Entry `n - 1` holds `f_n`.
pub fn tail_sup_envelopes(seq: &FunctionSequence, horizon: usize) -> Result<Vec<SampledFunction>> {
    seq.check_index(horizon)?;
    let mut out = vec![seq.terms[horizon - 1].clone()];
    for term in seq.terms[..horizon - 1].iter().rev() {
        let next = out[out.len() - 1].join(term)?;
        out.push(next);
    }
    out.reverse();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn on(values: &[f64]) -> SampledFunction {
        let grid = Grid::uniform(values.len()).unwrap();
        SampledFunction::new(grid, values.to_vec()).unwrap()
    }

    fn pair(a: &[f64], b: &[f64]) -> (SampledFunction, SampledFunction) {
        let grid = Grid::uniform(a.len()).unwrap();
        (
            SampledFunction::new(grid.clone(), a.to_vec()).unwrap(),
            SampledFunction::new(grid, b.to_vec()).unwrap(),
        )
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(vec![0.0]).is_err());
        assert!(Grid::new(vec![0.0, 0.0]).is_err());
        assert!(Grid::new(vec![0.5, 0.2]).is_err());
        assert!(Grid::new(vec![0.0, 1.5]).is_err());
        assert!(Grid::new(vec![0.0, f64::NAN]).is_err());
        let g = Grid::uniform(3).unwrap();
        assert_eq!(g.points(), &[0.0, 0.5, 1.0]);
        assert_eq!(g.distance(0, 2), 1.0);
        assert_eq!(g.distance(2, 0), 1.0);
        assert_eq!(g.distance(1, 1), 0.0);
    }

    #[test]
    fn knots_merge_and_locate() {
        let g = Grid::uniform(3).unwrap().with_knots(&[0.25, 0.5]).unwrap();
        assert_eq!(g.points(), &[0.0, 0.25, 0.5, 1.0]);
        assert_eq!(g.locate(0.25), Some(1));
        assert_eq!(g.locate(0.3), None);
        assert_eq!(g.interior(0.0, 0.5), 1..2);
        assert_eq!(g.interior(0.3, 0.4), 2..2);
    }

    #[test]
    fn join_meet_examples() {
        let (g, h) = pair(&[1.0, 0.0, 2.0], &[0.0, 1.0, 1.0]);
        assert_eq!(lattice_join(&g, &h).unwrap().values(), &[1.0, 1.0, 2.0]);
        assert_eq!(lattice_meet(&g, &h).unwrap().values(), &[0.0, 0.0, 1.0]);

        let s = on(&[3.0, 3.0]);
        assert_eq!(lattice_join(&s, &s).unwrap().values(), &[3.0, 3.0]);
        assert_eq!(lattice_meet(&s, &s).unwrap().values(), &[3.0, 3.0]);

        let (g, z) = pair(&[-1.0, 5.0, 0.0], &[0.0, 0.0, 0.0]);
        assert_eq!(lattice_join(&g, &z).unwrap().values(), &[0.0, 5.0, 0.0]);
        assert_eq!(lattice_meet(&g, &z).unwrap().values(), &[-1.0, 0.0, 0.0]);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let a = on(&[1.0, 2.0]);
        let b = on(&[1.0, 2.0, 3.0]);
        assert!(matches!(a.join(&b), Err(Error::GridMismatch)));
        assert!(matches!(a.meet(&b), Err(Error::GridMismatch)));
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(sup_norm(&on(&[0.0, 0.0, 0.0])), 0.0);
        assert_eq!(sup_norm(&on(&[-2.0, 1.0])), 2.0);
        assert_eq!(sup_norm(&on(&[0.5, -0.25, 0.75])), 0.75);
    }

    #[test]
    fn running_meet_examples() {
        let grid = Grid::uniform(2).unwrap();
        let gs: Vec<_> = [[2.0, 2.0], [1.0, 3.0], [3.0, 0.0]]
            .iter()
            .map(|v| SampledFunction::new(grid.clone(), v.to_vec()).unwrap())
            .collect();
        let hs = running_meet(&gs).unwrap();
        let got: Vec<_> = hs.iter().map(|h| h.values().to_vec()).collect();
        assert_eq!(got, vec![vec![2.0, 2.0], vec![1.0, 2.0], vec![1.0, 0.0]]);

        let single = running_meet(&gs[..1]).unwrap();
        assert_eq!(single, vec![gs[0].clone()]);

        assert!(matches!(running_meet(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn tail_envelope_examples() {
        let grid = Grid::uniform(2).unwrap();
        let seq = FunctionSequence::new(
            vec![
                SampledFunction::new(grid.clone(), vec![1.0, 0.0]).unwrap(),
                SampledFunction::new(grid, vec![0.0, 1.0]).unwrap(),
            ],
            1.0,
        )
        .unwrap();
        assert_eq!(tail_sup_envelope(&seq, 1, 2).unwrap().values(), &[1.0, 1.0]);
        assert_eq!(&tail_sup_envelope(&seq, 2, 2).unwrap(), seq.term(2).unwrap());
        assert_eq!(&tail_sup_envelope(&seq, 1, 1).unwrap(), seq.term(1).unwrap());
        assert!(tail_sup_envelope(&seq, 0, 2).is_err());
        assert!(tail_sup_envelope(&seq, 2, 1).is_err());
        assert!(tail_sup_envelope(&seq, 1, 3).is_err());
        let all = tail_sup_envelopes(&seq, 2).unwrap();
        assert_eq!(all[0].values(), &[1.0, 1.0]);
        assert_eq!(all[1].values(), &[0.0, 1.0]);
    }

    #[test]
    fn sequence_invariants() {
        let grid = Grid::uniform(2).unwrap();
        let t = SampledFunction::new(grid.clone(), vec![0.5, -2.0]).unwrap();
        assert!(matches!(
            FunctionSequence::new(vec![t.clone()], 1.0),
            Err(Error::BoundExceeded { index: 1, .. })
        ));
        assert!(FunctionSequence::new(vec![t.clone()], 2.0).is_ok());
        let other = SampledFunction::zeros(&Grid::uniform(3).unwrap());
        assert!(matches!(
            FunctionSequence::new(vec![t, other], 2.0),
            Err(Error::GridMismatch)
        ));
        assert!(SampledFunction::new(grid.clone(), vec![1.0]).is_err());
        assert!(matches!(
            SampledFunction::new(grid, vec![1.0, f64::INFINITY]),
            Err(Error::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn json_shapes() {
        let f = on(&[0.5, 1.0]);
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"grid":[0.0,1.0],"values":[0.5,1.0]}"#);
        let back: SampledFunction = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<SampledFunction>(r#"{"grid":[0.0,1.0],"values":[1.0]}"#).is_err());

        let seq = FunctionSequence::new(vec![f.clone(), f.scale(0.5).unwrap()], 1.0).unwrap();
        let text = serde_json::to_string(&seq).unwrap();
        assert_eq!(
            text,
            r#"{"bound":1.0,"grid":[0.0,1.0],"terms":[[0.5,1.0],[0.25,0.5]]}"#
        );
        let back: FunctionSequence = serde_json::from_str(&text).unwrap();
        assert_eq!(back, seq);
    }

    #[test]
    fn monotonicity_scan() {
        let grid = Grid::uniform(3).unwrap();
        let mk = |v: [f64; 3]| SampledFunction::new(grid.clone(), v.to_vec()).unwrap();
        let seq =
            FunctionSequence::new(vec![mk([1.0, 1.0, 1.0]), mk([0.5, 1.0, 0.0]), mk([0.5, 1.5, 0.0])], 2.0)
                .unwrap();
        assert_eq!(seq.first_increase(), Some((3, 1)));
        assert_eq!(seq.first_negative(), None);
    }
}

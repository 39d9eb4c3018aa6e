//! Parametrized Hermitian families `u ↦ A(u)` and the builders for the
//! standard regimes: rough couplings, crossing lines, Dirichlet
//! Schrödinger truncations and seeded random Hölder families.
//!
//! Multi-parameter families are reduced to one parameter by [`pullback`]
//! along a smooth curve.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, SpectraError};
use crate::hermitian::HermitianMatrix;
use crate::rng::SplitMix64;

pub mod spec;

pub use spec::{FamilySpec, PotentialSpec};

pub type Evaluator = Arc<dyn Fn(&[f64]) -> Result<HermitianMatrix> + Send + Sync>;

/// A deterministic map from a box in `ℝ^d` to N×N Hermitian matrices.
#[derive(Clone)]
pub struct ParamFamily {
    kind: String,
    param_dim: usize,
    matrix_dim: usize,
    claimed_alpha: f64,
    domain: Vec<(f64, f64)>,
    evaluator: Evaluator,
    holder_bound: Option<f64>,
}

impl fmt::Debug for ParamFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamFamily")
            .field("kind", &self.kind)
            .field("param_dim", &self.param_dim)
            .field("matrix_dim", &self.matrix_dim)
            .field("claimed_alpha", &self.claimed_alpha)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// Metadata echoed by `spectra gen`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySummary {
    pub kind: String,
    #[serde(rename = "N")]
    pub matrix_dim: usize,
    pub d: usize,
    pub alpha: f64,
    pub domain: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holder_bound: Option<f64>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(SpectraError::InvalidArgument {
            name: "alpha",
            reason: format!("{alpha} is outside (0, 1]"),
        });
    }
    Ok(())
}

impl ParamFamily {
    /// Wraps an arbitrary evaluator. The domain box defaults to `[-1, 1]^d`.
    pub fn from_fn<F>(kind: impl Into<String>, param_dim: usize, matrix_dim: usize, claimed_alpha: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<HermitianMatrix> + Send + Sync + 'static,
    {
        check_alpha(claimed_alpha)?;
        if param_dim == 0 {
            return Err(SpectraError::InvalidArgument { name: "param_dim", reason: "must be positive".into() });
        }
        if matrix_dim == 0 {
            return Err(SpectraError::EmptyMatrix);
        }
        Ok(Self {
            kind: kind.into(),
            param_dim,
            matrix_dim,
            claimed_alpha,
            domain: vec![(-1.0, 1.0); param_dim],
            evaluator: Arc::new(f),
            holder_bound: None,
        })
    }

    /// One-parameter family from a scalar closure.
    pub fn scalar<F>(kind: impl Into<String>, matrix_dim: usize, claimed_alpha: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<HermitianMatrix> + Send + Sync + 'static,
    {
        Self::from_fn(kind, 1, matrix_dim, claimed_alpha, move |u| f(u[0]))
    }

    pub fn with_domain(mut self, domain: Vec<(f64, f64)>) -> Result<Self> {
        if domain.len() != self.param_dim {
            return Err(SpectraError::DimensionMismatch { expected: self.param_dim, found: domain.len() });
        }
        if domain.iter().any(|&(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(SpectraError::InvalidArgument { name: "domain", reason: "each interval needs finite lo <= hi".into() });
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn with_holder_bound(mut self, bound: f64) -> Self {
        self.holder_bound = Some(bound);
        self
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    pub fn matrix_dim(&self) -> usize {
        self.matrix_dim
    }

    pub fn claimed_alpha(&self) -> f64 {
        self.claimed_alpha
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    /// A known upper bound for `‖A(s) − A(t)‖ / |s − t|^α`, when the builder
    /// can provide one.
    pub fn holder_bound(&self) -> Option<f64> {
        self.holder_bound
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.param_dim && u.iter().zip(&self.domain).all(|(&x, &(lo, hi))| lo <= x && x <= hi)
    }

    pub fn eval(&self, u: &[f64]) -> Result<HermitianMatrix> {
        if u.len() != self.param_dim {
            return Err(SpectraError::DimensionMismatch { expected: self.param_dim, found: u.len() });
        }
        if !self.contains(u) {
            return Err(SpectraError::OutOfDomain { value: u.to_vec() });
        }
        let a = (self.evaluator)(u)?;
        if a.dim() != self.matrix_dim {
            return Err(SpectraError::DimensionMismatch { expected: self.matrix_dim, found: a.dim() });
        }
        Ok(a)
    }

    /// Shorthand for one-parameter families.
    pub fn eval_at(&self, t: f64) -> Result<HermitianMatrix> {
        self.eval(&[t])
    }

    pub fn summary(&self) -> FamilySummary {
        FamilySummary {
            kind: self.kind.clone(),
            matrix_dim: self.matrix_dim,
            d: self.param_dim,
            alpha: self.claimed_alpha,
            domain: self.domain.iter().map(|&(lo, hi)| [lo, hi]).collect(),
            holder_bound: self.holder_bound,
        }
    }
}

/// A curve `t ↦ c(t) ∈ ℝ^d` on a closed interval.
#[derive(Clone)]
pub struct SmoothCurve {
    output_dim: usize,
    interval: (f64, f64),
    map: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
    derivative: Option<Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>>,
}

impl fmt::Debug for SmoothCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothCurve")
            .field("output_dim", &self.output_dim)
            .field("interval", &self.interval)
            .finish_non_exhaustive()
    }
}

impl SmoothCurve {
    pub fn new<F>(output_dim: usize, interval: (f64, f64), map: F) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        Self { output_dim, interval, map: Arc::new(map), derivative: None }
    }

    pub fn with_derivative<F>(mut self, derivative: F) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        (self.map)(t)
    }

    pub fn derivative_at(&self, t: f64) -> Option<Vec<f64>> {
        self.derivative.as_ref().map(|d| d(t))
    }
}

/// The one-parameter family `t ↦ A(c(t))` on the curve's interval.
pub fn pullback(family: &ParamFamily, curve: &SmoothCurve) -> Result<ParamFamily> {
    if curve.output_dim != family.param_dim {
        return Err(SpectraError::DimensionMismatch { expected: family.param_dim, found: curve.output_dim });
    }
    let inner = family.clone();
    let c = curve.clone();
    let (lo, hi) = curve.interval;
    let out = ParamFamily::from_fn(format!("pullback({})", family.kind), 1, family.matrix_dim, family.claimed_alpha, move |t| {
        let u = c.at(t[0]);
        if u.len() != inner.param_dim {
            return Err(SpectraError::DimensionMismatch { expected: inner.param_dim, found: u.len() });
        }
        inner.eval(&u)
    })?;
    out.with_domain(vec![(lo, hi)])
}

/// `A(t) = [[0, s·|t|^α], [s·|t|^α, 0]]` on `[-1, 1]`, eigenvalues `±s·|t|^α`.
pub fn build_rough_coupling(alpha: f64, scale: f64) -> Result<ParamFamily> {
    check_alpha(alpha)?;
    if !scale.is_finite() {
        return Err(SpectraError::InvalidArgument { name: "scale", reason: "must be finite".into() });
    }
    let family = ParamFamily::scalar("rough_coupling", 2, alpha, move |t| {
        let c = scale * t.abs().powf(alpha);
        HermitianMatrix::from_real_rows(2, &[0.0, c, c, 0.0])
    })?;
    Ok(family.with_holder_bound(scale.abs()))
}

/// Unitary used to hide the diagonal structure of [`build_crossing_lines`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mixer {
    Identity,
    Seeded(u64),
}

impl Mixer {
    pub fn unitary(self, n: usize) -> DMatrix<Complex64> {
        match self {
            Mixer::Identity => DMatrix::identity(n, n),
            Mixer::Seeded(seed) => random_unitary(&mut SplitMix64::new(seed), n),
        }
    }
}

/// Modified Gram–Schmidt on a seeded complex matrix filled column-major,
/// real part then imaginary part, entries uniform in `[-1, 1)`.
pub fn random_unitary(rng: &mut SplitMix64, n: usize) -> DMatrix<Complex64> {
    let mut q = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            q[(i, j)] = Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        }
    }
    // two passes keep the columns orthonormal to working precision
    for _ in 0..2 {
        for j in 0..n {
            for k in 0..j {
                let proj = q.column(k).dotc(&q.column(j));
                let col_k = q.column(k).clone_owned();
                let mut col_j = q.column_mut(j);
                col_j -= col_k * proj;
            }
            let norm = q.column(j).norm();
            q.column_mut(j).scale_mut(1.0 / norm);
        }
    }
    q
}

/// Offsets that make every pair of non-parallel lines cross at a distinct
/// interior point: the lines `s_i·t − s_i²/(2σ)` are tangents to one parabola,
/// so no three of them meet, and lines `i, j` cross at `(s_i + s_j)/(2σ)`.
/// Parallel duplicates are separated by `1/N`, and the result is centered so
/// the offsets span a symmetric interval around zero.
pub fn default_line_offsets(slopes: &[f64]) -> Vec<f64> {
    let n = slopes.len();
    let sigma = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let mut offsets: Vec<f64> = slopes
        .iter()
        .map(|&s| if sigma > 0.0 { -s * s / (2.0 * sigma) } else { 0.0 })
        .collect();
    for i in 0..n {
        let repeats = slopes[..i].iter().filter(|&&s| s == slopes[i]).count();
        offsets[i] += repeats as f64 / n as f64;
    }
    let lo = offsets.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = offsets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    offsets.iter().map(|o| o - mid).collect()
}

/// `A(t) = W·diag(slopes·t + offsets)·W*` with [`default_line_offsets`].
pub fn build_crossing_lines(slopes: &[f64], mixer: Mixer) -> Result<ParamFamily> {
    let offsets = default_line_offsets(slopes);
    build_crossing_lines_with_offsets(slopes, &offsets, mixer)
}

pub fn build_crossing_lines_with_offsets(slopes: &[f64], offsets: &[f64], mixer: Mixer) -> Result<ParamFamily> {
    let n = slopes.len();
    if n < 2 {
        return Err(SpectraError::InvalidArgument { name: "slopes", reason: "need at least two lines".into() });
    }
    if offsets.len() != n {
        return Err(SpectraError::DimensionMismatch { expected: n, found: offsets.len() });
    }
    if slopes.iter().chain(offsets).any(|x| !x.is_finite()) {
        return Err(SpectraError::InvalidArgument { name: "slopes", reason: "entries must be finite".into() });
    }
    let w = mixer.unitary(n);
    let slopes = slopes.to_vec();
    let offsets = offsets.to_vec();
    let lipschitz = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let family = ParamFamily::scalar("crossing_lines", n, 1.0, move |t| {
        let diag: Vec<f64> = slopes.iter().zip(&offsets).map(|(s, o)| s * t + o).collect();
        let d = HermitianMatrix::from_diagonal(&diag)?;
        if mixer == Mixer::Identity {
            Ok(d)
        } else {
            d.conjugate_by(&w)
        }
    })?;
    Ok(family.with_holder_bound(lipschitz))
}

/// Dirichlet finite-difference truncation of `−d²/dx² + V(u, x)` on `(0, 1)`
/// with `n` interior points: `h = 1/(n+1)`, `x_i = i·h`, diagonal
/// `2/h² + V(u, x_i)`, off-diagonal `−1/h²`.
pub fn build_schrodinger_1d<V>(potential: V, n: usize) -> Result<ParamFamily>
where
    V: Fn(f64, f64) -> f64 + Send + Sync + 'static,
{
    if n < 2 {
        return Err(SpectraError::InvalidArgument { name: "n", reason: "need at least two grid points".into() });
    }
    let h = 1.0 / (n as f64 + 1.0);
    let inv_h2 = 1.0 / (h * h);
    ParamFamily::scalar("schrodinger", n, 1.0, move |u| {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let x = (i + 1) as f64 * h;
            let v = potential(u, x);
            if !v.is_finite() {
                return Err(SpectraError::InvalidArgument { name: "potential", reason: format!("V({u}, {x}) is not finite") });
            }
            m[(i, i)] = 2.0 * inv_h2 + v;
            if i + 1 < n {
                m[(i, i + 1)] = -inv_h2;
                m[(i + 1, i)] = -inv_h2;
            }
        }
        HermitianMatrix::from_real(m)
    })
}

/// Seeded `A(t) = A₀ + Σ_k |t − τ_k|^α · B_k` on `[-1, 1]`.
///
/// Draw order: `A₀`, then for each term `τ_k ∈ [-1, 1)` followed by `B_k`.
/// Since `||a|^α − |b|^α| ≤ |a − b|^α`, the family is `C^{0,α}` with
/// constant `Σ_k ‖B_k‖`, recorded as the holder bound.
pub fn build_random_holder(seed: u64, alpha: f64, n: usize, terms: usize) -> Result<ParamFamily> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(SpectraError::EmptyMatrix);
    }
    let mut rng = SplitMix64::new(seed);
    let a0 = HermitianMatrix::random(&mut rng, n)?;
    let mut knots = Vec::with_capacity(terms);
    let mut coeffs = Vec::with_capacity(terms);
    for _ in 0..terms {
        knots.push(rng.uniform(-1.0, 1.0));
        coeffs.push(HermitianMatrix::random(&mut rng, n)?);
    }
    let bound: f64 = coeffs.iter().map(|b| b.op_norm()).sum();
    let family = ParamFamily::scalar("random_holder", n, alpha, move |t| {
        let mut m = a0.as_matrix().clone();
        for (tau, b) in knots.iter().zip(&coeffs) {
            let w = (t - tau).abs().powf(alpha);
            m += b.as_matrix() * Complex64::new(w, 0.0);
        }
        HermitianMatrix::new(m)
    })?;
    Ok(family.with_holder_bound(bound))
}

/// Knots of a seeded random Hölder family, in draw order.
pub fn random_holder_knots(seed: u64, n: usize, terms: usize) -> Vec<f64> {
    let mut rng = SplitMix64::new(seed);
    let _ = HermitianMatrix::random(&mut rng, n);
    (0..terms)
        .map(|_| {
            let tau = rng.uniform(-1.0, 1.0);
            let _ = HermitianMatrix::random(&mut rng, n);
            tau
        })
        .collect()
}

/// `t_i = lo + (hi − lo)·i/(nodes − 1)` with both endpoints exact.
pub fn uniform_grid(lo: f64, hi: f64, nodes: usize) -> Result<Vec<f64>> {
    if nodes < 2 {
        return Err(SpectraError::InvalidArgument { name: "nodes", reason: "need at least two nodes".into() });
    }
    if !(lo < hi) {
        return Err(SpectraError::InvalidArgument { name: "grid", reason: format!("lo = {lo} must be below hi = {hi}") });
    }
    let last = (nodes - 1) as f64;
    Ok((0..nodes)
        .map(|i| if i == nodes - 1 { hi } else { lo + (hi - lo) * (i as f64 / last) })
        .collect())
}

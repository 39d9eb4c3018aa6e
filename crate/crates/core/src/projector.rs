//! Riesz spectral projectors by trapezoidal quadrature of the resolvent on a
//! circle centered on the real axis.
//!
//! ```text
//! P = −(1/2πi) ∮_γ (A − z)^{-1} dz
//!   ≈ −(r/M) Σ_m e^{iθ_m} (A − z_m)^{-1},   z_m = c + r·e^{iθ_m},  θ_m = 2πm/M
//! ```
//!
//! The trapezoidal rule converges geometrically here because the integrand
//! is analytic in an annulus around the circle.

use std::f64::consts::PI;
use std::ops::Range;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SpectraError};
use crate::hermitian::{eig_ordered, left_gram_eig, spectral_norm, HermitianMatrix};

pub const DEFAULT_NODES: usize = 64;
pub const MAX_NODES: usize = 2048;
pub const MIN_NODES: usize = 8;

/// Adaptive doubling stops once `‖P² − P‖` falls below this.
pub const IDEMPOTENCY_TOL: f64 = 1e-10;

/// Relative distance below which an eigenvalue counts as lying on γ.
pub const CONTOUR_CLEARANCE: f64 = 1e-6;

/// Relative distance below which `z` counts as a spectral point.
pub const RESOLVENT_CLEARANCE: f64 = 1e-8;

/// Shrink factor applied to the half-gap in [`default_contour`].
pub const DEFAULT_SHRINK: f64 = 0.9;

/// Circle `|z − center| = radius` sampled at `nodes` equispaced points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Contour {
    pub center: f64,
    pub radius: f64,
    pub nodes: usize,
}

impl Contour {
    pub fn new(center: f64, radius: f64, nodes: usize) -> Result<Self> {
        if !center.is_finite() {
            return Err(SpectraError::InvalidArgument { name: "center", reason: "must be finite".into() });
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(SpectraError::InvalidArgument { name: "radius", reason: format!("{radius} must be positive") });
        }
        if nodes < MIN_NODES {
            return Err(SpectraError::InvalidArgument { name: "nodes", reason: format!("need at least {MIN_NODES}") });
        }
        Ok(Self { center, radius, nodes })
    }

    pub fn circle(center: f64, radius: f64) -> Result<Self> {
        Self::new(center, radius, DEFAULT_NODES)
    }

    pub fn with_nodes(self, nodes: usize) -> Result<Self> {
        Self::new(self.center, self.radius, nodes)
    }

    pub fn node(&self, m: usize) -> Complex64 {
        Complex64::new(self.center, 0.0) + Complex64::from_polar(self.radius, self.angle(m))
    }

    fn angle(&self, m: usize) -> f64 {
        2.0 * PI * m as f64 / self.nodes as f64
    }

    /// Strictly inside the circle.
    pub fn encloses(&self, x: f64) -> bool {
        (x - self.center).abs() < self.radius
    }

    /// Distance from the real point `x` to the circle.
    pub fn distance(&self, x: f64) -> f64 {
        ((x - self.center).abs() - self.radius).abs()
    }
}

/// `(A − zI)^{-1}`, refusing `z` within `1e-8·(1 + ‖A‖)` of the spectrum.
pub fn resolvent(a: &HermitianMatrix, z: Complex64) -> Result<DMatrix<Complex64>> {
    let values = eig_ordered(a).values;
    let norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let distance = values.iter().fold(f64::INFINITY, |d, &mu| d.min((Complex64::new(mu, 0.0) - z).norm()));
    if distance <= RESOLVENT_CLEARANCE * (1.0 + norm) {
        return Err(SpectraError::SpectrumTooClose { re: z.re, im: z.im, distance });
    }
    Ok(shifted_inverse(a.as_matrix(), z))
}

fn shifted_inverse(a: &DMatrix<Complex64>, z: Complex64) -> DMatrix<Complex64> {
    let n = a.nrows();
    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] -= z;
    }
    shifted
        .lu()
        .try_inverse()
        .expect("shifted matrix is nonsingular once z is cleared from the spectrum")
}

/// Fails with `ContourHitsSpectrum` if some eigenvalue lies within
/// `1e-6·(1 + ‖A‖)` of γ. Returns the eigenvalues.
pub fn check_admissible(a: &HermitianMatrix, gamma: &Contour) -> Result<Vec<f64>> {
    let values = eig_ordered(a).values;
    let norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let limit = CONTOUR_CLEARANCE * (1.0 + norm);
    if let Some((&eigenvalue, distance)) = values
        .iter()
        .map(|mu| (mu, gamma.distance(*mu)))
        .filter(|&(_, d)| d <= limit)
        .min_by(|x, y| x.1.total_cmp(&y.1))
    {
        return Err(SpectraError::ContourHitsSpectrum { eigenvalue, distance });
    }
    Ok(values)
}

/// Raw quadrature sum for an admissible contour. Node solves may run in
/// parallel; the sum is taken in ascending node order.
fn quadrature(a: &HermitianMatrix, gamma: &Contour) -> DMatrix<Complex64> {
    let n = a.dim();
    let terms: Vec<DMatrix<Complex64>> = (0..gamma.nodes)
        .into_par_iter()
        .map(|m| {
            let weight = Complex64::from_polar(1.0, gamma.angle(m));
            shifted_inverse(a.as_matrix(), gamma.node(m)) * weight
        })
        .collect();
    let mut p = DMatrix::<Complex64>::zeros(n, n);
    for t in &terms {
        p += t;
    }
    p * Complex64::new(-gamma.radius / gamma.nodes as f64, 0.0)
}

/// Orthogonal projector onto the eigenspaces enclosed by a contour.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProjector {
    pub matrix: DMatrix<Complex64>,
    pub rank: usize,
    /// `N × rank`, orthonormal columns spanning the range.
    pub range_basis: DMatrix<Complex64>,
    /// Quadrature nodes used to build `matrix`.
    pub nodes: usize,
    /// Descending singular values of `matrix`.
    pub singular_values: Vec<f64>,
}

impl SpectralProjector {
    /// Extracts rank and range from a near-projector: rank counts singular
    /// values above 1/2, and any singular value in `[0.25, 0.75]` is rejected.
    pub fn from_matrix(matrix: DMatrix<Complex64>, nodes: usize) -> Result<Self> {
        let n = matrix.nrows();
        // singular values and left singular vectors from P·P*, largest first
        let gram = left_gram_eig(&matrix)?;
        let singular_values: Vec<f64> = gram.values.iter().rev().map(|&l| l.max(0.0).sqrt()).collect();
        if let Some(&sigma) = singular_values.iter().find(|s| (0.25..=0.75).contains(*s)) {
            return Err(SpectraError::RankAmbiguous { sigma });
        }
        let rank = singular_values.iter().filter(|&&s| s > 0.5).count();
        let mut basis = DMatrix::from_fn(n, rank, |r, c| gram.vectors[(r, n - 1 - c)]);
        orthonormalize(&mut basis);
        Ok(Self { matrix, rank, range_basis: basis, nodes, singular_values })
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `‖P² − P‖`
    pub fn idempotency_defect(&self) -> f64 {
        spectral_norm(&(&self.matrix * &self.matrix - &self.matrix))
    }

    /// `‖P* − P‖`
    pub fn hermiticity_defect(&self) -> f64 {
        spectral_norm(&(self.matrix.adjoint() - &self.matrix))
    }

    pub fn diagnostics(&self) -> ProjectorDiagnostics {
        let tr = self.trace();
        ProjectorDiagnostics {
            rank: self.rank,
            trace_re: tr.re,
            trace_im: tr.im,
            idempotency_defect: self.idempotency_defect(),
            hermiticity_defect: self.hermiticity_defect(),
            nodes: self.nodes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectorDiagnostics {
    pub rank: usize,
    pub trace_re: f64,
    pub trace_im: f64,
    pub idempotency_defect: f64,
    pub hermiticity_defect: f64,
    pub nodes: usize,
}

fn orthonormalize(basis: &mut DMatrix<Complex64>) {
    for _ in 0..2 {
        for j in 0..basis.ncols() {
            for k in 0..j {
                let proj = basis.column(k).dotc(&basis.column(j));
                let col_k = basis.column(k).clone_owned();
                let mut col_j = basis.column_mut(j);
                col_j -= col_k * proj;
            }
            let norm = basis.column(j).norm();
            basis.column_mut(j).scale_mut(1.0 / norm);
        }
    }
}

/// Projector from exactly `gamma.nodes` quadrature points.
pub fn contour_projector(a: &HermitianMatrix, gamma: &Contour) -> Result<SpectralProjector> {
    check_admissible(a, gamma)?;
    SpectralProjector::from_matrix(quadrature(a, gamma), gamma.nodes)
}

/// Doubles the node count from `gamma.nodes` until `‖P² − P‖ ≤ 1e-10` or
/// [`MAX_NODES`] is reached.
pub fn contour_projector_adaptive(a: &HermitianMatrix, gamma: &Contour) -> Result<SpectralProjector> {
    check_admissible(a, gamma)?;
    let mut nodes = gamma.nodes;
    loop {
        let current = gamma.with_nodes(nodes)?;
        let p = quadrature(a, &current);
        let defect = spectral_norm(&(&p * &p - &p));
        if defect <= IDEMPOTENCY_TOL || nodes >= MAX_NODES {
            return SpectralProjector::from_matrix(p, nodes);
        }
        nodes = (nodes * 2).min(MAX_NODES);
    }
}

/// The compression `Q*·A·Q` of `A` to the range of a projector.
#[derive(Debug, Clone, PartialEq)]
pub enum ProjectedBlock {
    /// The contour encloses no eigenvalue.
    Empty,
    Block(HermitianMatrix),
}

impl ProjectedBlock {
    pub fn is_empty(&self) -> bool {
        matches!(self, ProjectedBlock::Empty)
    }

    pub fn dim(&self) -> usize {
        match self {
            ProjectedBlock::Empty => 0,
            ProjectedBlock::Block(b) => b.dim(),
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        match self {
            ProjectedBlock::Empty => Vec::new(),
            ProjectedBlock::Block(b) => b.eigenvalues(),
        }
    }
}

pub fn project_block(a: &HermitianMatrix, p: &SpectralProjector) -> Result<ProjectedBlock> {
    if p.range_basis.nrows() != a.dim() {
        return Err(SpectraError::DimensionMismatch { expected: a.dim(), found: p.range_basis.nrows() });
    }
    if p.rank == 0 {
        return Ok(ProjectedBlock::Empty);
    }
    let q = &p.range_basis;
    let block = q.adjoint() * a.as_matrix() * q;
    let block = (&block + block.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(ProjectedBlock::Block(HermitianMatrix::new(block)?))
}

/// Number of eigenvalues strictly inside γ, read off as `round(Re tr P)`.
pub fn enclosed_count(a: &HermitianMatrix, gamma: &Contour) -> Result<usize> {
    let p = contour_projector_adaptive(a, gamma)?;
    Ok(p.trace().re.round().max(0.0) as usize)
}

/// Contour around the ordered eigenvalues `group` of a spectrum: centered at
/// the group's midpoint, reaching `0.9 ×` half the gap to the nearest
/// outside eigenvalue beyond the group's edges. With no outside eigenvalue the
/// gap is taken as `1 + ‖A‖`.
pub fn default_contour(values: &[f64], group: Range<usize>) -> Result<Contour> {
    if group.is_empty() || group.end > values.len() {
        return Err(SpectraError::InvalidArgument {
            name: "group",
            reason: format!("{group:?} is not a nonempty range within 0..{}", values.len()),
        });
    }
    let lo = values[group.start];
    let hi = values[group.end - 1];
    let norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let below = if group.start > 0 { lo - values[group.start - 1] } else { f64::INFINITY };
    let above = if group.end < values.len() { values[group.end] - hi } else { f64::INFINITY };
    let mut gap = below.min(above);
    if gap.is_infinite() {
        gap = 1.0 + norm;
    }
    if gap <= CONTOUR_CLEARANCE * (1.0 + norm) {
        return Err(SpectraError::InvalidArgument { name: "group", reason: "group splits a degenerate cluster".into() });
    }
    let half_width = 0.5 * (hi - lo);
    Contour::circle(0.5 * (lo + hi), half_width + DEFAULT_SHRINK * 0.5 * gap)
}

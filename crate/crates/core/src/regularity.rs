//! Hölder certificates for sampled branches, the `C·N` transfer bound for
//! continuous selections, and the Gronwall growth check for Lipschitz
//! branches.
//!
//! Every certificate is a statement about the pairs that were tested on a
//! compact grid. It bounds the grid supremum of the Hölder quotient; it is
//! not a proof of regularity between grid nodes.

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SpectraError};
use crate::family::ParamFamily;
use crate::hermitian::{op_norm, HermitianMatrix};
use crate::tracking::{check_grid, ordered_branches, sample_grid, Branch};

/// Relative slack for comparing a constant against a claimed bound.
pub const BOUND_SLACK: f64 = 1e-9;

/// Above this many nodes [`PairPolicy::Auto`] switches to dyadic pairs.
pub const AUTO_ALL_PAIRS_LIMIT: usize = 2000;

/// Growth of the α = 1 quotient under 2× refinement beyond which a branch
/// is treated as not Lipschitz.
pub const LIPSCHITZ_REFINEMENT_RATIO: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairPolicy {
    /// Every pair `j < k`.
    All,
    /// Pairs `(j, j + 2^p)`.
    Dyadic,
    /// `All` up to 2000 nodes, `Dyadic` above.
    #[default]
    Auto,
}

impl PairPolicy {
    fn resolve(self, nodes: usize) -> PairPolicy {
        match self {
            PairPolicy::Auto if nodes <= AUTO_ALL_PAIRS_LIMIT => PairPolicy::All,
            PairPolicy::Auto => PairPolicy::Dyadic,
            other => other,
        }
    }

    /// Partners `k > j` of node `j` among `nodes` nodes.
    fn partners(self, j: usize, nodes: usize) -> Box<dyn Iterator<Item = usize>> {
        match self.resolve(nodes) {
            PairPolicy::Dyadic => Box::new(
                std::iter::successors(Some(1usize), |d| d.checked_mul(2))
                    .map(move |d| j + d)
                    .take_while(move |&k| k < nodes),
            ),
            _ => Box::new(j + 1..nodes),
        }
    }

    pub fn pair_count(self, nodes: usize) -> u64 {
        (0..nodes).map(|j| self.partners(j, nodes).count() as u64).sum()
    }
}

impl FromStr for PairPolicy {
    type Err = SpectraError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(PairPolicy::All),
            "dyadic" => Ok(PairPolicy::Dyadic),
            "auto" => Ok(PairPolicy::Auto),
            other => Err(SpectraError::InvalidArgument { name: "pair_policy", reason: format!("unknown policy `{other}`") }),
        }
    }
}

/// Supremum of a pair functional, with the lexicographically smallest
/// maximizing pair.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PairMax {
    value: f64,
    pair: (usize, usize),
    count: u64,
}

impl PairMax {
    fn merge(self, other: PairMax) -> PairMax {
        let count = self.count + other.count;
        let better = other.value > self.value || (other.value == self.value && other.pair < self.pair);
        if better {
            PairMax { count, ..other }
        } else {
            PairMax { count, ..self }
        }
    }
}

fn pair_sup<F>(nodes: usize, policy: PairPolicy, f: F) -> PairMax
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let empty = PairMax { value: f64::NEG_INFINITY, pair: (usize::MAX, usize::MAX), count: 0 };
    (0..nodes)
        .into_par_iter()
        .map(|j| {
            policy
                .partners(j, nodes)
                .map(|k| PairMax { value: f(j, k), pair: (j, k), count: 1 })
                .fold(empty, PairMax::merge)
        })
        .reduce(|| empty, PairMax::merge)
}

fn holder_quotient(dv: f64, dt: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        dv / dt
    } else {
        dv / dt.powf(alpha)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(SpectraError::InvalidArgument { name: "alpha", reason: format!("{alpha} is outside (0, 1]") });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderCertificate {
    pub alpha: f64,
    /// Max of `|λ(s) − λ(t)| / |s − t|^α` over the tested pairs.
    pub constant: f64,
    pub witness: [f64; 2],
    pub pairs_tested: u64,
    pub claimed_bound: Option<f64>,
    pub passed: bool,
}

impl HolderCertificate {
    pub fn with_claimed_bound(mut self, bound: Option<f64>) -> Self {
        self.claimed_bound = bound;
        self.passed = bound.is_none_or(|b| self.constant <= b * (1.0 + BOUND_SLACK));
        self
    }
}

pub fn holder_constant(branch: &Branch, alpha: f64, policy: PairPolicy) -> Result<HolderCertificate> {
    check_alpha(alpha)?;
    if branch.len() < 2 {
        return Err(SpectraError::InvalidArgument { name: "branch", reason: "need at least two nodes".into() });
    }
    check_grid(&branch.grid)?;
    let (t, v) = (&branch.grid, &branch.values);
    let best = pair_sup(branch.len(), policy, |j, k| holder_quotient((v[k] - v[j]).abs(), t[k] - t[j], alpha));
    Ok(HolderCertificate {
        alpha,
        constant: best.value,
        witness: [t[best.pair.0], t[best.pair.1]],
        pairs_tested: best.count,
        claimed_bound: None,
        passed: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixHolder {
    /// Max of `‖A(s) − A(t)‖ / |s − t|^α` over the tested pairs.
    pub constant: f64,
    pub witness: [f64; 2],
    pub pairs_tested: u64,
}

pub fn matrix_holder_constant(family: &ParamFamily, grid: &[f64], alpha: f64, policy: PairPolicy) -> Result<MatrixHolder> {
    check_alpha(alpha)?;
    check_grid(grid)?;
    if grid.len() < 2 {
        return Err(SpectraError::InvalidArgument { name: "grid", reason: "need at least two nodes".into() });
    }
    let matrices: Vec<HermitianMatrix> = grid.par_iter().map(|&t| family.eval_at(t)).collect::<Result<_>>()?;
    let best = pair_sup(grid.len(), policy, |j, k| {
        let diff = matrices[k].sub(&matrices[j]).expect("family matrices share one dimension");
        holder_quotient(op_norm(&diff), grid[k] - grid[j], alpha)
    });
    Ok(MatrixHolder { constant: best.value, witness: [grid[best.pair.0], grid[best.pair.1]], pairs_tested: best.count })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferReport {
    /// Largest ordered-branch constant.
    pub c_ordered: f64,
    pub c_selection: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub holds: bool,
}

/// `C_selection ≤ N·C_ordered` on a shared grid.
pub fn transfer_bound(ordered: &[Branch], selection: &Branch, alpha: f64, policy: PairPolicy) -> Result<TransferReport> {
    if ordered.is_empty() {
        return Err(SpectraError::InvalidArgument { name: "ordered", reason: "no ordered branches".into() });
    }
    if ordered.iter().any(|b| b.grid != selection.grid) {
        return Err(SpectraError::InvalidArgument { name: "selection", reason: "grid differs from the ordered branches".into() });
    }
    let mut c_ordered = 0.0f64;
    for b in ordered {
        c_ordered = c_ordered.max(holder_constant(b, alpha, policy)?.constant);
    }
    let c_selection = holder_constant(selection, alpha, policy)?.constant;
    let n = ordered.len();
    Ok(TransferReport { c_ordered, c_selection, n, holds: c_selection <= n as f64 * c_ordered * (1.0 + BOUND_SLACK) })
}

/// Samples `family` on the selection's grid and checks the transfer bound.
pub fn verify_transfer_bound(family: &ParamFamily, selection: &Branch, alpha: f64) -> Result<TransferReport> {
    let samples = sample_grid(family, &selection.grid)?;
    transfer_bound(&ordered_branches(&samples)?, selection, alpha, PairPolicy::Auto)
}

/// Linear growth model `|λ′| ≤ C + C|λ|` with Gronwall rate `a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthModel {
    #[serde(rename = "C")]
    pub c: f64,
    pub a: f64,
    /// Largest grid spacing; the derivative estimates carry a bias of this order.
    pub h_max: f64,
    /// Max adjacent slope on the full grid and on every other node.
    pub lipschitz_fine: f64,
    pub lipschitz_coarse: f64,
}

impl GrowthModel {
    pub fn new(c: f64, a: f64) -> Result<Self> {
        if !(c >= 0.0 && a >= 0.0) {
            return Err(SpectraError::InvalidArgument { name: "growth", reason: "C and a must be nonnegative".into() });
        }
        Ok(Self { c, a, h_max: 0.0, lipschitz_fine: f64::NAN, lipschitz_coarse: f64::NAN })
    }
}

fn max_slope(t: &[f64], v: &[f64], stride: usize) -> f64 {
    let idx: Vec<usize> = (0..t.len()).step_by(stride).collect();
    idx.windows(2).map(|w| ((v[w[1]] - v[w[0]]) / (t[w[1]] - t[w[0]])).abs()).fold(0.0, f64::max)
}

/// `C = max_j |λ′(t_j)| / (1 + |λ(t_j)|)` with central differences inside
/// and one-sided differences at the ends; `a = C`.
///
/// Fails with `NotLipschitz` when the α = 1 quotient grows by more than
/// 25% between the every-other-node grid and the full grid.
pub fn estimate_growth_constant(branch: &Branch, interval: Option<(f64, f64)>) -> Result<GrowthModel> {
    let b = match interval {
        Some((lo, hi)) => branch.restrict(lo, hi),
        None => branch.clone(),
    };
    if b.len() < 3 {
        return Err(SpectraError::InvalidArgument { name: "branch", reason: "need at least three nodes".into() });
    }
    check_grid(&b.grid)?;
    let (t, v) = (&b.grid, &b.values);
    let m = b.len();
    let derivative = |j: usize| {
        let (lo, hi) = (j.saturating_sub(1), (j + 1).min(m - 1));
        (v[hi] - v[lo]) / (t[hi] - t[lo])
    };
    let c = (0..m).map(|j| derivative(j).abs() / (1.0 + v[j].abs())).fold(0.0, f64::max);
    let h_max = t.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let lipschitz_fine = max_slope(t, v, 1);
    let lipschitz_coarse = max_slope(t, v, 2);
    if m >= 5 && lipschitz_fine > LIPSCHITZ_REFINEMENT_RATIO * lipschitz_coarse && lipschitz_fine > 1e-12 {
        return Err(SpectraError::NotLipschitz { coarse: lipschitz_coarse, fine: lipschitz_fine });
    }
    Ok(GrowthModel { c, a: c, h_max, lipschitz_fine, lipschitz_coarse })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GronwallReport {
    /// Max over ordered pairs of `|λ(s) − λ(t)| − (1 + |λ(t)|)(e^{a|s−t|} − 1)`.
    pub max_violation: f64,
    /// The `(s, t)` attaining it.
    pub witness: [f64; 2],
    /// `max |λ|` on the grid.
    pub scale: f64,
    pub a: f64,
    pub holds: bool,
}

pub fn gronwall_check(branch: &Branch, model: &GrowthModel) -> Result<GronwallReport> {
    if branch.len() < 2 {
        return Err(SpectraError::InvalidArgument { name: "branch", reason: "need at least two nodes".into() });
    }
    check_grid(&branch.grid)?;
    let (t, v) = (&branch.grid, &branch.values);
    let m = branch.len();
    let a = model.a;
    let violation = |s: usize, r: usize| (v[s] - v[r]).abs() - (1.0 + v[r].abs()) * (a * (t[s] - t[r]).abs()).exp_m1();
    let empty = PairMax { value: f64::NEG_INFINITY, pair: (usize::MAX, usize::MAX), count: 0 };
    let best = (0..m)
        .into_par_iter()
        .map(|s| {
            (0..m)
                .filter(|&r| r != s)
                .map(|r| PairMax { value: violation(s, r), pair: (s, r), count: 1 })
                .fold(empty, PairMax::merge)
        })
        .reduce(|| empty, PairMax::merge);
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(GronwallReport {
        max_violation: best.value,
        witness: [t[best.pair.0], t[best.pair.1]],
        scale,
        a,
        holds: best.value <= BOUND_SLACK * (1.0 + scale),
    })
}

//! Sampling one-parameter families, ordered branches `μ_1 ≤ … ≤ μ_N`,
//! crossing detection and continuous eigenvalue selections through crossings.
//!
//! A continuous selection is a chain of ordered branches: it stays on one
//! ordered index until that index meets a neighbour, then may continue on the
//! neighbour. On a grid only the bracketing nodes of a meeting are visible, so
//! switch points are recorded at grid nodes.

use std::collections::BTreeSet;
use std::io::{self, Write};
use std::ops::Range;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SpectraError};
use crate::family::{uniform_grid, ParamFamily};
use crate::hermitian::{eig_ordered, HermitianMatrix};
use crate::projector::{contour_projector_adaptive, default_contour, project_block, Contour, ProjectorDiagnostics};

/// Relative tolerance for switch and crossing detection: `1e-6·(1 + scale)`.
pub const DEFAULT_REL_TOL: f64 = 1e-6;

/// Ordered eigenvalues of `A(t)` at one grid node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSample {
    pub t: f64,
    pub values: Vec<f64>,
    /// Smallest consecutive gap; infinite for 1×1 matrices.
    pub gap_floor: f64,
}

impl EigenSample {
    pub fn from_matrix(t: f64, a: &HermitianMatrix) -> Self {
        Self::from_values(t, eig_ordered(a).values)
    }

    pub fn from_values(t: f64, values: Vec<f64>) -> Self {
        let gap_floor = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        Self { t, values, gap_floor }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(SpectraError::InvalidArgument { name: "grid", reason: "empty grid".into() });
    }
    for (i, w) in grid.windows(2).enumerate() {
        if !(w[0] < w[1]) {
            return Err(SpectraError::DegenerateGrid { index: i + 1 });
        }
    }
    Ok(())
}

/// One eigendecomposition per node, computed independently and returned in
/// grid order.
pub fn sample_grid(family: &ParamFamily, grid: &[f64]) -> Result<Vec<EigenSample>> {
    if family.param_dim() != 1 {
        return Err(SpectraError::DimensionMismatch { expected: 1, found: family.param_dim() });
    }
    check_grid(grid)?;
    grid.par_iter()
        .map(|&t| family.eval_at(t).map(|a| EigenSample::from_matrix(t, &a)))
        .collect()
}

/// Largest `|μ|` over all samples.
pub fn spectral_scale(samples: &[EigenSample]) -> f64 {
    samples
        .iter()
        .flat_map(|s| s.values.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

fn check_uniform(samples: &[EigenSample]) -> Result<usize> {
    let n = samples.first().map(EigenSample::dim).unwrap_or(0);
    if n == 0 {
        return Err(SpectraError::InvalidArgument { name: "samples", reason: "no samples".into() });
    }
    if let Some(bad) = samples.iter().find(|s| s.dim() != n) {
        return Err(SpectraError::DimensionMismatch { expected: n, found: bad.dim() });
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SwitchPoint {
    /// First node on the new index.
    pub node: usize,
    pub from: usize,
    pub to: usize,
}

/// An eigenvalue selection over a grid. Indices are 0-based ordered indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub indices: Vec<usize>,
    pub switch_points: Vec<SwitchPoint>,
}

impl Branch {
    /// A branch with no ordered-index bookkeeping, e.g. a sampled function.
    pub fn from_samples(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(SpectraError::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        let indices = vec![0; grid.len()];
        Ok(Self { grid, values, indices, switch_points: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Worst excess of a grid step over `c·Δt^α + 2·tol_eig`; non-positive
    /// when the branch is continuous at grid scale.
    pub fn continuity_excess(&self, c: f64, alpha: f64, tol_eig: f64) -> f64 {
        (1..self.len())
            .map(|j| {
                let step = (self.values[j] - self.values[j - 1]).abs();
                step - (c * (self.grid[j] - self.grid[j - 1]).powf(alpha) + 2.0 * tol_eig)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Restriction to the nodes with `lo <= t <= hi`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Branch {
        let keep: Vec<usize> = (0..self.len()).filter(|&j| lo <= self.grid[j] && self.grid[j] <= hi).collect();
        let first = keep.first().copied().unwrap_or(0);
        let last = keep.last().copied().unwrap_or(0);
        Branch {
            grid: keep.iter().map(|&j| self.grid[j]).collect(),
            values: keep.iter().map(|&j| self.values[j]).collect(),
            indices: keep.iter().map(|&j| self.indices[j]).collect(),
            switch_points: self
                .switch_points
                .iter()
                .filter(|sp| sp.node > first && sp.node <= last)
                .map(|sp| SwitchPoint { node: sp.node - first, ..*sp })
                .collect(),
        }
    }
}

/// Branch `i` follows ordered index `i` at every node.
pub fn ordered_branches(samples: &[EigenSample]) -> Result<Vec<Branch>> {
    let n = check_uniform(samples)?;
    let grid: Vec<f64> = samples.iter().map(|s| s.t).collect();
    Ok((0..n)
        .map(|i| Branch {
            grid: grid.clone(),
            values: samples.iter().map(|s| s.values[i]).collect(),
            indices: vec![i; samples.len()],
            switch_points: Vec::new(),
        })
        .collect())
}

/// Ordered pair `(i, i+1)` meeting somewhere in `[t_lo, t_hi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingEvent {
    pub t_lo: f64,
    pub t_hi: f64,
    pub node_lo: usize,
    pub node_hi: usize,
    /// 0-based lower ordered index; the pair is `(pair, pair + 1)`.
    pub pair: usize,
    /// Smallest observed or secant-extrapolated gap over the bracket.
    pub min_gap: f64,
    /// Whether some node in the bracket already has gap ≤ tolerance.
    pub at_node: bool,
}

/// Gap estimate inside bracket `(j, j+1)` from the secants on either side:
/// a transversal crossing makes the gap V-shaped, and the two secants meet at
/// its vertex.
fn secant_vertex(t: &[f64], g: &[f64], j: usize) -> Option<f64> {
    if j == 0 || j + 2 >= t.len() {
        return None;
    }
    let left = (g[j] - g[j - 1]) / (t[j] - t[j - 1]);
    let right = (g[j + 2] - g[j + 1]) / (t[j + 2] - t[j + 1]);
    if !(left < 0.0 && right > 0.0) {
        return None;
    }
    let vertex_t = (g[j + 1] - right * t[j + 1] - g[j] + left * t[j]) / (left - right);
    if !(t[j] <= vertex_t && vertex_t <= t[j + 1]) {
        return None;
    }
    Some((g[j] + left * (vertex_t - t[j])).max(0.0))
}

/// Reports each maximal run of brackets on which a consecutive pair's gap
/// dips to `crossing_tol` or below, either at a node or at the secant vertex.
pub fn detect_crossings(samples: &[EigenSample], crossing_tol: f64) -> Vec<CrossingEvent> {
    let Ok(n) = check_uniform(samples) else {
        return Vec::new();
    };
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let m = samples.len();
    let mut events = Vec::new();
    for pair in 0..n.saturating_sub(1) {
        let g: Vec<f64> = samples.iter().map(|s| s.values[pair + 1] - s.values[pair]).collect();
        let mut run: Option<CrossingEvent> = None;
        for j in 0..m.saturating_sub(1) {
            let touching = g[j] <= crossing_tol || g[j + 1] <= crossing_tol;
            let vertex = secant_vertex(&t, &g, j).filter(|&v| v <= crossing_tol);
            if touching || vertex.is_some() {
                let gap = g[j].min(g[j + 1]).min(vertex.unwrap_or(f64::INFINITY)).max(0.0);
                match run.as_mut() {
                    Some(ev) => {
                        ev.node_hi = j + 1;
                        ev.t_hi = t[j + 1];
                        ev.min_gap = ev.min_gap.min(gap);
                        ev.at_node |= touching;
                    }
                    None => {
                        run = Some(CrossingEvent {
                            t_lo: t[j],
                            t_hi: t[j + 1],
                            node_lo: j,
                            node_hi: j + 1,
                            pair,
                            min_gap: gap,
                            at_node: touching,
                        })
                    }
                }
            } else if let Some(ev) = run.take() {
                events.push(ev);
            }
        }
        events.extend(run);
    }
    events.sort_by(|a, b| a.node_lo.cmp(&b.node_lo).then(a.pair.cmp(&b.pair)));
    events
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Always follow the starting ordered index.
    Ordered,
    /// Near a crossing, jump to the ordered index closest to the linear
    /// extrapolation of the last two values.
    #[default]
    Secant,
    /// As `Secant`, but fail when two distinct candidates both sit within
    /// the switch tolerance of the extrapolation.
    Strict,
}

impl FromStr for Strategy {
    type Err = SpectraError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ordered" => Ok(Strategy::Ordered),
            "secant" => Ok(Strategy::Secant),
            "strict" => Ok(Strategy::Strict),
            other => Err(SpectraError::InvalidArgument { name: "strategy", reason: format!("unknown strategy `{other}`") }),
        }
    }
}

/// Continuous selection starting on ordered index `start_index` (0-based) at
/// the first node.
pub fn continuous_selection(
    samples: &[EigenSample],
    start_index: usize,
    strategy: Strategy,
    switch_tol: f64,
) -> Result<Branch> {
    let n = check_uniform(samples)?;
    if start_index >= n {
        return Err(SpectraError::InvalidArgument {
            name: "start_index",
            reason: format!("{} is outside 1..={n}", start_index + 1),
        });
    }
    let m = samples.len();
    // brackets where the current index may meet a neighbour
    let mut near: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m.saturating_sub(1)];
    for ev in detect_crossings(samples, switch_tol) {
        for bracket in near.iter_mut().take(ev.node_hi).skip(ev.node_lo) {
            bracket.insert(ev.pair);
            bracket.insert(ev.pair + 1);
        }
    }

    let grid: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let mut current = start_index;
    let mut values = vec![samples[0].values[current]];
    let mut indices = vec![current];
    let mut switch_points = Vec::new();

    for j in 0..m.saturating_sub(1) {
        let next = &samples[j + 1].values;
        if strategy != Strategy::Ordered && near[j].contains(&current) {
            let v = values[j];
            let predicted = if j >= 1 {
                v + (v - values[j - 1]) * (grid[j + 1] - grid[j]) / (grid[j] - grid[j - 1])
            } else {
                v
            };
            let dist = |k: usize| (next[k] - predicted).abs();
            let mut best = current;
            for k in 0..n {
                if dist(k) < dist(best) {
                    best = k;
                }
            }
            if strategy == Strategy::Strict && dist(best) <= switch_tol {
                let rival = (0..n).any(|k| dist(k) <= switch_tol && (next[k] - next[best]).abs() > switch_tol);
                if rival {
                    return Err(SpectraError::AmbiguousCrossing { t_lo: grid[j], t_hi: grid[j + 1] });
                }
            }
            if best != current {
                switch_points.push(SwitchPoint { node: j + 1, from: current, to: best });
                current = best;
            }
        }
        values.push(next[current]);
        indices.push(current);
    }
    Ok(Branch { grid, values, indices, switch_points })
}

/// Inserts the midpoint of every bracket in a crossing run that no node
/// resolves, so switch points land closer to the meeting.
pub fn refine_hidden_crossings(
    family: &ParamFamily,
    samples: &[EigenSample],
    events: &[CrossingEvent],
) -> Result<Vec<EigenSample>> {
    let mut extra = BTreeSet::new();
    for ev in events.iter().filter(|ev| !ev.at_node) {
        for j in ev.node_lo..ev.node_hi {
            extra.insert(j);
        }
    }
    if extra.is_empty() {
        return Ok(samples.to_vec());
    }
    let mids: Vec<f64> = extra.iter().map(|&j| 0.5 * (samples[j].t + samples[j + 1].t)).collect();
    let new = sample_grid(family, &mids)?;
    let mut merged = Vec::with_capacity(samples.len() + new.len());
    let mut new_iter = extra.iter().zip(new).peekable();
    for (j, s) in samples.iter().enumerate() {
        merged.push(s.clone());
        if let Some((_, mid)) = new_iter.next_if(|(&k, _)| k == j) {
            merged.push(mid);
        }
    }
    Ok(merged)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackOptions {
    pub strategy: Strategy,
    /// 0-based index for the continuous selection, if one is wanted.
    pub start_index: Option<usize>,
    /// Defaults to `1e-6·(1 + scale)`.
    pub switch_tol: Option<f64>,
    /// Defaults to the switch tolerance.
    pub crossing_tol: Option<f64>,
    pub refine: bool,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self { strategy: Strategy::Secant, start_index: None, switch_tol: None, crossing_tol: None, refine: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tracking {
    pub samples: Vec<EigenSample>,
    pub ordered: Vec<Branch>,
    pub crossings: Vec<CrossingEvent>,
    pub selection: Option<Branch>,
    pub switch_tol: f64,
    pub crossing_tol: f64,
}

/// Samples, optionally refines unresolved crossings once, and builds the
/// ordered branches, crossing list and requested selection.
pub fn track(family: &ParamFamily, grid: &[f64], opts: &TrackOptions) -> Result<Tracking> {
    let mut samples = sample_grid(family, grid)?;
    let scale = spectral_scale(&samples);
    let switch_tol = opts.switch_tol.unwrap_or(DEFAULT_REL_TOL * (1.0 + scale));
    let crossing_tol = opts.crossing_tol.unwrap_or(switch_tol);
    if opts.refine {
        let events = detect_crossings(&samples, crossing_tol);
        samples = refine_hidden_crossings(family, &samples, &events)?;
    }
    let crossings = detect_crossings(&samples, crossing_tol);
    let ordered = ordered_branches(&samples)?;
    let selection = opts
        .start_index
        .map(|k| continuous_selection(&samples, k, opts.strategy, switch_tol))
        .transpose()?;
    Ok(Tracking { samples, ordered, crossings, selection, switch_tol, crossing_tol })
}

/// Block eigenvalues and projector diagnostics at one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectedSample {
    pub t: f64,
    pub diagnostics: ProjectorDiagnostics,
    pub block_eigenvalues: Vec<f64>,
}

pub fn project_at(family: &ParamFamily, t: f64, gamma: &Contour) -> Result<ProjectedSample> {
    let a = family.eval_at(t)?;
    let p = contour_projector_adaptive(&a, gamma)?;
    let block = project_block(&a, &p)?;
    Ok(ProjectedSample { t, diagnostics: p.diagnostics(), block_eigenvalues: block.eigenvalues() })
}

/// Ordered branches of the group enclosed by a fixed contour, computed from
/// the compressed blocks `Q(t)*·A(t)·Q(t)`. Fails if γ meets the spectrum or
/// the projector rank changes.
pub fn track_with_contour(family: &ParamFamily, grid: &[f64], gamma: &Contour, first_index: usize) -> Result<Vec<Branch>> {
    check_grid(grid)?;
    let projected: Vec<ProjectedSample> = grid.iter().map(|&t| project_at(family, t, gamma)).collect::<Result<_>>()?;
    let rank = projected[0].diagnostics.rank;
    if let Some(bad) = projected.iter().find(|p| p.diagnostics.rank != rank) {
        return Err(SpectraError::RankChanged { expected: rank, found: bad.diagnostics.rank, t: bad.t });
    }
    Ok((0..rank)
        .map(|i| Branch {
            grid: grid.to_vec(),
            values: projected.iter().map(|p| p.block_eigenvalues[i]).collect(),
            indices: vec![first_index + i; grid.len()],
            switch_points: Vec::new(),
        })
        .collect())
}

/// Tracks the ordered eigenvalues `group` of `A(s)` over `window` using the
/// default contour at `s`.
pub fn selection_via_projector(
    family: &ParamFamily,
    s: f64,
    window: (f64, f64),
    nodes: usize,
    group: Range<usize>,
) -> Result<Vec<Branch>> {
    let base = eig_ordered(&family.eval_at(s)?).values;
    let gamma = default_contour(&base, group.clone())?;
    let grid = uniform_grid(window.0, window.1, nodes)?;
    track_with_contour(family, &grid, &gamma, group.start)
}

/// Writes `t,value,index,switched` rows, branch-major. `index` is 1-based
/// and `switched` is 1 on the first node after a switch.
pub fn write_branches_csv<W: Write>(branches: &[Branch], mut out: W) -> io::Result<()> {
    writeln!(out, "t,value,index,switched")?;
    for b in branches {
        for j in 0..b.len() {
            let switched = b.switch_points.iter().any(|sp| sp.node == j) as u8;
            writeln!(out, "{},{},{},{}", b.grid[j], b.values[j], b.indices[j] + 1, switched)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{build_crossing_lines, build_rough_coupling, Mixer};
    use approx::assert_abs_diff_eq;

    fn lines_pm() -> ParamFamily {
        build_crossing_lines(&[1.0, -1.0], Mixer::Identity).unwrap()
    }

    #[test]
    fn sample_three_nodes() {
        let s = sample_grid(&lines_pm(), &[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(s[0].values, vec![-1.0, 1.0]);
        assert_eq!(s[1].values, vec![0.0, 0.0]);
        assert_eq!(s[2].values, vec![-1.0, 1.0]);
        assert_eq!(s[1].gap_floor, 0.0);
    }

    #[test]
    fn sample_grid_rejects_bad_grids() {
        let f = lines_pm();
        assert!(matches!(sample_grid(&f, &[0.0, 0.0]), Err(SpectraError::DegenerateGrid { index: 1 })));
        assert!(matches!(sample_grid(&f, &[0.0, 2.0]), Err(SpectraError::OutOfDomain { .. })));
    }

    #[test]
    fn constant_family_samples_identical() {
        let f = build_crossing_lines(&[0.0, 0.0, 0.0], Mixer::Seeded(1)).unwrap();
        let s = sample_grid(&f, &uniform_grid(-1.0, 1.0, 5).unwrap()).unwrap();
        for w in s.windows(2) {
            for (a, b) in w[0].values.iter().zip(&w[1].values) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn ordered_branches_of_lines() {
        let grid = uniform_grid(-1.0, 1.0, 21).unwrap();
        let s = sample_grid(&lines_pm(), &grid).unwrap();
        let b = ordered_branches(&s).unwrap();
        for j in 0..grid.len() {
            assert_abs_diff_eq!(b[0].values[j], -grid[j].abs(), epsilon = 1e-15);
            assert_abs_diff_eq!(b[1].values[j], grid[j].abs(), epsilon = 1e-15);
        }
        assert!(b.iter().all(|br| br.switch_points.is_empty()));
    }

    #[test]
    fn ordered_branches_rough() {
        let grid = uniform_grid(-1.0, 1.0, 33).unwrap();
        let s = sample_grid(&build_rough_coupling(0.5, 1.0).unwrap(), &grid).unwrap();
        let b = ordered_branches(&s).unwrap();
        for j in 0..grid.len() {
            assert_abs_diff_eq!(b[1].values[j], grid[j].abs().sqrt(), epsilon = 1e-14);
        }
    }

    #[test]
    fn one_crossing_for_two_lines() {
        let grid = uniform_grid(-1.0, 1.0, 101).unwrap();
        let s = sample_grid(&lines_pm(), &grid).unwrap();
        let ev = detect_crossings(&s, 1e-6);
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].pair, 0);
        assert!(ev[0].t_lo < 0.0 && ev[0].t_hi > 0.0);
        assert!(ev[0].at_node);
    }

    #[test]
    fn hidden_crossing_is_found_between_nodes() {
        // 100 nodes: 0 is not a node.
        let grid = uniform_grid(-1.0, 1.0, 100).unwrap();
        let s = sample_grid(&lines_pm(), &grid).unwrap();
        let ev = detect_crossings(&s, 1e-6);
        assert_eq!(ev.len(), 1);
        assert!(!ev[0].at_node);
        assert!(ev[0].t_lo < 0.0 && 0.0 < ev[0].t_hi);
        assert!(ev[0].min_gap <= 1e-12);
    }

    #[test]
    fn gapped_family_has_no_crossings() {
        let f = ParamFamily::scalar("gapped", 2, 1.0, |t| HermitianMatrix::from_diagonal(&[t, t + 1.0])).unwrap();
        let s = sample_grid(&f, &uniform_grid(-1.0, 1.0, 50).unwrap()).unwrap();
        assert!(detect_crossings(&s, 1e-6).is_empty());
    }

    #[test]
    fn three_lines_three_events() {
        let f = build_crossing_lines(&[1.0, 0.0, -1.0], Mixer::Seeded(2)).unwrap();
        let s = sample_grid(&f, &uniform_grid(-1.0, 1.0, 101).unwrap()).unwrap();
        let ev = detect_crossings(&s, 1e-6);
        assert_eq!(ev.len(), 3);
        let mut centers: Vec<f64> = ev.iter().map(|e| 0.5 * (e.t_lo + e.t_hi)).collect();
        centers.sort_by(f64::total_cmp);
        for (c, expected) in centers.iter().zip([-0.5, 0.0, 0.5]) {
            assert_abs_diff_eq!(*c, expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn selection_follows_line_through_crossing() {
        let grid = uniform_grid(-1.0, 1.0, 101).unwrap();
        let s = sample_grid(&lines_pm(), &grid).unwrap();
        let sel = continuous_selection(&s, 0, Strategy::Secant, 1e-6).unwrap();
        for j in 0..grid.len() {
            assert_abs_diff_eq!(sel.values[j], grid[j], epsilon = 1e-14);
        }
        assert_eq!(sel.switch_points.len(), 1);
        let sp = sel.switch_points[0];
        assert_eq!((sp.from, sp.to), (0, 1));
        assert!(grid[sp.node] > 0.0 && grid[sp.node - 1] >= -1e-15);
        assert_eq!(*sel.values.last().unwrap(), 1.0);

        let ord = continuous_selection(&s, 0, Strategy::Ordered, 1e-6).unwrap();
        assert!(ord.switch_points.is_empty());
    }

    #[test]
    fn selection_through_hidden_crossing() {
        let grid = uniform_grid(-1.0, 1.0, 100).unwrap();
        let s = sample_grid(&lines_pm(), &grid).unwrap();
        let sel = continuous_selection(&s, 1, Strategy::Secant, 1e-6).unwrap();
        for j in 0..grid.len() {
            assert_abs_diff_eq!(sel.values[j], -grid[j], epsilon = 1e-14);
        }
    }

    #[test]
    fn no_crossing_selection_is_ordered_branch() {
        let f = ParamFamily::scalar("gapped", 2, 1.0, |t| HermitianMatrix::from_diagonal(&[t, t + 1.0])).unwrap();
        let s = sample_grid(&f, &uniform_grid(-1.0, 1.0, 50).unwrap()).unwrap();
        let ordered = ordered_branches(&s).unwrap();
        for k in 0..2 {
            let sel = continuous_selection(&s, k, Strategy::Secant, 1e-6).unwrap();
            assert_eq!(sel, ordered[k]);
        }
    }

    #[test]
    fn three_lines_recovered() {
        let slopes = [1.0, 0.0, -1.0];
        let offsets = crate::family::default_line_offsets(&slopes);
        let f = build_crossing_lines(&slopes, Mixer::Seeded(9)).unwrap();
        let grid = uniform_grid(-1.0, 1.0, 101).unwrap();
        let s = sample_grid(&f, &grid).unwrap();
        for line in 0..3 {
            let line_at = |t: f64| slopes[line] * t + offsets[line];
            let start = s[0].values.iter().position(|v| (v - line_at(-1.0)).abs() < 1e-9).unwrap();
            let sel = continuous_selection(&s, start, Strategy::Secant, 1e-6).unwrap();
            let err = grid.iter().zip(&sel.values).map(|(t, v)| (v - line_at(*t)).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-8, "line {line}: {err}");
            assert!(sel.switch_points.len() <= 2);
        }
    }

    #[test]
    fn strict_refuses_ambiguity() {
        // At t = 3 the extrapolation lands at 0 and both candidates ±0.6e-6
        // sit within the tolerance while differing by more than it.
        let s: Vec<EigenSample> = [3.0, 2.0, 1.0, 0.6, 2.0]
            .iter()
            .enumerate()
            .map(|(j, &h)| EigenSample::from_values(j as f64, vec![-h * 1e-6, h * 1e-6]))
            .collect();
        let r = continuous_selection(&s, 0, Strategy::Strict, 1e-6);
        assert!(matches!(r, Err(SpectraError::AmbiguousCrossing { .. })));
        assert!(continuous_selection(&s, 0, Strategy::Secant, 1e-6).is_ok());
        assert!(continuous_selection(&s, 2, Strategy::Secant, 1e-6).is_err());
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("secant".parse::<Strategy>().unwrap(), Strategy::Secant);
        assert!("greedy".parse::<Strategy>().is_err());
    }

    #[test]
    fn refinement_inserts_midpoints_of_hidden_crossings() {
        let f = lines_pm();
        let grid = uniform_grid(-1.0, 1.0, 10).unwrap();
        let s = sample_grid(&f, &grid).unwrap();
        let ev = detect_crossings(&s, 1e-6);
        let refined = refine_hidden_crossings(&f, &s, &ev).unwrap();
        assert_eq!(refined.len(), 11);
        assert!(refined.windows(2).all(|w| w[0].t < w[1].t));
        assert!(refined.iter().any(|x| x.t.abs() < 1e-15));

        // Crossing on a node: nothing to refine.
        let s = sample_grid(&f, &uniform_grid(-1.0, 1.0, 11).unwrap()).unwrap();
        let ev = detect_crossings(&s, 1e-6);
        assert_eq!(refine_hidden_crossings(&f, &s, &ev).unwrap().len(), 11);
    }

    #[test]
    fn projector_tracks_shift_family() {
        let f = ParamFamily::scalar("shift", 3, 1.0, |t| HermitianMatrix::from_diagonal(&[1.0 + t, 2.0 + t, 3.0 + t]))
            .unwrap();
        let b = selection_via_projector(&f, 0.0, (-0.2, 0.2), 9, 0..1).unwrap();
        assert_eq!(b.len(), 1);
        for (t, v) in b[0].grid.iter().zip(&b[0].values) {
            assert_abs_diff_eq!(*v, 1.0 + t, epsilon = 1e-10);
        }
    }

    #[test]
    fn projector_window_too_wide() {
        let f = ParamFamily::scalar("split", 2, 1.0, |t| HermitianMatrix::from_diagonal(&[0.0, 1.0 - t])).unwrap();
        // radius 0.45 around 0: the second eigenvalue meets γ at t = 0.55.
        assert!(selection_via_projector(&f, 0.0, (0.0, 0.5), 11, 0..1).is_ok());
        let err = selection_via_projector(&f, 0.0, (0.0, 0.6), 13, 0..1).unwrap_err();
        assert!(matches!(err, SpectraError::ContourHitsSpectrum { .. }), "{err:?}");
    }

    #[test]
    fn csv_format() {
        let grid = uniform_grid(-1.0, 1.0, 3).unwrap();
        let s = sample_grid(&lines_pm(), &grid).unwrap();
        let sel = continuous_selection(&s, 0, Strategy::Secant, 1e-6).unwrap();
        let mut out = Vec::new();
        write_branches_csv(&[sel], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "t,value,index,switched\n-1,-1,1,0\n0,0,1,0\n1,1,2,1\n");
    }

    #[test]
    fn restrict_keeps_switches() {
        let grid = uniform_grid(-1.0, 1.0, 101).unwrap();
        let s = sample_grid(&lines_pm(), &grid).unwrap();
        let sel = continuous_selection(&s, 0, Strategy::Secant, 1e-6).unwrap();
        let r = sel.restrict(-0.5, 0.5);
        assert_eq!(r.len(), 51);
        assert_eq!(r.switch_points.len(), 1);
        assert_eq!(r.indices[r.switch_points[0].node], 1);
    }
}

//! Epoch grids, per-epoch rate fields, and branch–epoch occupancy.
//!
//! A grid of `M` calendar times `w_1 > w_2 > … > w_M` (values decrease into
//! the past) splits time into `M + 1` epochs: epoch 0 is `[w_1, ∞)` toward
//! the present, epoch `e` is `[w_{e+1}, w_e)` for interior `e`, and the last
//! epoch is `(-∞, w_M)`. The occupancy matrix records how long each branch
//! spends in each epoch, so the expected substitutions on branch `i` are the
//! sparse product `b_i = Σ_e U[i][e] · θ_e`, and `∂b_i/∂θ_e = U[i][e]`.

use crate::error::{Error, Result};
use crate::tree::TimeTree;

const MIN_GRID_GAP: f64 = 1e-12;

/// Strictly decreasing calendar grid points plus the effective present used
/// to define the first epoch's midpoint.
#[derive(Debug, Clone)]
pub struct EpochGrid {
    /// `points[0] = w_1` is the most recent grid time.
    points: Vec<f64>,
    present: f64,
    midpoint_gaps: Vec<f64>,
}

impl EpochGrid {
    /// Build a grid from calendar times sorted in decreasing order.
    ///
    /// `present` is the effective present (normally the most recent sampling
    /// time); it must not precede the first grid point.
    pub fn new(points: Vec<f64>, present: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("grid needs at least one point".into()));
        }
        if points.iter().any(|p| !p.is_finite()) || !present.is_finite() {
            return Err(Error::InvalidParameter("grid times must be finite".into()));
        }
        for w in points.windows(2) {
            if !(w[0] - w[1] > MIN_GRID_GAP) {
                return Err(Error::InvalidParameter(format!(
                    "grid points must strictly decrease (gap > {MIN_GRID_GAP}); got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if present < points[0] {
            return Err(Error::InvalidParameter(format!(
                "effective present {present} precedes the most recent grid point {}",
                points[0]
            )));
        }

        let midpoint_gaps = compute_midpoint_gaps(&points, present)?;
        Ok(Self {
            points,
            present,
            midpoint_gaps,
        })
    }

    /// Build a grid by concatenating equal-spacing segments. Each segment
    /// contributes `count` points from `newest` down to `oldest` inclusive;
    /// duplicate joint points between segments are merged.
    pub fn from_segments(segments: &[(usize, f64, f64)], present: f64) -> Result<Self> {
        let mut points: Vec<f64> = Vec::new();
        for &(count, oldest, newest) in segments {
            if count == 0 {
                return Err(Error::InvalidParameter("segment count must be ≥ 1".into()));
            }
            if count == 1 {
                points.push(newest);
                continue;
            }
            if !(newest > oldest) {
                return Err(Error::InvalidParameter(format!(
                    "segment newest {newest} must exceed oldest {oldest}"
                )));
            }
            let step = (newest - oldest) / (count - 1) as f64;
            for k in 0..count {
                points.push(newest - k as f64 * step);
            }
        }
        points.sort_by(|a, b| b.partial_cmp(a).unwrap());
        points.dedup_by(|a, b| (*a - *b).abs() <= MIN_GRID_GAP);
        Self::new(points, present)
    }

    /// Number of grid points, `M`.
    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    /// Number of epochs, `M + 1`.
    pub fn n_epochs(&self) -> usize {
        self.points.len() + 1
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn present(&self) -> f64 {
        self.present
    }

    /// Lower (older) bound of an epoch; `-∞` for the last epoch.
    pub fn epoch_lower(&self, epoch: usize) -> f64 {
        if epoch < self.points.len() {
            self.points[epoch]
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Upper (younger) bound of an epoch; `+∞` for epoch 0.
    pub fn epoch_upper(&self, epoch: usize) -> f64 {
        if epoch == 0 {
            f64::INFINITY
        } else {
            self.points[epoch - 1]
        }
    }

    /// Epoch containing calendar time `t` under the half-open convention:
    /// a time exactly on a grid point belongs to the younger-side epoch
    /// whose lower bound it is.
    pub fn epoch_of(&self, t: f64) -> usize {
        // Number of grid points strictly greater than t.
        self.points.partition_point(|&p| p > t)
    }

    /// Midpoint of an epoch. Epoch 0 uses the effective present as its upper
    /// bound; the unbounded last epoch mirrors the width of its neighbor.
    pub fn epoch_midpoint(&self, epoch: usize) -> f64 {
        let m = self.points.len();
        if epoch == 0 {
            0.5 * (self.present + self.points[0])
        } else if epoch < m {
            0.5 * (self.points[epoch] + self.points[epoch - 1])
        } else {
            let prev = if m >= 2 { self.points[m - 2] } else { self.present };
            self.points[m - 1] - 0.5 * (prev - self.points[m - 1])
        }
    }

    /// Distances between consecutive epoch midpoints, length `M`.
    /// Entry `e` is the gap between epochs `e` and `e + 1`.
    pub fn midpoint_gaps(&self) -> &[f64] {
        &self.midpoint_gaps
    }
}

fn compute_midpoint_gaps(points: &[f64], present: f64) -> Result<Vec<f64>> {
    let m = points.len();
    let midpoint = |epoch: usize| -> f64 {
        if epoch == 0 {
            0.5 * (present + points[0])
        } else if epoch < m {
            0.5 * (points[epoch] + points[epoch - 1])
        } else {
            let prev = if m >= 2 { points[m - 2] } else { present };
            points[m - 1] - 0.5 * (prev - points[m - 1])
        }
    };
    let mut gaps = Vec::with_capacity(m);
    for e in 0..m {
        let d = midpoint(e) - midpoint(e + 1);
        if !(d > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "degenerate grid: midpoint gap {d} between epochs {e} and {} is not positive",
                e + 1
            )));
        }
        gaps.push(d);
    }
    Ok(gaps)
}

/// Per-epoch log rates `ζ` with derived rates `θ = exp(ζ)`.
#[derive(Debug, Clone)]
pub struct RateField {
    zeta: Vec<f64>,
}

impl RateField {
    pub fn from_log_rates(zeta: Vec<f64>) -> Result<Self> {
        if zeta.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidParameter("log rates must be finite".into()));
        }
        Ok(Self { zeta })
    }

    pub fn from_rates(theta: &[f64]) -> Result<Self> {
        if theta.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
            return Err(Error::InvalidParameter("rates must be strictly positive".into()));
        }
        Ok(Self {
            zeta: theta.iter().map(|t| t.ln()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.zeta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeta.is_empty()
    }

    pub fn log_rates(&self) -> &[f64] {
        &self.zeta
    }

    pub fn rates(&self) -> Vec<f64> {
        self.zeta.iter().map(|z| z.exp()).collect()
    }
}

/// Sparse branch × epoch matrix of time durations, in CSR form.
///
/// Row `i` belongs to the branch above node `i` (the root has no row). This
/// matrix is also the exact Jacobian `∂b/∂θ`, since `b = U·θ` is linear.
#[derive(Debug, Clone)]
pub struct OccupancyMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl OccupancyMatrix {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Nonzero (epoch, duration) pairs for one branch.
    pub fn row(&self, branch: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_offsets[branch];
        let hi = self.row_offsets[branch + 1];
        self.cols[lo..hi]
            .iter()
            .copied()
            .zip(self.vals[lo..hi].iter().copied())
    }

    pub fn entry(&self, branch: usize, epoch: usize) -> f64 {
        self.row(branch)
            .find(|&(e, _)| e == epoch)
            .map_or(0.0, |(_, v)| v)
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// The Jacobian of the branch integrals with respect to the epoch rates
    /// is the occupancy matrix itself.
    pub fn jacobian(&self) -> &OccupancyMatrix {
        self
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n_cols]; self.n_rows];
        for i in 0..self.n_rows {
            for (e, v) in self.row(i) {
                dense[i][e] = v;
            }
        }
        dense
    }

    /// `out[e] = Σ_i U[i][e] · g[i]` (transpose-vector product).
    pub fn transpose_mul_into(&self, g: &[f64], out: &mut [f64]) -> Result<()> {
        if g.len() != self.n_rows || out.len() != self.n_cols {
            return Err(Error::DimensionMismatch(format!(
                "occupancy is {}×{}, got vectors of {} and {}",
                self.n_rows,
                self.n_cols,
                g.len(),
                out.len()
            )));
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n_rows {
            let gi = g[i];
            for (e, v) in self.row(i) {
                out[e] += v * gi;
            }
        }
        Ok(())
    }
}

/// Compute branch–epoch occupancy for a tree over a grid.
///
/// The grid need not span the tree: the unbounded last epoch absorbs all
/// deeper time. Every (branch, epoch) entry is the exact length of the
/// intersection of the branch's time interval with the epoch interval;
/// zero-length intersections are not stored.
pub fn build_occupancy(tree: &TimeTree, grid: &EpochGrid) -> OccupancyMatrix {
    let n_rows = tree.branch_count();
    let n_cols = grid.n_epochs();
    let mut row_offsets = Vec::with_capacity(n_rows + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_offsets.push(0);

    for branch in 0..n_rows {
        let child_time = tree.time(branch);
        let parent_time = tree.time(tree.parent(branch).expect("non-root node"));
        let first = grid.epoch_of(child_time);
        let last = grid.epoch_of(parent_time);
        for epoch in first..=last {
            let upper = grid.epoch_upper(epoch).min(child_time);
            let lower = grid.epoch_lower(epoch).max(parent_time);
            let duration = upper - lower;
            if duration > 0.0 {
                cols.push(epoch);
                vals.push(duration);
            }
        }
        row_offsets.push(cols.len());
    }

    OccupancyMatrix {
        n_rows,
        n_cols,
        row_offsets,
        cols,
        vals,
    }
}

/// Expected substitutions per branch: `b = U·θ`.
pub fn branch_integrals(occ: &OccupancyMatrix, field: &RateField) -> Result<Vec<f64>> {
    let theta = field.rates();
    let mut out = vec![0.0; occ.n_rows()];
    branch_integrals_into(occ, &theta, &mut out)?;
    Ok(out)
}

/// As [`branch_integrals`], with rates already exponentiated and a
/// caller-owned output buffer.
pub fn branch_integrals_into(occ: &OccupancyMatrix, theta: &[f64], out: &mut [f64]) -> Result<()> {
    if theta.len() != occ.n_cols() || out.len() != occ.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "occupancy is {}×{}, got {} rates and {} outputs",
            occ.n_rows(),
            occ.n_cols(),
            theta.len(),
            out.len()
        )));
    }
    for i in 0..occ.n_rows() {
        let mut acc = 0.0;
        for (e, v) in occ.row(i) {
            acc += v * theta[e];
        }
        out[i] = acc;
    }
    Ok(())
}

//! The gamma-SUP clusterer: every data point starts as a cluster
//! representative; each sweep replaces all representatives simultaneously by
//! compactly weighted averages of the previous generation (blurring). The
//! nonblurring variant keeps the data fixed and moves candidate centers only.

use crate::matrix::{dist2, DataMatrix};
use crate::qcore::{weight, TuningParams};
use crate::{Error, Result};
use rayon::prelude::*;

/// Convergence and extraction knobs around the tuning pair.
///
/// `conv_eps` and `merge_eps` are expressed in units of tau (the update runs
/// on points scaled by 1/tau).
#[derive(Debug, Clone, Copy)]
pub struct GammaSupConfig {
    pub params: TuningParams,
    pub conv_eps: f64,
    pub merge_eps: f64,
    pub max_iter: usize,
}

pub const DEFAULT_CONV_EPS: f64 = 1e-8;
pub const DEFAULT_MERGE_EPS: f64 = 1e-4;
pub const DEFAULT_MAX_ITER: usize = 1000;

impl GammaSupConfig {
    pub fn new(params: TuningParams) -> Self {
        Self {
            params,
            conv_eps: DEFAULT_CONV_EPS,
            merge_eps: DEFAULT_MERGE_EPS,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn with_conv_eps(mut self, conv_eps: f64) -> Self {
        self.conv_eps = conv_eps;
        self
    }

    pub fn with_merge_eps(mut self, merge_eps: f64) -> Self {
        self.merge_eps = merge_eps;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.conv_eps > 0.0) {
            return Err(Error::domain("conv_eps must be > 0"));
        }
        if self.merge_eps < self.conv_eps {
            return Err(Error::domain("merge_eps must be >= conv_eps"));
        }
        if self.max_iter == 0 {
            return Err(Error::domain("max_iter must be >= 1"));
        }
        Ok(())
    }
}

/// Outcome of a clustering run.
#[derive(Debug, Clone)]
pub struct ClusterResult {
    /// Per-point cluster id in 0..K, ordered by lexicographic center.
    pub labels: Vec<usize>,
    /// K cluster centers in data units.
    pub centers: DataMatrix,
    /// Per-cluster member counts; sums to n.
    pub sizes: Vec<usize>,
    /// Sweeps executed.
    pub iterations: usize,
    /// False when the iteration cap was hit first.
    pub converged: bool,
    /// Per-sweep snapshots of the representatives (data units), if requested.
    pub trajectory: Option<Vec<DataMatrix>>,
}

impl ClusterResult {
    pub fn k(&self) -> usize {
        self.sizes.len()
    }
}

fn check_input(data: &DataMatrix) -> Result<()> {
    if data.n_rows() == 0 {
        return Err(Error::domain("need at least one data point"));
    }
    if let Some(row) = data.first_non_finite_row() {
        return Err(Error::NonFinite(row));
    }
    Ok(())
}

fn row_norms(m: &DataMatrix) -> Vec<f64> {
    m.rows()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect()
}

/// One blurring sweep: z_i = sum_j w_ij m_j / sum_j w_ij with
/// w_ij = weight(||m_i - m_j||^2) on the scaled points, all rows computed
/// from the immutable previous generation (Jacobi order).
///
/// Rows run in parallel; each row accumulates j in ascending index order, so
/// the result is identical for any worker count. Pairs whose norm gap
/// already puts them outside the zero-weight cutoff are skipped before the
/// distance computation; skipped terms are exactly zero, so the output is
/// bit-identical with or without the pruning. Returns the largest
/// per-point displacement.
fn blurring_sweep(cur: &DataMatrix, next: &mut DataMatrix, unit: TuningParams) -> f64 {
    let p = cur.n_cols();
    let norms = row_norms(cur);
    let cutoff2 = 1.0 / unit.s; // weight is zero at squared distance >= 1/s
    next.as_mut_slice()
        .par_chunks_mut(p)
        .enumerate()
        .map(|(i, out)| {
            let xi = cur.row(i);
            let ni = norms[i];
            let mut den = 0.0;
            out.fill(0.0);
            for (j, xj) in cur.rows().enumerate() {
                let gap = ni - norms[j];
                if gap * gap >= cutoff2 {
                    continue;
                }
                let w = weight(dist2(xi, xj), unit);
                if w > 0.0 {
                    den += w;
                    for (o, v) in out.iter_mut().zip(xj) {
                        *o += w * v;
                    }
                }
            }
            for o in out.iter_mut() {
                *o /= den;
            }
            dist2(out, xi).sqrt()
        })
        .reduce(|| 0.0, f64::max)
}

/// One nonblurring sweep: representatives move, the scaled data stays fixed.
/// A representative whose influence ball contains no data point stays put.
fn nonblurring_sweep(
    reps: &DataMatrix,
    next: &mut DataMatrix,
    data_scaled: &DataMatrix,
    data_norms: &[f64],
    unit: TuningParams,
) -> f64 {
    let p = reps.n_cols();
    let rep_norms = row_norms(reps);
    let cutoff2 = 1.0 / unit.s;
    next.as_mut_slice()
        .par_chunks_mut(p)
        .enumerate()
        .map(|(i, out)| {
            let ri = reps.row(i);
            let ni = rep_norms[i];
            let mut den = 0.0;
            out.fill(0.0);
            for (j, xj) in data_scaled.rows().enumerate() {
                let gap = ni - data_norms[j];
                if gap * gap >= cutoff2 {
                    continue;
                }
                let w = weight(dist2(ri, xj), unit);
                if w > 0.0 {
                    den += w;
                    for (o, v) in out.iter_mut().zip(xj) {
                        *o += w * v;
                    }
                }
            }
            if den > 0.0 {
                for o in out.iter_mut() {
                    *o /= den;
                }
            } else {
                out.copy_from_slice(ri);
            }
            dist2(out, ri).sqrt()
        })
        .reduce(|| 0.0, f64::max)
}

#[cfg(debug_assertions)]
fn assert_hull_contraction(cur: &DataMatrix, next: &DataMatrix) {
    for c in 0..cur.n_cols() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for row in cur.rows() {
            lo = lo.min(row[c]);
            hi = hi.max(row[c]);
        }
        let slack = (hi - lo).abs() * 1e-12 + 1e-15;
        for row in next.rows() {
            debug_assert!(
                row[c] >= lo - slack && row[c] <= hi + slack,
                "sweep escaped the previous hull on column {c}"
            );
        }
    }
}

/// Single-linkage grouping of final representatives at radius `eps`;
/// returns (cluster id per point, cluster member lists).
fn merge_points(pts: &DataMatrix, eps: f64) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = pts.n_rows();
    let eps2 = eps * eps;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if dist2(pts.row(i), pts.row(j)) < eps2 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of_root = vec![usize::MAX; n];
    let mut labels = vec![0usize; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if group_of_root[r] == usize::MAX {
            group_of_root[r] = groups.len();
            groups.push(Vec::new());
        }
        labels[i] = group_of_root[r];
        groups[group_of_root[r]].push(i);
    }
    (labels, groups)
}

/// Order clusters by lexicographic center so ids are intrinsic to the
/// geometry, not to the input row order.
fn canonical_result(
    final_scaled: &DataMatrix,
    tau: f64,
    merge_eps: f64,
    iterations: usize,
    converged: bool,
    trajectory: Option<Vec<DataMatrix>>,
) -> ClusterResult {
    let (raw_labels, groups) = merge_points(final_scaled, merge_eps);
    let p = final_scaled.n_cols();
    let mut centers: Vec<Vec<f64>> = groups
        .iter()
        .map(|members| {
            let mut c = vec![0.0; p];
            for &i in members {
                for (acc, v) in c.iter_mut().zip(final_scaled.row(i)) {
                    *acc += v;
                }
            }
            for acc in &mut c {
                *acc = tau * *acc / members.len() as f64;
            }
            c
        })
        .collect();
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&a, &b| {
        centers[a]
            .partial_cmp(&centers[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut rank = vec![0usize; groups.len()];
    for (new_id, &old_id) in order.iter().enumerate() {
        rank[old_id] = new_id;
    }
    let labels: Vec<usize> = raw_labels.iter().map(|&g| rank[g]).collect();
    let mut sizes = vec![0usize; groups.len()];
    for &l in &labels {
        sizes[l] += 1;
    }
    centers = order.iter().map(|&old| centers[old].clone()).collect();
    let centers = DataMatrix::from_rows(&centers).expect("centers are rectangular");
    ClusterResult {
        labels,
        centers,
        sizes,
        iterations,
        converged,
        trajectory,
    }
}

fn run_blurring(
    data: &DataMatrix,
    config: &GammaSupConfig,
    trace: bool,
) -> Result<ClusterResult> {
    config.validate()?;
    check_input(data)?;
    let tau = config.params.tau;
    let unit = TuningParams::new(config.params.s, 1.0)?;
    let n = data.n_rows();
    let p = data.n_cols();

    let mut cur = DataMatrix::zeros(n, p);
    for (i, row) in data.rows().enumerate() {
        for (o, v) in cur.row_mut(i).iter_mut().zip(row) {
            *o = v / tau;
        }
    }
    let mut next = DataMatrix::zeros(n, p);
    let mut trajectory: Option<Vec<DataMatrix>> = trace.then(Vec::new);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        let max_disp = blurring_sweep(&cur, &mut next, unit);
        iterations += 1;
        #[cfg(debug_assertions)]
        assert_hull_contraction(&cur, &next);
        std::mem::swap(&mut cur, &mut next);
        if let Some(t) = trajectory.as_mut() {
            let mut snap = cur.clone();
            snap.as_mut_slice().iter_mut().for_each(|v| *v *= tau);
            t.push(snap);
        }
        if max_disp < config.conv_eps {
            converged = true;
            break;
        }
    }
    Ok(canonical_result(
        &cur,
        tau,
        config.merge_eps,
        iterations,
        converged,
        trajectory,
    ))
}

/// Blurring gamma-SUP (the main clusterer).
///
/// Representatives start at x_i / tau, every sweep updates all of them
/// simultaneously from the previous generation, and the run stops when the
/// largest displacement falls below `conv_eps` or at `max_iter` (reported
/// through `converged`, not an error). Final representatives within
/// `merge_eps` of each other (transitively) form one cluster; centers are
/// tau times the mean of each merged group.
pub fn gamma_sup(data: &DataMatrix, config: &GammaSupConfig) -> Result<ClusterResult> {
    run_blurring(data, config, false)
}

/// Same as [`gamma_sup`] but records the representative positions after
/// every sweep (in data units).
pub fn gamma_sup_traced(data: &DataMatrix, config: &GammaSupConfig) -> Result<ClusterResult> {
    run_blurring(data, config, true)
}

/// Nonblurring gamma-estimator: identical initialization and output
/// contract, but each representative is updated against the fixed original
/// data rather than the previous generation of representatives.
pub fn gamma_nonblurring(data: &DataMatrix, config: &GammaSupConfig) -> Result<ClusterResult> {
    config.validate()?;
    check_input(data)?;
    let tau = config.params.tau;
    let unit = TuningParams::new(config.params.s, 1.0)?;
    let n = data.n_rows();
    let p = data.n_cols();

    let mut scaled = DataMatrix::zeros(n, p);
    for (i, row) in data.rows().enumerate() {
        for (o, v) in scaled.row_mut(i).iter_mut().zip(row) {
            *o = v / tau;
        }
    }
    let mut reps = scaled.clone();
    let mut next = DataMatrix::zeros(n, p);
    let data_norms = row_norms(&scaled);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        let max_disp = nonblurring_sweep(&reps, &mut next, &scaled, &data_norms, unit);
        iterations += 1;
        std::mem::swap(&mut reps, &mut next);
        if max_disp < config.conv_eps {
            converged = true;
            break;
        }
    }
    Ok(canonical_result(
        &reps,
        tau,
        config.merge_eps,
        iterations,
        converged,
        None,
    ))
}

/// gamma-SUP followed by recursive 2-means bisection (deterministic
/// farthest-pair initialization) of every cluster whose size exceeds
/// `size_threshold`; encodes prior knowledge of the expected cluster size.
///
/// The `seed` is threaded through for interface uniformity; the bisection
/// itself is deterministic.
pub fn gamma_sup_plus(
    data: &DataMatrix,
    config: &GammaSupConfig,
    size_threshold: usize,
    seed: u64,
) -> Result<ClusterResult> {
    if size_threshold < 2 {
        return Err(Error::domain("size_threshold must be >= 2"));
    }
    let _ = seed;
    let base = gamma_sup(data, config)?;
    let p = data.n_cols();

    // (member indices, center, splittable)
    let mut clusters: Vec<(Vec<usize>, Vec<f64>, bool)> = Vec::new();
    for (id, size) in base.sizes.iter().enumerate() {
        let members: Vec<usize> = base
            .labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == id)
            .map(|(i, _)| i)
            .collect();
        debug_assert_eq!(members.len(), *size);
        clusters.push((members, base.centers.row(id).to_vec(), true));
    }

    loop {
        let Some(pos) = clusters
            .iter()
            .position(|(m, _, splittable)| *splittable && m.len() > size_threshold)
        else {
            break;
        };
        let (members, _, _) = clusters.remove(pos);
        match crate::baselines::bisect_two_means(data, &members) {
            Some((left, right, c_left, c_right)) => {
                clusters.push((left, c_left, true));
                clusters.push((right, c_right, true));
            }
            None => {
                // all points coincide; keep as-is and stop retrying
                let mut c = vec![0.0; p];
                for &i in &members {
                    for (acc, v) in c.iter_mut().zip(data.row(i)) {
                        *acc += v;
                    }
                }
                for acc in &mut c {
                    *acc /= members.len() as f64;
                }
                clusters.push((members, c, false));
            }
        }
    }

    clusters.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let mut labels = vec![0usize; data.n_rows()];
    let mut sizes = Vec::with_capacity(clusters.len());
    let mut centers = Vec::with_capacity(clusters.len());
    for (id, (members, center, _)) in clusters.iter().enumerate() {
        for &i in members {
            labels[i] = id;
        }
        sizes.push(members.len());
        centers.push(center.clone());
    }
    Ok(ClusterResult {
        labels,
        centers: DataMatrix::from_rows(&centers).expect("centers are rectangular"),
        sizes,
        iterations: base.iterations,
        converged: base.converged,
        trajectory: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(s: f64, tau: f64) -> GammaSupConfig {
        GammaSupConfig::new(TuningParams::new(s, tau).unwrap())
    }

    #[test]
    fn far_pair_stays_singletons() {
        // d > tau/sqrt(s): zero mutual weight, nobody moves
        let data = DataMatrix::from_rows(&[vec![0.0], vec![10.0]]).unwrap();
        let cfg = config(0.25, 1.0); // influence radius 2
        let res = gamma_sup(&data, &cfg).unwrap();
        assert_eq!(res.k(), 2);
        assert_eq!(res.iterations, 1);
        assert!(res.converged);
        assert_eq!(res.centers.row(0), &[0.0]);
        assert_eq!(res.centers.row(1), &[10.0]);
    }

    #[test]
    fn close_pair_merges_at_midpoint() {
        let d = 0.1;
        let data = DataMatrix::from_rows(&[vec![0.0], vec![d]]).unwrap();
        let cfg = config(0.025, 1.0);
        let res = gamma_sup(&data, &cfg).unwrap();
        assert_eq!(res.k(), 1);
        assert!((res.centers.row(0)[0] - d / 2.0).abs() < 1e-9);
        assert_eq!(res.sizes, vec![2]);
    }

    #[test]
    fn nonblurring_single_point_and_pair() {
        let one = DataMatrix::from_rows(&[vec![3.0, 4.0]]).unwrap();
        let res = gamma_nonblurring(&one, &config(0.025, 1.0)).unwrap();
        assert_eq!(res.k(), 1);
        assert_eq!(res.iterations, 1);
        assert_eq!(res.centers.row(0), &[3.0, 4.0]);

        let d = 0.3;
        let pair = DataMatrix::from_rows(&[vec![0.0], vec![d]]).unwrap();
        let res = gamma_nonblurring(&pair, &config(0.025, 1.0)).unwrap();
        assert_eq!(res.k(), 1);
        assert!((res.centers.row(0)[0] - d / 2.0).abs() < 1e-7);
    }

    #[test]
    fn max_iter_flagged_not_error() {
        let data = DataMatrix::from_rows(&[vec![0.0], vec![0.5], vec![1.1]]).unwrap();
        let cfg = config(0.025, 1.0).with_max_iter(1);
        let res = gamma_sup(&data, &cfg).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations, 1);
    }

    #[test]
    fn rejects_non_finite() {
        let data = DataMatrix::from_rows(&[vec![f64::NAN]]).unwrap();
        assert!(gamma_sup(&data, &config(0.025, 1.0)).is_err());
    }

    #[test]
    fn plus_is_noop_below_threshold() {
        let data = DataMatrix::from_rows(&[vec![0.0], vec![0.05], vec![5.0]]).unwrap();
        let cfg = config(0.025, 1.0);
        let base = gamma_sup(&data, &cfg).unwrap();
        let plus = gamma_sup_plus(&data, &cfg, 10, 0).unwrap();
        assert_eq!(base.labels, plus.labels);
        assert_eq!(base.sizes, plus.sizes);
    }

    #[test]
    fn plus_splits_merged_blobs() {
        // two separable 1-D blobs of 40 points each, tau large enough that
        // gamma-SUP merges everything; threshold 70 forces one bisection
        let mut rows = Vec::new();
        for i in 0..40 {
            rows.push(vec![0.0 + 0.001 * i as f64]);
        }
        for i in 0..40 {
            rows.push(vec![10.0 + 0.001 * i as f64]);
        }
        let data = DataMatrix::from_rows(&rows).unwrap();
        let cfg = config(0.025, 100.0);
        let base = gamma_sup(&data, &cfg).unwrap();
        assert_eq!(base.k(), 1);
        let plus = gamma_sup_plus(&data, &cfg, 70, 0).unwrap();
        assert_eq!(plus.k(), 2);
        assert_eq!(plus.sizes, vec![40, 40]);
        // the split matches the blob partition
        for i in 0..40 {
            assert_eq!(plus.labels[i], plus.labels[0]);
            assert_eq!(plus.labels[40 + i], plus.labels[40]);
        }
        assert_ne!(plus.labels[0], plus.labels[40]);
    }
}

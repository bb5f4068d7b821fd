//! Comparison clusterers: Lloyd k-means with random restarts, the bisecting
//! k-means+ protocol with small-cluster dismissal, and gap-statistic
//! selection of the cluster count.

use crate::gammasup::ClusterResult;
use crate::matrix::{dist2, DataMatrix};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy)]
pub struct KMeansConfig {
    /// Target cluster count.
    pub k: usize,
    /// Random restarts; the best run by within-cluster sum of squares wins.
    pub n_init: usize,
    /// Lloyd iteration cap per restart.
    pub max_iter: usize,
    pub seed: u64,
    /// Minimum cluster size before dismissal (k-means+ only).
    pub dismiss_threshold: usize,
}

pub const DEFAULT_N_INIT: usize = 10;
pub const DEFAULT_DISMISS: usize = 30;

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            n_init: DEFAULT_N_INIT,
            max_iter: 300,
            seed,
            dismiss_threshold: DEFAULT_DISMISS,
        }
    }

    pub fn with_n_init(mut self, n_init: usize) -> Self {
        self.n_init = n_init;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_dismiss_threshold(mut self, t: usize) -> Self {
        self.dismiss_threshold = t;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.n_init == 0 || self.dismiss_threshold == 0 {
            return Err(Error::domain(
                "k, n_init and dismiss_threshold must be >= 1",
            ));
        }
        if self.k > n {
            return Err(Error::TooFewPoints { k: self.k, n });
        }
        Ok(())
    }
}

/// Row order independent of input permutation: indices sorted by row content.
fn canonical_order(data: &DataMatrix) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..data.n_rows()).collect();
    idx.sort_by(|&a, &b| {
        data.row(a)
            .partial_cmp(data.row(b))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    idx
}

fn assign(data: &DataMatrix, centers: &[Vec<f64>], labels: &mut [usize]) {
    labels
        .par_iter_mut()
        .enumerate()
        .for_each(|(i, l): (usize, &mut usize)| {
            let row = data.row(i);
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = dist2(row, center);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            *l = best;
        });
}

fn wcss(data: &DataMatrix, centers: &[Vec<f64>], labels: &[usize]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| dist2(data.row(i), &centers[l]))
        .sum()
}

fn lloyd(
    data: &DataMatrix,
    mut centers: Vec<Vec<f64>>,
    max_iter: usize,
) -> (Vec<usize>, Vec<Vec<f64>>, f64, usize, bool) {
    let n = data.n_rows();
    let p = data.n_cols();
    let k = centers.len();
    let mut labels = vec![0usize; n];
    let mut prev_wcss = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..max_iter {
        let old = labels.clone();
        assign(data, &centers, &mut labels);
        iterations += 1;
        let cur_wcss = wcss(data, &centers, &labels);
        debug_assert!(
            cur_wcss <= prev_wcss * (1.0 + 1e-12) + 1e-12,
            "Lloyd WCSS increased: {prev_wcss} -> {cur_wcss}"
        );
        prev_wcss = cur_wcss;
        if labels == old && iterations > 1 {
            converged = true;
            break;
        }
        // means of assigned points
        let mut counts = vec![0usize; k];
        let mut sums = vec![vec![0.0; p]; k];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            for (acc, v) in sums[l].iter_mut().zip(data.row(i)) {
                *acc += v;
            }
        }
        for (c, count) in counts.iter().enumerate() {
            if *count > 0 {
                for v in sums[c].iter_mut() {
                    *v /= *count as f64;
                }
                centers[c] = sums[c].clone();
            }
        }
        // repair empty clusters from the farthest points
        let mut taken: Vec<usize> = Vec::new();
        for c in 0..k {
            if counts[c] == 0 {
                let mut far_i = usize::MAX;
                let mut far_d = -1.0;
                for i in 0..n {
                    if taken.contains(&i) {
                        continue;
                    }
                    let d = dist2(data.row(i), &centers[labels[i]]);
                    if d > far_d {
                        far_d = d;
                        far_i = i;
                    }
                }
                centers[c] = data.row(far_i).to_vec();
                taken.push(far_i);
                prev_wcss = f64::INFINITY;
            }
        }
    }
    let final_wcss = wcss(data, &centers, &labels);
    (labels, centers, final_wcss, iterations, converged)
}

/// Sort cluster ids by lexicographic center (ids intrinsic to geometry).
fn canonicalize(
    data: &DataMatrix,
    labels: Vec<usize>,
    centers: Vec<Vec<f64>>,
    iterations: usize,
    converged: bool,
) -> ClusterResult {
    let k = centers.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        centers[a]
            .partial_cmp(&centers[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut rank = vec![0usize; k];
    for (new_id, &old) in order.iter().enumerate() {
        rank[old] = new_id;
    }
    let labels: Vec<usize> = labels.into_iter().map(|l| rank[l]).collect();
    let centers: Vec<Vec<f64>> = order.iter().map(|&o| centers[o].clone()).collect();
    let mut sizes = vec![0usize; k];
    for &l in &labels {
        sizes[l] += 1;
    }
    let _ = data;
    ClusterResult {
        labels,
        centers: DataMatrix::from_rows(&centers).expect("rectangular"),
        sizes,
        iterations,
        converged,
        trajectory: None,
    }
}

/// Lloyd k-means, best of `n_init` seeded restarts by WCSS.
///
/// Initial centers are k distinct rows drawn uniformly; the draw happens in
/// a canonical row order so a permuted input yields the same center set.
/// Empty clusters are repaired by reseeding from the farthest point.
pub fn kmeans(data: &DataMatrix, config: &KMeansConfig) -> Result<ClusterResult> {
    config.validate(data.n_rows())?;
    if let Some(row) = data.first_non_finite_row() {
        return Err(Error::NonFinite(row));
    }
    let order = canonical_order(data);
    let n = data.n_rows();

    let runs: Vec<(f64, usize, Vec<usize>, Vec<Vec<f64>>, usize, bool)> = (0..config.n_init)
        .into_par_iter()
        .map(|r| {
            let sub_seed = config
                .seed
                .wrapping_add((r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut rng = ChaCha12Rng::seed_from_u64(sub_seed);
            let picks = rand::seq::index::sample(&mut rng, n, config.k);
            let centers: Vec<Vec<f64>> = picks.iter().map(|i| data.row(order[i]).to_vec()).collect();
            let (labels, centers, w, iters, conv) = lloyd(data, centers, config.max_iter);
            (w, r, labels, centers, iters, conv)
        })
        .collect();

    let best = runs
        .into_iter()
        .min_by(|a, b| {
            (a.0, a.1)
                .partial_cmp(&(b.0, b.1))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("n_init >= 1");
    let (_, _, labels, centers, iters, conv) = best;
    Ok(canonicalize(data, labels, centers, iters, conv))
}

/// Deterministic 2-means on a member subset: initialized at the two points
/// farthest apart, Lloyd until stable. Returns None when all points
/// coincide (nothing to split).
#[allow(clippy::type_complexity)]
pub fn bisect_two_means(
    data: &DataMatrix,
    members: &[usize],
) -> Option<(Vec<usize>, Vec<usize>, Vec<f64>, Vec<f64>)> {
    if members.len() < 2 {
        return None;
    }
    let (mut ai, mut bi, mut best) = (0usize, 0usize, -1.0);
    for (u, &i) in members.iter().enumerate() {
        for &j in &members[u + 1..] {
            let d = dist2(data.row(i), data.row(j));
            if d > best {
                best = d;
                ai = i;
                bi = j;
            }
        }
    }
    if best <= 0.0 {
        return None;
    }
    let sub = data.select_rows(members);
    let centers = vec![data.row(ai).to_vec(), data.row(bi).to_vec()];
    let (labels, centers, _, _, _) = lloyd(&sub, centers, 100);
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (u, &l) in labels.iter().enumerate() {
        if l == 0 {
            left.push(members[u]);
        } else {
            right.push(members[u]);
        }
    }
    if left.is_empty() || right.is_empty() {
        return None;
    }
    Some((left, right, centers[0].clone(), centers[1].clone()))
}

/// Bisecting k-means+ (Euclidean CL2D protocol): start from one cluster,
/// repeatedly bisect the largest until k clusters exist; clusters smaller
/// than `dismiss_threshold` are dismissed (their points reassigned to the
/// nearest surviving center at the end) and the largest cluster is split to
/// restore the count. Ends with exactly k clusters, or fewer when the data
/// cannot support k.
pub fn kmeans_plus(data: &DataMatrix, config: &KMeansConfig) -> Result<ClusterResult> {
    config.validate(data.n_rows())?;
    if let Some(row) = data.first_non_finite_row() {
        return Err(Error::NonFinite(row));
    }
    let n = data.n_rows();
    let mut clusters: Vec<Vec<usize>> = vec![(0..n).collect()];
    let mut dismissed: Vec<usize> = Vec::new();

    let split_largest = |clusters: &mut Vec<Vec<usize>>| -> bool {
        let Some(pos) = (0..clusters.len()).max_by_key(|&i| clusters[i].len()) else {
            return false;
        };
        match bisect_two_means(data, &clusters[pos]) {
            Some((left, right, _, _)) => {
                clusters.remove(pos);
                clusters.push(left);
                clusters.push(right);
                true
            }
            None => false,
        }
    };

    loop {
        // dismiss undersized clusters; each dismissal triggers one split of
        // the largest to restore the count (never dismiss the last cluster)
        let mut stalled = false;
        while let Some(pos) = clusters
            .iter()
            .position(|c| c.len() < config.dismiss_threshold)
        {
            if clusters.len() == 1 {
                break;
            }
            dismissed.extend(clusters.remove(pos));
            if !split_largest(&mut clusters) {
                stalled = true;
                break;
            }
        }
        if stalled || clusters.len() >= config.k {
            break;
        }
        if !split_largest(&mut clusters) {
            break;
        }
    }

    let p = data.n_cols();
    let centers: Vec<Vec<f64>> = clusters
        .iter()
        .map(|members| {
            let mut c = vec![0.0; p];
            for &i in members {
                for (acc, v) in c.iter_mut().zip(data.row(i)) {
                    *acc += v;
                }
            }
            for acc in &mut c {
                *acc /= members.len() as f64;
            }
            c
        })
        .collect();

    let mut labels = vec![0usize; n];
    for (id, members) in clusters.iter().enumerate() {
        for &i in members {
            labels[i] = id;
        }
    }
    for &i in &dismissed {
        let row = data.row(i);
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (c, center) in centers.iter().enumerate() {
            let d = dist2(row, center);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        labels[i] = best;
    }
    Ok(canonicalize(data, labels, centers, 0, true))
}

/// Gap-statistic output: the selected K plus the per-K audit trail.
#[derive(Debug, Clone)]
pub struct GapResult {
    pub selected_k: usize,
    /// gap(K) = mean_b log W*_Kb - log W_K, indexed by K-1.
    pub gaps: Vec<f64>,
    /// Standard errors sd_K sqrt(1 + 1/B), indexed by K-1.
    pub se: Vec<f64>,
    pub log_w_data: Vec<f64>,
    /// log W* per reference draw, outer index K-1.
    pub log_w_refs: Vec<Vec<f64>>,
}

/// Uniform-reference gap statistic with the one-standard-error rule:
/// selects the smallest K with gap(K) >= gap(K+1) - se(K+1).
pub fn gap_statistic(
    data: &DataMatrix,
    k_max: usize,
    b_refs: usize,
    seed: u64,
) -> Result<GapResult> {
    if k_max == 0 || k_max > data.n_rows() {
        return Err(Error::TooFewPoints {
            k: k_max,
            n: data.n_rows(),
        });
    }
    if b_refs == 0 {
        return Err(Error::domain("b_refs must be >= 1"));
    }
    let n = data.n_rows();
    let p = data.n_cols();

    let mut lo = vec![f64::INFINITY; p];
    let mut hi = vec![f64::NEG_INFINITY; p];
    for row in data.rows() {
        for c in 0..p {
            lo[c] = lo[c].min(row[c]);
            hi[c] = hi[c].max(row[c]);
        }
    }

    let log_w = |m: &DataMatrix, k: usize, s: u64| -> Result<f64> {
        let cfg = KMeansConfig::new(k, s);
        let res = kmeans(m, &cfg)?;
        let centers: Vec<Vec<f64>> = (0..res.k()).map(|c| res.centers.row(c).to_vec()).collect();
        Ok(wcss(m, &centers, &res.labels).max(1e-300).ln())
    };

    let log_w_data: Vec<f64> = (1..=k_max)
        .map(|k| log_w(data, k, seed.wrapping_add(k as u64)))
        .collect::<Result<_>>()?;

    let refs: Vec<Vec<f64>> = (0..b_refs)
        .into_par_iter()
        .map(|b| {
            let mut rng =
                ChaCha12Rng::seed_from_u64(seed.wrapping_add(0x5851_F42D_4C95_7F2D ^ b as u64));
            let mut m = DataMatrix::zeros(n, p);
            for i in 0..n {
                let row = m.row_mut(i);
                for (c, v) in row.iter_mut().enumerate() {
                    let u: f64 = rand::Rng::random(&mut rng);
                    *v = lo[c] + u * (hi[c] - lo[c]);
                }
            }
            (1..=k_max)
                .map(|k| log_w(&m, k, seed.wrapping_add(b as u64 * 977 + k as u64)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    // transpose to per-K
    let log_w_refs: Vec<Vec<f64>> = (0..k_max)
        .map(|ki| refs.iter().map(|r| r[ki]).collect())
        .collect();

    let mut gaps = Vec::with_capacity(k_max);
    let mut se = Vec::with_capacity(k_max);
    for ki in 0..k_max {
        let mean = log_w_refs[ki].iter().sum::<f64>() / b_refs as f64;
        let var = log_w_refs[ki]
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / b_refs as f64;
        gaps.push(mean - log_w_data[ki]);
        se.push(var.sqrt() * (1.0 + 1.0 / b_refs as f64).sqrt());
    }

    let mut selected_k = k_max;
    for k in 1..k_max {
        if gaps[k - 1] >= gaps[k] - se[k] {
            selected_k = k;
            break;
        }
    }
    Ok(GapResult {
        selected_k,
        gaps,
        se,
        log_w_data,
        log_w_refs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_blobs() -> DataMatrix {
        let mut rows = Vec::new();
        for i in 0..10 {
            rows.push(vec![0.0 + 0.01 * i as f64, 0.0]);
            rows.push(vec![10.0 + 0.01 * i as f64, 0.0]);
        }
        DataMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn k_equals_one_is_grand_mean() {
        let data = two_blobs();
        let res = kmeans(&data, &KMeansConfig::new(1, 3)).unwrap();
        assert_eq!(res.k(), 1);
        let mean = data.col_means();
        for (a, b) in res.centers.row(0).iter().zip(&mean) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn k_equals_n_zero_wcss() {
        let data = DataMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let res = kmeans(&data, &KMeansConfig::new(3, 7)).unwrap();
        assert_eq!(res.k(), 3);
        assert_eq!(res.sizes, vec![1, 1, 1]);
        let centers: Vec<Vec<f64>> = (0..3).map(|c| res.centers.row(c).to_vec()).collect();
        assert_eq!(wcss(&data, &centers, &res.labels), 0.0);
    }

    #[test]
    fn separated_blobs_recovered() {
        let data = two_blobs();
        let res = kmeans(&data, &KMeansConfig::new(2, 11)).unwrap();
        // brute force over all 1-D cut points confirms the blob partition
        // is optimal, so k-means must find it with 10 restarts
        assert_eq!(res.sizes, vec![10, 10]);
        for i in 0..10 {
            assert_eq!(res.labels[2 * i], res.labels[0]);
            assert_eq!(res.labels[2 * i + 1], res.labels[1]);
        }
    }

    #[test]
    fn kmeans_rejects_k_above_n() {
        let data = DataMatrix::from_rows(&[vec![0.0]]).unwrap();
        assert!(kmeans(&data, &KMeansConfig::new(2, 0)).is_err());
    }

    #[test]
    fn kmeans_plus_equivalent_on_separable() {
        let data = two_blobs();
        let cfg = KMeansConfig::new(2, 5).with_dismiss_threshold(3);
        let a = kmeans_plus(&data, &cfg).unwrap();
        let b = kmeans(&data, &cfg).unwrap();
        assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn kmeans_plus_dismisses_small_blob() {
        // blobs of 100 / 100 / 15; threshold 30 kills the 15-point blob
        let mut rows = Vec::new();
        for i in 0..100 {
            rows.push(vec![0.0 + 0.001 * i as f64, 0.0]);
        }
        for i in 0..100 {
            rows.push(vec![20.0 + 0.001 * i as f64, 0.0]);
        }
        for i in 0..15 {
            rows.push(vec![40.0 + 0.001 * i as f64, 0.0]);
        }
        let data = DataMatrix::from_rows(&rows).unwrap();
        let cfg = KMeansConfig::new(4, 1).with_dismiss_threshold(30);
        let res = kmeans_plus(&data, &cfg).unwrap();
        assert_eq!(res.k(), 4);
        // the 15 points are attached to the nearest surviving cluster, which
        // comes from the 20-block; no cluster is made of the 40-block alone
        let right_label = res.labels[200];
        for i in 200..215 {
            assert_eq!(res.labels[i], right_label);
        }
        assert_eq!(res.sizes.iter().sum::<usize>(), 215);
    }

    #[test]
    fn kmeans_plus_k1() {
        let data = two_blobs();
        let res = kmeans_plus(&data, &KMeansConfig::new(1, 5)).unwrap();
        assert_eq!(res.k(), 1);
        let mean = data.col_means();
        for (a, b) in res.centers.row(0).iter().zip(&mean) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gap_statistic_trivial_and_blobs() {
        let data = two_blobs();
        let g = gap_statistic(&data, 1, 3, 1).unwrap();
        assert_eq!(g.selected_k, 1);
        let g = gap_statistic(&data, 5, 10, 1).unwrap();
        assert_eq!(g.selected_k, 2);
    }
}

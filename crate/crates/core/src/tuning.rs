//! Scale-parameter selection: run gamma-SUP across a tau grid, record the
//! produced cluster count K(tau), and locate the phase transition (first
//! drop below n) plus the widest post-transition plateau.

use crate::gammasup::{gamma_sup, GammaSupConfig};
use crate::matrix::{dist2, DataMatrix};
use crate::qcore::TuningParams;
use crate::{Error, Result};
use rayon::prelude::*;

/// Minimum run length of identical K counted as a plateau.
pub const PLATEAU_MIN_LEN: usize = 3;

#[derive(Debug, Clone)]
pub struct TauScanResult {
    /// Ascending tau grid.
    pub taus: Vec<f64>,
    /// K(tau) for each grid point.
    pub counts: Vec<usize>,
    /// First tau where K drops below n; absent if K = n everywhere.
    pub transition_tau: Option<f64>,
    /// Widest maximal run of constant K at or after the transition, as
    /// (start index, end index inclusive, K). Runs shorter than
    /// [`PLATEAU_MIN_LEN`] grid points do not count.
    pub plateau: Option<(usize, usize, usize)>,
    /// Left endpoint of the widest plateau, falling back to the transition
    /// tau when no plateau is long enough.
    pub recommended_tau: Option<f64>,
}

/// Logarithmic default grid: `count` points spanning 0.1 x (mean
/// nearest-neighbor distance) to 2 x (data diameter), which brackets the
/// all-singletons and single-cluster phases.
pub fn default_tau_grid(data: &DataMatrix, count: usize) -> Result<Vec<f64>> {
    let n = data.n_rows();
    if n < 2 {
        return Err(Error::domain("need >= 2 points for a tau grid"));
    }
    if count < 2 {
        return Err(Error::domain("grid needs >= 2 points"));
    }
    let mut diam2: f64 = 0.0;
    let mut nn_sum = 0.0;
    for i in 0..n {
        let mut nn2 = f64::INFINITY;
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = dist2(data.row(i), data.row(j));
            nn2 = nn2.min(d);
            diam2 = diam2.max(d);
        }
        nn_sum += nn2.sqrt();
    }
    let mean_nn = nn_sum / n as f64;
    let lo = (0.1 * mean_nn).max(1e-12);
    let hi = (2.0 * diam2.sqrt()).max(lo * 2.0);
    let ratio = (hi / lo).ln();
    Ok((0..count)
        .map(|i| lo * (ratio * i as f64 / (count - 1) as f64).exp())
        .collect())
}

/// Run gamma-SUP at each tau (per-tau jobs are independent and run in
/// parallel) and detect the transition and plateau structure.
pub fn scan_tau(
    data: &DataMatrix,
    s: f64,
    taus: &[f64],
    config: GammaSupConfig,
) -> Result<TauScanResult> {
    if taus.is_empty() {
        return Err(Error::domain("tau grid is empty"));
    }
    if taus.windows(2).any(|w| w[0] >= w[1]) || taus[0] <= 0.0 {
        return Err(Error::domain("tau grid must be ascending and positive"));
    }
    let counts: Vec<usize> = taus
        .par_iter()
        .map(|&tau| {
            let cfg = GammaSupConfig {
                params: TuningParams::new(s, tau)?,
                ..config
            };
            Ok(gamma_sup(data, &cfg)?.k())
        })
        .collect::<Result<_>>()?;

    let n = data.n_rows();
    let transition_idx = counts.iter().position(|&k| k < n);
    let transition_tau = transition_idx.map(|i| taus[i]);

    let mut plateau: Option<(usize, usize, usize)> = None;
    if let Some(start) = transition_idx {
        let mut i = start;
        while i < counts.len() {
            let mut j = i;
            while j + 1 < counts.len() && counts[j + 1] == counts[i] {
                j += 1;
            }
            let len = j - i + 1;
            if len >= PLATEAU_MIN_LEN && plateau.map_or(true, |(a, b, _)| len > b - a + 1) {
                plateau = Some((i, j, counts[i]));
            }
            i = j + 1;
        }
    }
    let recommended_tau = plateau.map(|(i, _, _)| taus[i]).or(transition_tau);
    Ok(TauScanResult {
        taus: taus.to_vec(),
        counts,
        transition_tau,
        plateau,
        recommended_tau,
    })
}

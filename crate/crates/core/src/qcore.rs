//! Scalar and density primitives: the q-exponential, the isotropic
//! q-Gaussian density with its normalizing constant, the compactly supported
//! weight function, the (gamma, q, sigma) <-> (s, tau) reparametrization, and
//! gamma-divergence diagnostics over discrete densities.

use crate::matrix::{dist2, DataMatrix};
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use statrs::function::gamma::ln_gamma;

/// Centralized scalar tolerances.
pub mod tol {
    /// |q - 1| below this is treated as the Gaussian limit branch.
    pub const Q_ONE_EPS: f64 = 1e-12;
    /// Discrete-density masses must sum to 1 within this.
    pub const MASS_SUM_EPS: f64 = 1e-12;
    /// Tuning-parameter round trips hold to this.
    pub const TUNING_ROUNDTRIP_EPS: f64 = 1e-12;
    /// Projective invariance of the gamma-cross entropy holds to this.
    pub const PROJECTIVE_EPS: f64 = 1e-10;
}

/// Deformed exponential: {1 + (1-q)u}_+^{1/(1-q)}, with exp(u) at q = 1.
///
/// Total function: defined for every real u and q, always >= 0 and
/// nondecreasing in u.
pub fn q_exp(u: f64, q: f64) -> f64 {
    if (q - 1.0).abs() < tol::Q_ONE_EPS {
        return u.exp();
    }
    let base = 1.0 + (1.0 - q) * u;
    if base <= 0.0 {
        // For q < 1 the clamp makes the function vanish; for q > 1 the
        // density formula never reaches base <= 0 on its own support, and
        // 0 is the continuous extension we use.
        0.0
    } else {
        base.powf(1.0 / (1.0 - q))
    }
}

/// Normalizing constant c_{p,q} of the p-variate q-Gaussian.
///
/// Three branches: q < 1, the q -> 1 Gaussian limit (value 1), and
/// 1 < q < 1 + 2/p. Computed in log space so large 1/(1-q) stays finite.
pub fn q_gaussian_normalizer(p: usize, q: f64) -> Result<f64> {
    if p == 0 {
        return Err(Error::domain("dimension p must be >= 1"));
    }
    let pf = p as f64;
    if q >= 1.0 + 2.0 / pf {
        return Err(Error::domain(format!(
            "q = {q} is outside q < 1 + 2/p = {}",
            1.0 + 2.0 / pf
        )));
    }
    if (q - 1.0).abs() < tol::Q_ONE_EPS {
        return Ok(1.0);
    }
    let ln_c = if q < 1.0 {
        let a = 1.0 / (1.0 - q);
        0.5 * pf * (1.0 - q).ln() + ln_gamma(1.0 + 0.5 * pf + a) - ln_gamma(1.0 + a)
    } else {
        let a = 1.0 / (q - 1.0);
        0.5 * pf * (q - 1.0).ln() + ln_gamma(a) - ln_gamma(a - 0.5 * pf)
    };
    Ok(ln_c.exp())
}

/// One isotropic q-Gaussian component: parameters (q, mu, sigma^2 I).
///
/// For q < 1 the density is exactly zero outside the ball
/// ||x - mu||^2 < 2 sigma^2 / (1 - q).
#[derive(Debug, Clone)]
pub struct QGaussian {
    q: f64,
    mu: Vec<f64>,
    sigma2: f64,
    norm: f64,
}

impl QGaussian {
    pub fn new(q: f64, mu: Vec<f64>, sigma2: f64) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::domain("mu must have dimension >= 1"));
        }
        if !(sigma2 > 0.0) {
            return Err(Error::domain("sigma2 must be > 0"));
        }
        let p = mu.len();
        let c = q_gaussian_normalizer(p, q)?;
        let sigma = sigma2.sqrt();
        let norm = c / ((2.0 * std::f64::consts::PI).sqrt().powi(p as i32) * sigma.powi(p as i32));
        Ok(Self {
            q,
            mu,
            sigma2,
            norm,
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Squared radius of the compact support ball (infinite for q >= 1).
    pub fn support_radius2(&self) -> f64 {
        if self.q < 1.0 - tol::Q_ONE_EPS {
            2.0 * self.sigma2 / (1.0 - self.q)
        } else {
            f64::INFINITY
        }
    }

    /// Density at x; exactly zero outside the support ball when q < 1.
    pub fn pdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.mu.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mu.len(),
                got: x.len(),
            });
        }
        let d2 = dist2(x, &self.mu);
        Ok(self.norm * q_exp(-d2 / (2.0 * self.sigma2), self.q))
    }

    /// n i.i.d. draws, deterministic under the seed.
    ///
    /// q < 1 uses rejection from the uniform distribution on the support
    /// ball; the Gaussian limit samples each coordinate directly; the
    /// 1 < q branch draws from the equivalent multivariate t.
    ///
    /// Requires q < 1 + 2/(p+2) so the covariance
    /// 2 sigma^2 / (2 + (p+2)(1-q)) I exists.
    pub fn sample(&self, n: usize, seed: u64) -> Result<DataMatrix> {
        let p = self.mu.len();
        let pf = p as f64;
        if self.q >= 1.0 + 2.0 / (pf + 2.0) {
            return Err(Error::domain(format!(
                "q = {} has no covariance (needs q < 1 + 2/(p+2))",
                self.q
            )));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let sigma = self.sigma2.sqrt();
        let mut out = DataMatrix::zeros(n, p);

        if (self.q - 1.0).abs() < tol::Q_ONE_EPS {
            for i in 0..n {
                let row = out.row_mut(i);
                for (k, v) in row.iter_mut().enumerate() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *v = self.mu[k] + sigma * z;
                }
            }
        } else if self.q < 1.0 {
            let radius = self.support_radius2().sqrt();
            let mut dir = vec![0.0; p];
            for i in 0..n {
                loop {
                    let mut norm2 = 0.0;
                    for d in dir.iter_mut() {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        *d = z;
                        norm2 += z * z;
                    }
                    let norm = norm2.sqrt();
                    let r = radius * rng.random::<f64>().powf(1.0 / pf);
                    let u: f64 = rng.random();
                    let d2 = r * r;
                    if u < q_exp(-d2 / (2.0 * self.sigma2), self.q) {
                        let row = out.row_mut(i);
                        for (k, v) in row.iter_mut().enumerate() {
                            *v = self.mu[k] + r * dir[k] / norm;
                        }
                        break;
                    }
                }
            }
        } else {
            // t-distribution with nu = 2/(q-1) - p and scale (p+nu)/nu sigma^2 I
            let nu = 2.0 / (self.q - 1.0) - pf;
            let chi = ChiSquared::new(nu)
                .map_err(|e| Error::domain(format!("invalid chi-squared dof: {e}")))?;
            let scale = sigma * ((pf + nu) / nu).sqrt();
            for i in 0..n {
                let w: f64 = chi.sample(&mut rng);
                let factor = scale * (nu / w).sqrt();
                let row = out.row_mut(i);
                for (k, v) in row.iter_mut().enumerate() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *v = self.mu[k] + factor * z;
                }
            }
        }
        Ok(out)
    }
}

/// The (s, tau) pair driving the self-updating weights: s > 0 is the model
/// parameter, tau > 0 the scale parameter in data units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningParams {
    pub s: f64,
    pub tau: f64,
}

impl TuningParams {
    pub fn new(s: f64, tau: f64) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::domain("s must be > 0"));
        }
        if !(tau > 0.0) {
            return Err(Error::domain("tau must be > 0"));
        }
        Ok(Self { s, tau })
    }

    /// Distance beyond which the weight is exactly zero: tau / sqrt(s).
    pub fn influence_radius(&self) -> f64 {
        self.tau / self.s.sqrt()
    }
}

/// Map (gamma, q, sigma) to the working pair (s, tau):
/// s = (1-q)/(gamma-(1-q)), tau = sigma sqrt(2/(gamma-(1-q))).
///
/// gamma <= 1-q is rejected: at equality every weight is 1 and the update
/// degenerates to the plain sample mean.
pub fn to_tuning(gamma: f64, q: f64, sigma: f64) -> Result<TuningParams> {
    if q >= 1.0 {
        return Err(Error::domain("q must be < 1"));
    }
    if !(sigma > 0.0) {
        return Err(Error::domain("sigma must be > 0"));
    }
    if gamma <= 1.0 - q {
        return Err(Error::domain(format!(
            "gamma = {gamma} must exceed 1 - q = {}",
            1.0 - q
        )));
    }
    let denom = gamma - (1.0 - q);
    TuningParams::new((1.0 - q) / denom, sigma * (2.0 / denom).sqrt())
}

/// Inverse of [`to_tuning`] for a fixed q < 1: recovers (gamma, sigma).
pub fn from_tuning(params: TuningParams, q: f64) -> Result<(f64, f64)> {
    if q >= 1.0 {
        return Err(Error::domain("q must be < 1"));
    }
    let gamma = (1.0 - q) * (1.0 + params.s) / params.s;
    let sigma = params.tau * ((1.0 - q) / (2.0 * params.s)).sqrt();
    Ok((gamma, sigma))
}

/// Self-updating weight: exp_{1-s}(-d^2/tau^2) = {1 - s d^2/tau^2}_+^{1/s}.
///
/// Equals 1 at d^2 = 0 and is exactly zero for d^2 >= tau^2/s.
pub fn weight(dist2: f64, params: TuningParams) -> f64 {
    let t = 1.0 - params.s * dist2 / (params.tau * params.tau);
    if t <= 0.0 {
        return 0.0;
    }
    let inv_s = 1.0 / params.s;
    let rounded = inv_s.round();
    // 1/s is an integer for the customary s values (s = 0.025 -> 40);
    // integer powers are exact and much cheaper than powf in the O(n^2)
    // weight evaluation of every sweep.
    if (inv_s - rounded).abs() < 1e-9 && rounded.abs() <= 128.0 {
        t.powi(rounded as i32)
    } else {
        t.powf(inv_s)
    }
}

/// Empirical density: weighted point masses on distinct support points.
#[derive(Debug, Clone)]
pub struct DiscreteDensity {
    points: Vec<Vec<f64>>,
    masses: Vec<f64>,
}

impl DiscreteDensity {
    pub fn new(points: Vec<Vec<f64>>, masses: Vec<f64>) -> Result<Self> {
        if points.len() != masses.len() {
            return Err(Error::LengthMismatch(points.len(), masses.len()));
        }
        if points.is_empty() {
            return Err(Error::domain("discrete density needs >= 1 point"));
        }
        if masses.iter().any(|&m| !(m >= 0.0)) {
            return Err(Error::domain("masses must be nonnegative"));
        }
        let sum: f64 = masses.iter().sum();
        if (sum - 1.0).abs() > tol::MASS_SUM_EPS {
            return Err(Error::domain(format!("masses sum to {sum}, not 1")));
        }
        let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::domain("duplicate support points"));
            }
        }
        Ok(Self { points, masses })
    }

    /// Point masses proportional to `weights`, normalized to sum to 1.
    pub fn from_weights(points: Vec<Vec<f64>>, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::domain("weights must have positive sum"));
        }
        let masses: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Self::new(points, masses)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }
}

/// Midpoint-rule quadrature grid over an interval or a rectangle.
#[derive(Debug, Clone)]
pub struct QuadGrid {
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl QuadGrid {
    /// Composite midpoint rule on [a, b] with n cells.
    pub fn line(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(b > a) || n == 0 {
            return Err(Error::domain("need b > a and n >= 1"));
        }
        let h = (b - a) / n as f64;
        let nodes = (0..n).map(|i| vec![a + (i as f64 + 0.5) * h]).collect();
        Ok(Self {
            nodes,
            weights: vec![h; n],
        })
    }

    /// Tensor-product midpoint rule on [ax, bx] x [ay, by] with nx x ny cells.
    pub fn plane(ax: f64, bx: f64, ay: f64, by: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(bx > ax) || !(by > ay) || nx == 0 || ny == 0 {
            return Err(Error::domain("invalid rectangle or cell count"));
        }
        let hx = (bx - ax) / nx as f64;
        let hy = (by - ay) / ny as f64;
        let mut nodes = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            let x = ax + (i as f64 + 0.5) * hx;
            for j in 0..ny {
                nodes.push(vec![x, ay + (j as f64 + 0.5) * hy]);
            }
        }
        Ok(Self {
            weights: vec![hx * hy; nodes.len()],
            nodes,
        })
    }

    /// Integrate a function over the grid.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(x))
            .sum()
    }
}

/// Gamma-cross entropy of a discrete density against a density evaluator:
/// -(1/(gamma(gamma+1))) sum_i mass_i g(x_i)^gamma / ||g||_{gamma+1}^gamma,
/// with ||g||_{gamma+1} computed by quadrature over the supplied grid.
///
/// Projective invariant: replacing g by c g (c > 0) leaves the value
/// unchanged.
pub fn gamma_cross_entropy(
    f: &DiscreteDensity,
    g: impl Fn(&[f64]) -> f64,
    gamma: f64,
    grid: &QuadGrid,
) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::domain("gamma must be > 0"));
    }
    let norm_pow = grid.integrate(|x| g(x).powf(gamma + 1.0));
    if !(norm_pow > 0.0) || !norm_pow.is_finite() {
        return Err(Error::domain(
            "g must be positive with finite (gamma+1)-norm on the grid",
        ));
    }
    let norm = norm_pow.powf(1.0 / (gamma + 1.0));
    let mut acc = 0.0;
    for (x, m) in f.points().iter().zip(f.masses()) {
        acc += m * (g(x) / norm).powf(gamma);
    }
    Ok(-acc / (gamma * (gamma + 1.0)))
}

/// Gamma-divergence D(f||g) = C(f||g) - C(f||f), where `f_eval` evaluates the
/// continuous density that `f` discretizes. Zero when g is proportional to f.
pub fn gamma_divergence(
    f: &DiscreteDensity,
    f_eval: impl Fn(&[f64]) -> f64,
    g_eval: impl Fn(&[f64]) -> f64,
    gamma: f64,
    grid: &QuadGrid,
) -> Result<f64> {
    let cg = gamma_cross_entropy(f, g_eval, gamma, grid)?;
    let cf = gamma_cross_entropy(f, f_eval, gamma, grid)?;
    Ok(cg - cf)
}

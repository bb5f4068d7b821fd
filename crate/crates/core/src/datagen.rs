//! Seeded synthetic-data generators: the 4-component planar mixture, the
//! 40-point toy set with surrounding noise, and a misaligned-image simulator
//! built from procedural ring templates.
//!
//! All generators draw from a counter-based ChaCha stream seeded with the
//! caller's 64-bit seed, so output is bit-reproducible.

use crate::matrix::DataMatrix;
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// The 4-component planar normal mixture: component 0 at the origin with
/// weight `pi0`, noise components at (c,c), (c,-2c), (-c,0) sharing the
/// remaining weight equally, all with identity covariance.
#[derive(Debug, Clone, Copy)]
pub struct MixtureSpec {
    pub c: f64,
    pub pi0: f64,
    pub n: usize,
    pub seed: u64,
}

impl MixtureSpec {
    fn validate(&self) -> Result<()> {
        // pi0 = 1 is allowed as the degenerate all-main-component case
        if !(self.pi0 > 0.0 && self.pi0 <= 1.0) {
            return Err(Error::domain("pi0 must be in (0, 1]"));
        }
        if self.n == 0 {
            return Err(Error::domain("n must be >= 1"));
        }
        Ok(())
    }

    pub fn component_means(&self) -> [[f64; 2]; 4] {
        let c = self.c;
        [[0.0, 0.0], [c, c], [c, -2.0 * c], [-c, 0.0]]
    }
}

pub fn gen_mixture(spec: &MixtureSpec) -> Result<(DataMatrix, Vec<i64>)> {
    spec.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let means = spec.component_means();
    let tail = (1.0 - spec.pi0) / 3.0;
    let mut data = DataMatrix::zeros(spec.n, 2);
    let mut labels = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let u: f64 = rng.random();
        let k = if u < spec.pi0 {
            0
        } else {
            (((u - spec.pi0) / tail) as usize).min(2) + 1
        };
        let z0: f64 = StandardNormal.sample(&mut rng);
        let z1: f64 = StandardNormal.sample(&mut rng);
        let row = data.row_mut(i);
        row[0] = means[k][0] + z0;
        row[1] = means[k][1] + z1;
        labels.push(k as i64);
    }
    Ok((data, labels))
}

/// Annulus radii for the toy example's noise points, centered at the
/// midpoint of the two cluster means.
pub const TOY_NOISE_RADII: (f64, f64) = (4.0, 6.0);
pub const TOY_CENTERS: [[f64; 2]; 2] = [[0.0, 0.0], [2.355, 2.355]];

/// 40 points: 10 + 10 from unit Gaussians at the two centers, 20 noise
/// points uniform (by area) on the surrounding annulus. Labels 0, 1 for the
/// clusters and 2 for noise.
pub fn gen_toy(seed: u64) -> (DataMatrix, Vec<i64>) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(40);
    let mut labels = Vec::with_capacity(40);
    for (k, center) in TOY_CENTERS.iter().enumerate() {
        for _ in 0..10 {
            let z0: f64 = StandardNormal.sample(&mut rng);
            let z1: f64 = StandardNormal.sample(&mut rng);
            rows.push(vec![center[0] + z0, center[1] + z1]);
            labels.push(k as i64);
        }
    }
    let mid = [
        (TOY_CENTERS[0][0] + TOY_CENTERS[1][0]) / 2.0,
        (TOY_CENTERS[0][1] + TOY_CENTERS[1][1]) / 2.0,
    ];
    let (r1, r2) = TOY_NOISE_RADII;
    for _ in 0..20 {
        let u: f64 = rng.random();
        let r = (r1 * r1 + u * (r2 * r2 - r1 * r1)).sqrt();
        let theta = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        rows.push(vec![mid[0] + r * theta.cos(), mid[1] + r * theta.sin()]);
        labels.push(2);
    }
    let data = DataMatrix::from_rows(&rows).expect("rectangular");
    (data, labels)
}

/// Misaligned-image simulation: distinct smooth templates sampled with
/// replacement, i.i.d. Gaussian pixel noise, and a fraction of images
/// rotated clockwise by an angle drawn from `rotation_angles`.
#[derive(Debug, Clone)]
pub struct ImageSimSpec {
    pub n_templates: usize,
    pub image_side: usize,
    pub n_images: usize,
    pub sigma_eps: f64,
    /// Fraction of images rotated, in [0, 1).
    pub misalign_frac: f64,
    /// Allowed clockwise rotations in degrees.
    pub rotation_angles: Vec<f64>,
    pub seed: u64,
}

/// Default rotation menu (degrees, clockwise).
pub const DEFAULT_ROTATIONS: [f64; 6] = [7.2, 14.4, 21.6, 28.8, 36.0, 43.2];

impl ImageSimSpec {
    fn validate(&self) -> Result<()> {
        if self.n_templates == 0 || self.n_images == 0 {
            return Err(Error::domain("n_templates and n_images must be >= 1"));
        }
        if self.image_side < 4 {
            return Err(Error::domain("image_side must be >= 4"));
        }
        if !(self.sigma_eps >= 0.0) {
            return Err(Error::domain("sigma_eps must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.misalign_frac) {
            return Err(Error::domain("misalign_frac must be in [0, 1)"));
        }
        if self.misalign_frac > 0.0 && self.rotation_angles.is_empty() {
            return Err(Error::domain(
                "rotation_angles must be nonempty when misalign_frac > 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ImageSim {
    /// n_images x (side * side), row-major pixels.
    pub data: DataMatrix,
    /// Aligned images carry their template id; each misaligned image is its
    /// own singleton class (ids n_templates, n_templates + 1, ...).
    pub labels: Vec<i64>,
    pub misaligned: Vec<bool>,
    /// Pixel variance of the clean sampled stack divided by sigma_eps^2.
    pub realized_snr: f64,
}

/// Angular frequencies of the template rings.
const RING_FREQS: [f64; 8] = [7.0, 8.0, 9.0, 10.0, 12.0, 13.0, 15.0, 16.0];
/// Ring radii as fractions of a 16-pixel side.
const RING_RADII_16: [f64; 8] = [3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 6.5];
const RING_WIDTH_16: f64 = 0.55;

/// Per-template ring phases. The 16 rows were tuned offline so that every
/// template pair, every rotated template against the bank, and every pair of
/// rotated templates stay weakly correlated at 16x16 resolution.
pub(crate) const RING_PHASES: [[f64; 8]; 16] = [
    [0.7222185110, 1.1954083757, 1.6454616579, 0.0355867354, 5.5728270809, 5.4465271291, 4.1277987894, 0.8483954272],
    [1.0812927661, 5.2879777109, 3.1050620536, 4.0649823282, 2.3157390228, 5.7764544330, 2.8409017626, 5.0446283097],
    [3.2516790137, 3.1154937766, 2.5670582899, 5.7775028647, 1.7246993780, 0.9943584004, 2.6523699059, 1.0271197290],
    [2.1810301365, 1.4120062310, 6.1772139771, 3.3801693396, 1.5563628845, 1.0323349366, 3.0336056576, 5.3319194859],
    [1.9391288274, 4.1614451589, 3.7069196902, 2.7316592947, 5.5543702828, 5.2483789601, 3.9700547639, 2.2786923944],
    [4.1713709551, 4.4725308656, 3.7333986800, 1.6114334311, 5.9974126654, 2.1228094352, 1.4930731227, 2.0317368988],
    [1.3567286305, 1.6823824198, 4.2337646139, 1.8244223642, 1.5482112495, 5.7311769110, 2.8759148762, 1.1958961006],
    [1.7652685934, 3.8836932087, 6.2536858172, 4.9996761150, 1.2948943107, 5.3861997253, 3.8518275661, 1.3278718680],
    [0.1800106120, 2.9392938940, 3.3787798339, 3.5938678838, 3.7887874075, 4.5581479365, 5.3506955858, 5.0863507802],
    [1.3061163635, 4.2218418422, 1.1567913764, 2.1207858313, 0.8744867254, 0.2729478460, 3.5288658917, 4.0734516649],
    [5.1227829449, 1.1925534489, 1.3674415434, 3.1444596511, 1.0803673435, 3.0799431174, 6.0465154967, 4.9011202654],
    [2.5356941024, 2.2920752359, 0.2239590362, 1.0655046755, 2.6233740294, 0.5436556176, 2.4495589786, 2.5334281314],
    [5.5959729060, 4.1094918545, 6.2623297566, 1.2880879855, 4.5228539056, 1.5606238277, 1.5299483010, 3.7772353278],
    [1.3326018075, 1.2312724727, 4.6811616941, 0.0694919487, 2.0869730978, 4.1948771098, 4.8412669075, 2.3584881843],
    [5.5302599986, 2.1927352205, 2.9062216903, 5.7013891117, 0.4637372637, 2.8718086282, 0.4560697891, 1.4301785956],
    [1.6568619038, 0.7034745206, 3.2147182418, 1.8890084774, 3.8415397264, 4.4983339542, 3.7995757591, 4.2887855676],
];

fn render_template(side: usize, phases: &[f64; 8]) -> Vec<f64> {
    let scale = side as f64 / 16.0;
    let center = (side as f64 - 1.0) / 2.0;
    let width = RING_WIDTH_16 * scale;
    let mut img = vec![0.0; side * side];
    for iy in 0..side {
        for ix in 0..side {
            let dx = ix as f64 - center;
            let dy = iy as f64 - center;
            let r = (dx * dx + dy * dy).sqrt();
            let phi = dy.atan2(dx);
            let mut v = 0.0;
            for k in 0..8 {
                let r0 = RING_RADII_16[k] * scale;
                let g = (-((r - r0) * (r - r0)) / (2.0 * width * width)).exp();
                v += g * (RING_FREQS[k] * phi + phases[k]).cos();
            }
            img[iy * side + ix] = v;
        }
    }
    img
}

/// The distinct smooth templates the simulator samples from, as flat
/// side*side pixel rows. Templates beyond the 16 tuned ones get seeded
/// random phases.
pub fn make_templates(n_templates: usize, side: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(n_templates);
    let mut rng = ChaCha12Rng::seed_from_u64(0x7e3a_11cd);
    for t in 0..n_templates {
        let phases: [f64; 8] = if t < RING_PHASES.len() {
            RING_PHASES[t]
        } else {
            std::array::from_fn(|_| rng.random::<f64>() * std::f64::consts::TAU)
        };
        out.push(render_template(side, &phases));
    }
    out
}

/// Clockwise rotation by `deg` degrees about the image center, bilinear
/// interpolation, zero fill outside the frame.
pub fn rotate_image(img: &[f64], side: usize, deg: f64) -> Vec<f64> {
    let center = (side as f64 - 1.0) / 2.0;
    let th = deg.to_radians();
    let (ct, st) = (th.cos(), th.sin());
    let mut out = vec![0.0; side * side];
    for iy in 0..side {
        for ix in 0..side {
            let dx = ix as f64 - center;
            let dy = iy as f64 - center;
            let sx = center + ct * dx - st * dy;
            let sy = center + st * dx + ct * dy;
            let x0 = sx.floor() as isize;
            let y0 = sy.floor() as isize;
            let fx = sx - x0 as f64;
            let fy = sy - y0 as f64;
            let mut acc = 0.0;
            for (yy, xx, w) in [
                (y0, x0, (1.0 - fx) * (1.0 - fy)),
                (y0, x0 + 1, fx * (1.0 - fy)),
                (y0 + 1, x0, (1.0 - fx) * fy),
                (y0 + 1, x0 + 1, fx * fy),
            ] {
                if yy >= 0 && (yy as usize) < side && xx >= 0 && (xx as usize) < side {
                    acc += w * img[yy as usize * side + xx as usize];
                }
            }
            out[iy * side + ix] = acc;
        }
    }
    out
}

/// Pixel variance of a template bank; useful for choosing sigma_eps to hit
/// a target SNR (sigma_eps = sqrt(variance / snr)).
pub fn template_bank_variance(n_templates: usize, side: usize) -> f64 {
    let temps = make_templates(n_templates, side);
    let all: Vec<f64> = temps.into_iter().flatten().collect();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    all.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / all.len() as f64
}

pub fn gen_images(spec: &ImageSimSpec) -> Result<ImageSim> {
    spec.validate()?;
    let side = spec.image_side;
    let npix = side * side;
    let templates = make_templates(spec.n_templates, side);
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);

    // 1. sample template ids with replacement
    let ids: Vec<usize> = (0..spec.n_images)
        .map(|_| rng.random_range(0..spec.n_templates))
        .collect();

    // realized SNR from the clean sampled stack
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut count = 0.0;
    for &t in &ids {
        for &v in &templates[t] {
            count += 1.0;
            let delta = v - mean;
            mean += delta / count;
            m2 += delta * (v - mean);
        }
    }
    let signal_var = m2 / count;
    let realized_snr = if spec.sigma_eps > 0.0 {
        signal_var / (spec.sigma_eps * spec.sigma_eps)
    } else {
        f64::INFINITY
    };

    // 2. noise
    let mut data = DataMatrix::zeros(spec.n_images, npix);
    for (i, &t) in ids.iter().enumerate() {
        let row = data.row_mut(i);
        for (o, &v) in row.iter_mut().zip(&templates[t]) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *o = v + spec.sigma_eps * z;
        }
    }

    // 3. rotate a misalign_frac fraction
    let n_mis = (spec.misalign_frac * spec.n_images as f64).round() as usize;
    let mut misaligned = vec![false; spec.n_images];
    let mut labels: Vec<i64> = ids.iter().map(|&t| t as i64).collect();
    if n_mis > 0 {
        let mut picks: Vec<usize> = rand::seq::index::sample(&mut rng, spec.n_images, n_mis)
            .iter()
            .collect();
        picks.sort_unstable();
        for (j, &i) in picks.iter().enumerate() {
            let angle = spec.rotation_angles[rng.random_range(0..spec.rotation_angles.len())];
            let rotated = rotate_image(data.row(i), side, angle);
            data.row_mut(i).copy_from_slice(&rotated);
            misaligned[i] = true;
            // each misaligned image is its own true class
            labels[i] = (spec.n_templates + j) as i64;
        }
    }
    Ok(ImageSim {
        data,
        labels,
        misaligned,
        realized_snr,
    })
}

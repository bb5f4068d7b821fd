//! Dimension-reduction front ends: column-space PCA on a data matrix and
//! 2-mode multilinear PCA on a stack of images, each with a deterministic
//! eigenvector sign convention (largest-magnitude entry positive).

use crate::matrix::DataMatrix;
use crate::{Error, Result};
use nalgebra::DMatrix;

fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Eigendecomposition of a symmetric matrix, eigenpairs sorted by
/// descending eigenvalue, sign-fixed columns.
fn sym_eigen_sorted(m: DMatrix<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.nrows();
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for &i in &order {
        values.push(eig.eigenvalues[i]);
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        fix_sign(&mut v);
        vectors.push(v);
    }
    (values, vectors)
}

#[derive(Debug, Clone)]
pub struct PcaResult {
    /// n x r projection onto the top-r eigenvectors.
    pub projected: DataMatrix,
    /// Fraction of total variance carried by each kept component.
    pub explained_ratios: Vec<f64>,
    /// The top-r eigenvectors as rows (r x p).
    pub components: DataMatrix,
    pub mean: Vec<f64>,
}

/// PCA of the covariance (or, with `correlation`, the correlation) matrix.
/// Columns with zero variance are left unscaled in correlation mode.
pub fn pca_fit_project(data: &DataMatrix, r: usize, correlation: bool) -> Result<PcaResult> {
    let n = data.n_rows();
    let p = data.n_cols();
    if r == 0 || r > p {
        return Err(Error::domain(format!("rank {r} not in 1..={p}")));
    }
    if n < 2 {
        return Err(Error::domain("PCA needs >= 2 rows"));
    }
    let mean = data.col_means();
    let mut centered = DMatrix::<f64>::zeros(n, p);
    for i in 0..n {
        for (j, v) in data.row(i).iter().enumerate() {
            centered[(i, j)] = v - mean[j];
        }
    }
    let mut scale = vec![1.0; p];
    if correlation {
        for j in 0..p {
            let var: f64 = (0..n).map(|i| centered[(i, j)].powi(2)).sum::<f64>() / (n - 1) as f64;
            if var > 0.0 {
                scale[j] = var.sqrt();
            }
        }
        for i in 0..n {
            for j in 0..p {
                centered[(i, j)] /= scale[j];
            }
        }
    }
    let cov = centered.transpose() * &centered / (n - 1) as f64;
    let (values, vectors) = sym_eigen_sorted(cov);
    let total: f64 = values.iter().map(|v| v.max(0.0)).sum();
    let explained_ratios: Vec<f64> = values[..r]
        .iter()
        .map(|v| if total > 0.0 { v.max(0.0) / total } else { 0.0 })
        .collect();

    let mut projected = DataMatrix::zeros(n, r);
    for i in 0..n {
        let row = projected.row_mut(i);
        for (k, comp) in vectors[..r].iter().enumerate() {
            let mut acc = 0.0;
            for j in 0..p {
                acc += centered[(i, j)] * comp[j];
            }
            row[k] = acc;
        }
    }
    let components =
        DataMatrix::from_rows(&vectors[..r].iter().cloned().collect::<Vec<_>>()).expect("shape");
    Ok(PcaResult {
        projected,
        explained_ratios,
        components,
        mean,
    })
}

/// 2-mode multilinear PCA model: orthonormal row-mode and column-mode bases
/// plus the mean image.
#[derive(Debug, Clone)]
pub struct MpcaModel {
    /// r1 x d1, rows orthonormal.
    pub left_factors: DataMatrix,
    /// r2 x d2, rows orthonormal.
    pub right_factors: DataMatrix,
    /// d1 x d2 centering term.
    pub mean_image: DataMatrix,
}

fn as_images(stack: &DataMatrix, d1: usize, d2: usize) -> Result<Vec<DMatrix<f64>>> {
    if stack.n_cols() != d1 * d2 {
        return Err(Error::Shape(format!(
            "stack rows have {} values, expected {d1}x{d2}",
            stack.n_cols()
        )));
    }
    Ok(stack
        .rows()
        .map(|row| DMatrix::from_row_slice(d1, d2, row))
        .collect())
}

fn top_vectors(m: DMatrix<f64>, r: usize) -> DMatrix<f64> {
    let d = m.nrows();
    let (_, vectors) = sym_eigen_sorted(m);
    let mut out = DMatrix::<f64>::zeros(d, r);
    for (k, v) in vectors[..r].iter().enumerate() {
        for i in 0..d {
            out[(i, k)] = v[i];
        }
    }
    out
}

impl MpcaModel {
    /// Alternating mode-covariance eigendecomposition: fix the right
    /// factors, eigendecompose the mode-1 covariance of right-projected
    /// images, keep the top r1 eigenvectors; then the symmetric mode-2
    /// step; `n_sweeps` rounds with early stop once the reconstruction
    /// error improvement falls below 1e-8 relative.
    pub fn fit(
        stack: &DataMatrix,
        d1: usize,
        d2: usize,
        r1: usize,
        r2: usize,
        n_sweeps: usize,
    ) -> Result<Self> {
        if r1 == 0 || r1 > d1 || r2 == 0 || r2 > d2 {
            return Err(Error::domain(format!(
                "ranks ({r1}, {r2}) not within (1..={d1}, 1..={d2})"
            )));
        }
        if stack.n_rows() < 2 {
            return Err(Error::domain("MPCA needs >= 2 images"));
        }
        if n_sweeps == 0 {
            return Err(Error::domain("n_sweeps must be >= 1"));
        }
        let images = as_images(stack, d1, d2)?;
        let n = images.len() as f64;
        let mut mean = DMatrix::<f64>::zeros(d1, d2);
        for img in &images {
            mean += img;
        }
        mean /= n;
        let centered: Vec<DMatrix<f64>> = images.into_iter().map(|img| img - &mean).collect();

        // initial right factors from the plain mode-2 covariance
        let mut c2 = DMatrix::<f64>::zeros(d2, d2);
        for a in &centered {
            c2 += a.transpose() * a;
        }
        let mut right = top_vectors(c2, r2); // d2 x r2
        let mut left; // d1 x r1

        let recon_err = |u: &DMatrix<f64>, v: &DMatrix<f64>| -> f64 {
            centered
                .iter()
                .map(|a| {
                    let core = u.transpose() * a * v;
                    let rec = u * core * v.transpose();
                    (a - rec).norm_squared()
                })
                .sum()
        };

        let mut prev = f64::INFINITY;
        left = DMatrix::zeros(d1, r1);
        for _ in 0..n_sweeps {
            let mut c1 = DMatrix::<f64>::zeros(d1, d1);
            for a in &centered {
                let av = a * &right;
                c1 += &av * av.transpose();
            }
            left = top_vectors(c1, r1);

            let mut c2 = DMatrix::<f64>::zeros(d2, d2);
            for a in &centered {
                let atu = a.transpose() * &left;
                c2 += &atu * atu.transpose();
            }
            right = top_vectors(c2, r2);

            let err = recon_err(&left, &right);
            debug_assert!(
                err <= prev * (1.0 + 1e-9) + 1e-9,
                "MPCA reconstruction error increased: {prev} -> {err}"
            );
            let improved = prev - err;
            prev = err;
            if improved.is_finite() && improved < 1e-8 * err.max(1.0) {
                break;
            }
        }

        let row_major = |m: &DMatrix<f64>, rows: usize, cols: usize| -> Vec<f64> {
            let mut out = Vec::with_capacity(rows * cols);
            for i in 0..rows {
                for j in 0..cols {
                    out.push(m[(i, j)]);
                }
            }
            out
        };
        // factors stored as rows: left is r1 x d1 = transpose of the d1 x r1
        // eigenvector matrix
        let left_factors = DataMatrix::from_vec(r1, d1, row_major(&left.transpose(), r1, d1))?;
        let right_factors = DataMatrix::from_vec(r2, d2, row_major(&right.transpose(), r2, d2))?;
        let mean_image = DataMatrix::from_vec(d1, d2, row_major(&mean, d1, d2))?;
        Ok(Self {
            left_factors,
            right_factors,
            mean_image,
        })
    }

    pub fn d1(&self) -> usize {
        self.left_factors.n_cols()
    }

    pub fn d2(&self) -> usize {
        self.right_factors.n_cols()
    }

    pub fn r1(&self) -> usize {
        self.left_factors.n_rows()
    }

    pub fn r2(&self) -> usize {
        self.right_factors.n_rows()
    }

    /// Project each image to its r1 x r2 core, flattened row-major:
    /// left (image - mean) right^T.
    pub fn project(&self, stack: &DataMatrix) -> Result<DataMatrix> {
        let (d1, d2) = (self.d1(), self.d2());
        let images = as_images(stack, d1, d2)?;
        let mean = DMatrix::from_row_slice(d1, d2, self.mean_image.as_slice());
        let u = DMatrix::from_row_slice(self.r1(), d1, self.left_factors.as_slice());
        let v = DMatrix::from_row_slice(self.r2(), d2, self.right_factors.as_slice());
        let mut out = DataMatrix::zeros(stack.n_rows(), self.r1() * self.r2());
        for (i, img) in images.iter().enumerate() {
            let core = &u * (img - &mean) * v.transpose();
            let row = out.row_mut(i);
            for a in 0..self.r1() {
                for b in 0..self.r2() {
                    row[a * self.r2() + b] = core[(a, b)];
                }
            }
        }
        Ok(out)
    }

    /// Total squared reconstruction error of the stack under the model.
    pub fn reconstruction_error(&self, stack: &DataMatrix) -> Result<f64> {
        let (d1, d2) = (self.d1(), self.d2());
        let images = as_images(stack, d1, d2)?;
        let mean = DMatrix::from_row_slice(d1, d2, self.mean_image.as_slice());
        let u = DMatrix::from_row_slice(self.r1(), d1, self.left_factors.as_slice());
        let v = DMatrix::from_row_slice(self.r2(), d2, self.right_factors.as_slice());
        Ok(images
            .iter()
            .map(|img| {
                let a = img - &mean;
                let rec = u.transpose() * (&u * &a * v.transpose()) * &v;
                (a - rec).norm_squared()
            })
            .sum())
    }
}

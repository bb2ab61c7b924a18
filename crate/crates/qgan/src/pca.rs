//! Principal component analysis, fitted with the in-repo Jacobi eigensolver.
//!
//! The fit always centers the data. When the sample count N is at most the
//! feature dimension D (the usual case here: a few dozen images of 784
//! pixels), the eigenproblem is solved on the N x N Gram matrix of the
//! centered rows and the eigenvectors are mapped back to feature space; the
//! nonzero spectrum is the same and the work drops from D^2 to N^2.
//! Otherwise the D x D covariance matrix is decomposed directly.

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, Matrix};
use crate::scalar::{norm, Real};
use std::fmt::Write as _;
use std::path::Path;

/// A fitted principal component model.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel<T: Real = f64> {
    mean: Vec<T>,
    /// One orthonormal component per row, in feature space.
    components: Matrix<T>,
    /// Sample variance along each component, descending.
    explained_variance: Vec<T>,
    /// Total sample variance of the training data across all directions.
    total_variance: T,
}

/// Relative floor under which a retained eigenvalue counts as rank loss.
fn rank_floor<T: Real>(largest: T) -> T {
    largest * T::epsilon() * T::of(256.0)
}

impl<T: Real> PcaModel<T> {
    /// Fit the top `n_components` principal directions of `data`
    /// (one sample per row).
    pub fn fit(data: &Matrix<T>, n_components: usize) -> Result<Self> {
        let n = data.rows();
        let d = data.cols();
        if n < 2 {
            return Err(Error::invalid("need at least 2 samples to fit a PCA"));
        }
        let cap = (n - 1).min(d);
        if n_components == 0 || n_components > cap {
            return Err(Error::invalid(format!(
                "n_components must be in 1..={cap} for {n} samples of dimension {d}, got {n_components}"
            )));
        }

        let mut mean = vec![T::zero(); d];
        for i in 0..n {
            for (m, &x) in mean.iter_mut().zip(data.row(i)) {
                *m = *m + x;
            }
        }
        let inv_n = T::one() / T::of(n as f64);
        for m in &mut mean {
            *m = *m * inv_n;
        }

        let mut centered = Matrix::zeros(n, d);
        for i in 0..n {
            for j in 0..d {
                centered[(i, j)] = data[(i, j)] - mean[j];
            }
        }

        let denom = T::of((n - 1) as f64);
        let total_variance =
            (0..n).map(|i| centered.row(i).iter().map(|&x| x * x).sum::<T>()).sum::<T>() / denom;
        if total_variance <= T::zero() {
            return Err(Error::DegenerateData(
                "training data has zero variance; all samples are identical".into(),
            ));
        }

        let (explained_variance, components) = if n <= d {
            Self::fit_gram(&centered, n_components, denom)?
        } else {
            Self::fit_covariance(&centered, n_components, denom)?
        };

        Ok(PcaModel { mean, components, explained_variance, total_variance })
    }

    fn fit_gram(centered: &Matrix<T>, k: usize, denom: T) -> Result<(Vec<T>, Matrix<T>)> {
        let n = centered.rows();
        let d = centered.cols();
        let mut gram = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let dot =
                    centered.row(i).iter().zip(centered.row(j)).map(|(&a, &b)| a * b).sum::<T>();
                gram[(i, j)] = dot;
                gram[(j, i)] = dot;
            }
        }
        let eig = jacobi_eigen(&gram)?;
        let floor = rank_floor(eig.values[0]);
        let mut variances = Vec::with_capacity(k);
        let mut components = Matrix::zeros(k, d);
        for c in 0..k {
            let lambda = eig.values[c];
            if lambda.partial_cmp(&floor) != Some(core::cmp::Ordering::Greater) {
                return Err(Error::DegenerateData(format!(
                    "data rank is below the requested {k} components"
                )));
            }
            variances.push(lambda / denom);
            // component = X^T u / sqrt(lambda), renormalized against drift
            let mut w = vec![T::zero(); d];
            for i in 0..n {
                let u_i = eig.vectors[(i, c)];
                for (wj, &x) in w.iter_mut().zip(centered.row(i)) {
                    *wj = *wj + u_i * x;
                }
            }
            let len = norm(&w);
            for (j, wj) in w.into_iter().enumerate() {
                components[(c, j)] = wj / len;
            }
        }
        Self::fix_signs(&mut components);
        Ok((variances, components))
    }

    fn fit_covariance(centered: &Matrix<T>, k: usize, denom: T) -> Result<(Vec<T>, Matrix<T>)> {
        let n = centered.rows();
        let d = centered.cols();
        let mut cov: Matrix<T> = Matrix::zeros(d, d);
        for i in 0..n {
            let row = centered.row(i);
            for a in 0..d {
                for b in a..d {
                    cov[(a, b)] = cov[(a, b)] + row[a] * row[b];
                }
            }
        }
        for a in 0..d {
            for b in a..d {
                let v = cov[(a, b)] / denom;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }
        let eig = jacobi_eigen(&cov)?;
        let floor = rank_floor(eig.values[0]);
        let mut variances = Vec::with_capacity(k);
        let mut components = Matrix::zeros(k, d);
        for c in 0..k {
            let lambda = eig.values[c];
            if lambda.partial_cmp(&floor) != Some(core::cmp::Ordering::Greater) {
                return Err(Error::DegenerateData(format!(
                    "data rank is below the requested {k} components"
                )));
            }
            variances.push(lambda);
            for j in 0..d {
                components[(c, j)] = eig.vectors[(j, c)];
            }
        }
        Self::fix_signs(&mut components);
        Ok((variances, components))
    }

    /// Flip each component so its largest-magnitude entry is positive,
    /// making fitted models reproducible.
    fn fix_signs(components: &mut Matrix<T>) {
        for c in 0..components.rows() {
            let row = components.row(c);
            let mut lead = 0;
            for (j, &x) in row.iter().enumerate() {
                if x.abs() > row[lead].abs() {
                    lead = j;
                }
            }
            if row[lead] < T::zero() {
                for x in components.row_mut(c) {
                    *x = -*x;
                }
            }
        }
    }

    pub fn n_components(&self) -> usize {
        self.components.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.components.cols()
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    /// One orthonormal component per row.
    pub fn components(&self) -> &Matrix<T> {
        &self.components
    }

    pub fn explained_variance(&self) -> &[T] {
        &self.explained_variance
    }

    pub fn total_variance(&self) -> T {
        self.total_variance
    }

    /// Fraction of the training variance the retained components capture.
    pub fn cumulative_explained_variance(&self) -> T {
        self.explained_variance.iter().copied().sum::<T>() / self.total_variance
    }

    /// Coefficients of `sample - mean` on the components.
    pub fn transform(&self, sample: &[T]) -> Result<Vec<T>> {
        if sample.len() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "sample has dimension {}, model expects {}",
                sample.len(),
                self.input_dim()
            )));
        }
        let centered: Vec<T> =
            sample.iter().zip(&self.mean).map(|(&x, &m)| x - m).collect();
        Ok(self.components.mul_vec(&centered))
    }

    /// Rebuild `mean + sum coeffs_i * component_i`. No clipping happens
    /// here; pixel clamping belongs to image export.
    pub fn inverse_transform(&self, coeffs: &[T]) -> Result<Vec<T>> {
        if coeffs.len() != self.n_components() {
            return Err(Error::DimensionMismatch(format!(
                "got {} coefficients, model has {} components",
                coeffs.len(),
                self.n_components()
            )));
        }
        let mut out = self.mean.clone();
        for (c, &w) in coeffs.iter().enumerate() {
            for (o, &comp) in out.iter_mut().zip(self.components.row(c)) {
                *o = *o + w * comp;
            }
        }
        Ok(out)
    }

    /// Serialize as a line-oriented text file. Field order: a header with
    /// the dimensions, then `mean`, each component, `explained_variance`,
    /// and `total_variance`, one labeled line each with full-precision
    /// floats.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let _ = writeln!(out, "pca-model v1");
        let _ = writeln!(out, "input_dim {}", self.input_dim());
        let _ = writeln!(out, "n_components {}", self.n_components());
        let _ = writeln!(out, "mean {}", join_floats(&self.mean));
        for c in 0..self.n_components() {
            let _ = writeln!(out, "component {} {}", c, join_floats(self.components.row(c)));
        }
        let _ = writeln!(out, "explained_variance {}", join_floats(&self.explained_variance));
        let _ = writeln!(out, "total_variance {}", format_float(self.total_variance));
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        if header != "pca-model v1" {
            return Err(Error::Format(format!("unrecognized model header {header:?}")));
        }
        let input_dim = parse_labeled_usize(lines.next(), "input_dim")?;
        let k = parse_labeled_usize(lines.next(), "n_components")?;
        let mean = parse_labeled_floats(lines.next(), "mean", input_dim)?;
        let mut components = Matrix::zeros(k, input_dim);
        for c in 0..k {
            let label = format!("component {c}");
            let row = parse_labeled_floats(lines.next(), &label, input_dim)?;
            for (j, x) in row.into_iter().enumerate() {
                components[(c, j)] = x;
            }
        }
        let explained_variance = parse_labeled_floats(lines.next(), "explained_variance", k)?;
        let total = parse_labeled_floats(lines.next(), "total_variance", 1)?;
        if lines.next().is_some() {
            return Err(Error::Format("trailing content after total_variance".into()));
        }
        Ok(PcaModel { mean, components, explained_variance, total_variance: total[0] })
    }
}

fn format_float<T: Real>(x: T) -> String {
    format!("{:e}", x.to_f64().unwrap_or(f64::NAN))
}

fn join_floats<T: Real>(xs: &[T]) -> String {
    xs.iter().map(|&x| format_float(x)).collect::<Vec<_>>().join(" ")
}

fn parse_labeled_usize(line: Option<&str>, label: &str) -> Result<usize> {
    let line = line.ok_or_else(|| Error::Format(format!("missing {label} line")))?;
    let rest = line
        .strip_prefix(label)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| Error::Format(format!("expected {label} line, got {line:?}")))?;
    rest.trim().parse().map_err(|_| Error::Format(format!("bad integer in {label} line")))
}

fn parse_labeled_floats<T: Real>(line: Option<&str>, label: &str, expect: usize) -> Result<Vec<T>> {
    let line = line.ok_or_else(|| Error::Format(format!("missing {label} line")))?;
    let rest = line
        .strip_prefix(label)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| Error::Format(format!("expected {label} line, got {line:?}")))?;
    let values: Vec<T> = rest
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map(T::of)
                .map_err(|_| Error::Format(format!("bad float {tok:?} in {label} line")))
        })
        .collect::<Result<_>>()?;
    if values.len() != expect {
        return Err(Error::Format(format!(
            "{label} line has {} values, expected {expect}",
            values.len()
        )));
    }
    Ok(values)
}

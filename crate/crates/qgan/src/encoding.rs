//! Inverse stereographic embedding of classical feature vectors onto the
//! unit sphere, and the matching de-embedding.
//!
//! A vector `u` in `R^d` maps to the point where the line from the north
//! pole of `S^d` through `(u, 0)` pierces the sphere:
//!
//! ```text
//! v_i = 2 u_i / (|u|^2 + 1)          for i < d
//! v_d = (|u|^2 - 1) / (|u|^2 + 1)
//! ```
//!
//! The map is a bijection between `R^d` and the sphere minus the north pole
//! `(0, ..., 0, 1)`; the inverse is `u_i = v_i / (1 - v_d)`. Near the pole
//! the inverse blows up, so decoding guards a small margin around it.
//!
//! Datasets are scaled by one global factor before encoding so that norms
//! sit near 1, where the embedding distorts least; the factor is fitted once
//! from the training set and stored with the run so generated samples are
//! unscaled identically.

use crate::error::{Error, Result};
use crate::scalar::{norm, Real};
use serde::{Deserialize, Serialize};

/// Margin around the north pole inside which decoding refuses to divide.
pub fn pole_epsilon<T: Real>() -> T {
    let floor = T::of(1e-9);
    let eps = T::epsilon() * T::of(8.0);
    if eps > floor {
        eps
    } else {
        floor
    }
}

/// Embed a finite vector from `R^d` onto the unit sphere in `R^{d+1}`.
/// The result is renormalized so its norm is 1 to the last bit.
pub fn si_encode<T: Real>(u: &[T]) -> Result<Vec<T>> {
    if u.is_empty() {
        return Err(Error::invalid("cannot encode an empty vector"));
    }
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("cannot encode non-finite components"));
    }
    let sq: T = u.iter().map(|&x| x * x).sum();
    let denom = sq + T::one();
    let two = T::of(2.0);
    let mut v: Vec<T> = u.iter().map(|&x| two * x / denom).collect();
    v.push((sq - T::one()) / denom);
    let n = norm(&v);
    for x in &mut v {
        *x = *x / n;
    }
    Ok(v)
}

/// Invert [`si_encode`]: project a unit vector on the sphere (minus the
/// pole neighborhood) back to the plane.
pub fn si_decode<T: Real>(v: &[T]) -> Result<Vec<T>> {
    if v.len() < 2 {
        return Err(Error::invalid("a sphere vector needs at least 2 components"));
    }
    let n = norm(v);
    if (n - T::one()).abs() > T::unit_norm_tolerance() {
        return Err(Error::NotNormalized { norm: n.to_f64().unwrap_or(f64::NAN) });
    }
    let last = v[v.len() - 1];
    let margin = T::one() - last;
    if margin < pole_epsilon() {
        return Err(Error::PoleProximity { margin: margin.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(v[..v.len() - 1].iter().map(|&x| x / margin).collect())
}

/// Which norm statistic the dataset scale is fitted against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleStatistic {
    /// Scale so the mean norm becomes 1 (the default).
    #[default]
    Mean,
    /// Scale so the largest norm becomes 1.
    Max,
    /// Scale so the median norm becomes 1.
    Median,
}

/// A global multiplicative factor applied to every vector of a dataset
/// before encoding, chosen so scaled norms sit near 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFactor<T: Real = f64> {
    scale: T,
}

impl<T: Real> ScaleFactor<T> {
    pub fn new(scale: T) -> Result<Self> {
        if !(scale.is_finite() && scale > T::zero()) {
            return Err(Error::invalid(format!("scale factor must be positive, got {scale}")));
        }
        Ok(ScaleFactor { scale })
    }

    pub fn value(&self) -> T {
        self.scale
    }

    /// Scale a plane vector into encoding range.
    pub fn apply(&self, u: &[T]) -> Vec<T> {
        u.iter().map(|&x| x * self.scale).collect()
    }

    /// Undo [`ScaleFactor::apply`] on a decoded vector.
    pub fn remove(&self, u: &[T]) -> Vec<T> {
        u.iter().map(|&x| x / self.scale).collect()
    }
}

/// Fit the dataset scale: the reciprocal of the chosen norm statistic, so
/// that statistic equals 1 after scaling.
pub fn fit_scale<T: Real>(data: &[Vec<T>], statistic: ScaleStatistic) -> Result<ScaleFactor<T>> {
    if data.is_empty() {
        return Err(Error::invalid("cannot fit a scale to an empty dataset"));
    }
    let mut norms: Vec<T> = data.iter().map(|u| norm(u)).collect();
    if norms.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("dataset contains non-finite vectors"));
    }
    let stat = match statistic {
        ScaleStatistic::Mean => norms.iter().copied().sum::<T>() / T::of(norms.len() as f64),
        ScaleStatistic::Max => norms.iter().copied().fold(T::zero(), T::max),
        ScaleStatistic::Median => {
            norms.sort_by(|a, b| a.partial_cmp(b).expect("finite norms compare"));
            let mid = norms.len() / 2;
            if norms.len() % 2 == 1 {
                norms[mid]
            } else {
                (norms[mid - 1] + norms[mid]) / T::of(2.0)
            }
        }
    };
    if stat <= T::zero() {
        return Err(Error::DegenerateData(
            "dataset norm statistic is zero; nothing to scale".into(),
        ));
    }
    ScaleFactor::new(T::one() / stat)
}

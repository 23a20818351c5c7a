//! Graded families of weighted ℓ² sequence spaces.
//!
//! A [`WeightGrading`] fixes weights `w_s(j) > 0` for levels `0 ≤ s ≤ S` and
//! coordinates `1 ≤ j ≤ N`, nondecreasing in `s`. Level `s` carries the norm
//! `(∑_j |v_j|² w_s(j)²)^{1/2}`. The same structure models both the spaces
//! `X_s` and the sequence spaces `Θ_s`; [`DualWeighting`] models their duals
//! through the pointwise reciprocal weight.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};

/// Closed-form weight family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    /// `w_s(j) = j^s`
    Power,
    /// `w_s(j) = (c·j)^s` for an integer `c ≥ 1`
    ShiftedPower { factor: u32 },
    /// `w_s(j) = e^{s·α_j}` with `α` nonnegative and nondecreasing
    Exponential { alpha: Arc<[f64]> },
}

/// A monotone family of positive weight sequences at truncation `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightGrading {
    kind: WeightKind,
    levels: usize,
    truncation: usize,
}

/// Anything that assigns a positive weight to `(level, coordinate)`.
pub trait Weighting {
    fn weight(&self, level: usize, index: usize) -> f64;
    fn max_level(&self) -> usize;
    fn truncation(&self) -> usize;

    fn check_level(&self, level: usize) -> Result<()> {
        if level > self.max_level() {
            return Err(FrameError::LevelOutOfRange { level, max: self.max_level() });
        }
        Ok(())
    }

    fn check_support(&self, v: &GradedVector) -> Result<()> {
        match v.support_len() {
            n if n > self.truncation() => Err(FrameError::CoordinateBeyondTruncation {
                index: n,
                truncation: self.truncation(),
            }),
            _ => Ok(()),
        }
    }
}

impl WeightGrading {
    pub fn new(kind: WeightKind, levels: usize, truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return Err(FrameError::InvalidGrading("truncation must be at least 1".into()));
        }
        match &kind {
            WeightKind::Power => {}
            WeightKind::ShiftedPower { factor } => {
                if *factor == 0 {
                    return Err(FrameError::InvalidGrading("shift factor must be >= 1".into()));
                }
            }
            WeightKind::Exponential { alpha } => {
                if alpha.len() < truncation {
                    return Err(FrameError::InvalidGrading(format!(
                        "α table has {} entries, truncation needs {truncation}",
                        alpha.len()
                    )));
                }
                let mut prev = 0.0;
                for (i, &a) in alpha.iter().take(truncation).enumerate() {
                    if !a.is_finite() || a < 0.0 || a < prev {
                        return Err(FrameError::InvalidGrading(format!(
                            "α must be finite, nonnegative and nondecreasing (entry {})",
                            i + 1
                        )));
                    }
                    prev = a;
                }
            }
        }
        let grading = Self { kind, levels, truncation };
        // Weights grow with both j and s, so the corner bounds everything.
        let corner = grading.weight(levels, truncation);
        if !corner.is_finite() {
            return Err(FrameError::InvalidGrading(format!(
                "weight w_{levels}({truncation}) overflows"
            )));
        }
        Ok(grading)
    }

    pub fn power(levels: usize, truncation: usize) -> Result<Self> {
        Self::new(WeightKind::Power, levels, truncation)
    }

    pub fn shifted_power(factor: u32, levels: usize, truncation: usize) -> Result<Self> {
        Self::new(WeightKind::ShiftedPower { factor }, levels, truncation)
    }

    pub fn exponential(alpha: Vec<f64>, levels: usize, truncation: usize) -> Result<Self> {
        Self::new(WeightKind::Exponential { alpha: alpha.into() }, levels, truncation)
    }

    /// Power series space weights with `α_j = log j`, i.e. rapidly decreasing sequences.
    pub fn log_exponential(levels: usize, truncation: usize) -> Result<Self> {
        let alpha = (1..=truncation).map(|j| (j as f64).ln()).collect();
        Self::exponential(alpha, levels, truncation)
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Same family with a different level budget or truncation.
    pub fn resized(&self, levels: usize, truncation: usize) -> Result<Self> {
        Self::new(self.kind.clone(), levels, truncation)
    }

    pub fn dual(&self) -> DualWeighting {
        DualWeighting { base: self.clone() }
    }

    /// `Some((c, e))` when `w_s(j) = c·j^e` for every `j`.
    pub fn power_law(&self, level: usize) -> Option<(f64, f64)> {
        match &self.kind {
            WeightKind::Power => Some((1.0, level as f64)),
            WeightKind::ShiftedPower { factor } => {
                Some(((*factor as f64).powi(level as i32), level as f64))
            }
            WeightKind::Exponential { .. } => None,
        }
    }
}

impl Weighting for WeightGrading {
    fn weight(&self, level: usize, index: usize) -> f64 {
        debug_assert!(index >= 1);
        match &self.kind {
            WeightKind::Power => (index as f64).powi(level as i32),
            WeightKind::ShiftedPower { factor } => {
                ((*factor as u64 * index as u64) as f64).powi(level as i32)
            }
            WeightKind::Exponential { alpha } => (level as f64 * alpha[index - 1]).exp(),
        }
    }

    fn max_level(&self) -> usize {
        self.levels
    }

    fn truncation(&self) -> usize {
        self.truncation
    }
}

/// Dual weighting: level `s` carries weight `1 / w_s(j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualWeighting {
    base: WeightGrading,
}

impl DualWeighting {
    pub fn base(&self) -> &WeightGrading {
        &self.base
    }

    /// The dual of the dual is the base grading.
    pub fn dual(&self) -> WeightGrading {
        self.base.clone()
    }
}

impl Weighting for DualWeighting {
    fn weight(&self, level: usize, index: usize) -> f64 {
        self.base.weight(level, index).recip()
    }

    fn max_level(&self) -> usize {
        self.base.levels
    }

    fn truncation(&self) -> usize {
        self.base.truncation
    }
}

/// A finitely supported complex coefficient sequence, indexed from 1.
///
/// Stored sparsely in increasing index order with no explicit zeros, so
/// structural equality is mathematical equality.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GradedVector {
    entries: Vec<(usize, Complex64)>,
}

impl GradedVector {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The canonical vector `e_j`.
    pub fn canonical(index: usize) -> Self {
        assert!(index >= 1, "coordinate indices are 1-based");
        Self { entries: vec![(index, Complex64::new(1.0, 0.0))] }
    }

    /// From `(index, value)` pairs; repeated indices are summed.
    pub fn from_sparse<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Complex64)>,
    {
        let mut entries: Vec<(usize, Complex64)> = Vec::new();
        for (j, z) in pairs {
            if j == 0 {
                return Err(FrameError::ZeroIndex);
            }
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(FrameError::NonFinite { index: j });
            }
            entries.push((j, z));
        }
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, Complex64)> = Vec::with_capacity(entries.len());
        for (j, z) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += z,
                _ => merged.push((j, z)),
            }
        }
        merged.retain(|e| e.1 != Complex64::new(0.0, 0.0));
        Ok(Self { entries: merged })
    }

    /// From a dense real slice, `values[0]` being coordinate 1.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_sparse(values.iter().enumerate().map(|(i, &x)| (i + 1, Complex64::new(x, 0.0))))
    }

    pub fn from_complex(values: &[Complex64]) -> Result<Self> {
        Self::from_sparse(values.iter().enumerate().map(|(i, &z)| (i + 1, z)))
    }

    pub fn get(&self, index: usize) -> Complex64 {
        match self.entries.binary_search_by_key(&index, |e| e.0) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Nonzero entries in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest index carrying a nonzero value (0 for the zero vector).
    pub fn support_len(&self) -> usize {
        self.entries.last().map_or(0, |e| e.0)
    }

    /// Dense copy of coordinates `1..=len`.
    pub fn to_dense(&self, len: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for &(j, z) in &self.entries {
            if j <= len {
                out[j - 1] = z;
            }
        }
        out
    }

    /// The prefix `v[1..=n]`.
    pub fn prefix(&self, n: usize) -> Self {
        let cut = self.entries.partition_point(|e| e.0 <= n);
        Self { entries: self.entries[..cut].to_vec() }
    }

    /// The tail `∑_{j>n} v_j e_j`.
    pub fn tail(&self, n: usize) -> Self {
        let cut = self.entries.partition_point(|e| e.0 <= n);
        Self { entries: self.entries[cut..].to_vec() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_sparse(self.entries.iter().map(|&(j, z)| (j, z * c)))
            .expect("scaling finite entries by a finite scalar")
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// `self + c·other`
    pub fn axpy(&self, c: Complex64, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            let next = match (a.peek(), b.peek()) {
                (Some(&&(i, x)), Some(&&(j, y))) if i == j => {
                    a.next();
                    b.next();
                    (i, x + c * y)
                }
                (Some(&&(i, x)), Some(&&(j, _))) if i < j => {
                    a.next();
                    (i, x)
                }
                (Some(_), Some(&&(j, y))) => {
                    b.next();
                    (j, c * y)
                }
                (Some(&&(i, x)), None) => {
                    a.next();
                    (i, x)
                }
                (None, Some(&&(j, y))) => {
                    b.next();
                    (j, c * y)
                }
                (None, None) => break,
            };
            if next.1 != Complex64::new(0.0, 0.0) {
                out.push(next);
            }
        }
        Self { entries: out }
    }

    /// Bilinear pairing `∑_j u_j v_j` (no conjugation): the action of the
    /// coefficient functional `u` on `v`.
    pub fn pair(&self, other: &Self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let (mut i, mut k) = (0, 0);
        while i < self.entries.len() && k < other.entries.len() {
            let (a, b) = (self.entries[i], other.entries[k]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => k += 1,
                std::cmp::Ordering::Equal => {
                    acc += a.1 * b.1;
                    i += 1;
                    k += 1;
                }
            }
        }
        acc
    }

    /// Largest coordinate-wise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).iter().map(|(_, z)| z.norm()).fold(0.0, f64::max)
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// `(∑ t_i²)^{1/2}` for nonnegative magnitudes, scaled against overflow.
pub(crate) fn scaled_l2<I>(magnitudes: I) -> f64
where
    I: IntoIterator<Item = f64>,
    I::IntoIter: Clone,
{
    let iter = magnitudes.into_iter();
    let peak = iter.clone().fold(0.0f64, f64::max);
    if peak == 0.0 || !peak.is_finite() {
        return peak;
    }
    let sum = compensated_sum(iter.map(|t| {
        let r = t / peak;
        r * r
    }));
    peak * sum.sqrt()
}

/// Weighted ℓ² norm at a level of any weighting.
pub fn weighted_norm<W: Weighting>(v: &GradedVector, weights: &W, level: usize) -> Result<f64> {
    weights.check_level(level)?;
    weights.check_support(v)?;
    Ok(scaled_l2(v.entries.iter().map(|&(j, z)| z.norm() * weights.weight(level, j))))
}

/// `‖v‖_s = (∑_j |v_j|² w_s(j)²)^{1/2}`.
pub fn graded_norm(v: &GradedVector, grading: &WeightGrading, level: usize) -> Result<f64> {
    weighted_norm(v, grading, level)
}

/// `(∑_j |v_j|² w_s(j)^{-2})^{1/2}`: the dual norm of the coefficient functional `v`.
pub fn dual_norm(v: &GradedVector, weighting: &DualWeighting, level: usize) -> Result<f64> {
    weighted_norm(v, weighting, level)
}

/// Standard ℓ^p norm of a finitely supported vector.
pub fn lp_norm(v: &GradedVector, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(FrameError::InvalidExponent(p));
    }
    let peak = v.iter().map(|(_, z)| z.norm()).fold(0.0f64, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(compensated_sum(v.iter().map(|(_, z)| z.norm())));
    }
    if p == 2.0 {
        return Ok(scaled_l2(v.entries.iter().map(|e| e.1.norm())));
    }
    let sum = compensated_sum(v.iter().map(|(_, z)| (z.norm() / peak).powf(p)));
    Ok(peak * sum.powf(p.recip()))
}

/// Largest prefix-to-full norm ratio `‖v[1..n]‖_s / ‖v‖_s` over the samples
/// and every cut point `n`. For weighted ℓ² spaces this is exactly 1 (the
/// full cut), i.e. the spaces are λ-BK with λ = 1.
pub fn truncation_constant(
    grading: &WeightGrading,
    level: usize,
    samples: &[GradedVector],
) -> Result<f64> {
    if samples.is_empty() {
        return Err(FrameError::Empty("truncation_constant needs at least one sample"));
    }
    grading.check_level(level)?;
    let mut lambda = 0.0f64;
    for (idx, v) in samples.iter().enumerate() {
        grading.check_support(v)?;
        if v.is_zero() {
            return Err(FrameError::ZeroVector(idx));
        }
        // Running squared prefix norms, each cut scaled by the total.
        let terms: Vec<f64> =
            v.iter().map(|(j, z)| (z.norm() * grading.weight(level, j)).powi(2)).collect();
        let total = compensated_sum(terms.iter().copied());
        let (mut acc, mut comp) = (0.0f64, 0.0f64);
        for t in &terms {
            let s = acc + t;
            comp += if acc.abs() >= t.abs() { (acc - s) + t } else { (t - s) + acc };
            acc = s;
            lambda = lambda.max(((acc + comp) / total).sqrt());
        }
    }
    Ok(lambda)
}

/// `‖target − partials[n]‖_s` for each `n`.
pub fn seminorm_tail_profile(
    target: &GradedVector,
    partials: &[GradedVector],
    grading: &WeightGrading,
    level: usize,
) -> Result<Vec<f64>> {
    if partials.is_empty() {
        return Err(FrameError::Empty("seminorm_tail_profile needs partial sums"));
    }
    partials.iter().map(|p| graded_norm(&target.sub(p), grading, level)).collect()
}

/// Prefix sums `∑_{j≤n} v_j e_j` for `n = 0..=support`.
pub fn prefix_sums(v: &GradedVector) -> Vec<GradedVector> {
    (0..=v.support_len()).map(|n| v.prefix(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn power() -> WeightGrading {
        WeightGrading::power(8, 64).unwrap()
    }

    #[test]
    fn graded_norm_examples() {
        let g = power();
        assert_eq!(graded_norm(&GradedVector::canonical(1), &g, 3).unwrap(), 1.0);
        assert_eq!(graded_norm(&GradedVector::canonical(2), &g, 2).unwrap(), 4.0);
        let v = GradedVector::from_real(&[1.0, 1.0]).unwrap();
        let n = graded_norm(&v, &g, 1).unwrap();
        assert!((n - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(graded_norm(&GradedVector::zero(), &g, 4).unwrap(), 0.0);
    }

    #[test]
    fn graded_norm_errors() {
        let g = power();
        assert_eq!(
            graded_norm(&GradedVector::canonical(1), &g, 9),
            Err(FrameError::LevelOutOfRange { level: 9, max: 8 })
        );
        assert_eq!(
            graded_norm(&GradedVector::canonical(65), &g, 0),
            Err(FrameError::CoordinateBeyondTruncation { index: 65, truncation: 64 })
        );
    }

    #[test]
    fn dual_norm_examples() {
        let d = power().dual();
        assert_eq!(dual_norm(&GradedVector::canonical(2), &d, 1).unwrap(), 0.5);
        for s in 0..=8 {
            assert_eq!(dual_norm(&GradedVector::canonical(1), &d, s).unwrap(), 1.0);
        }
        let v = GradedVector::canonical(2).add(&GradedVector::canonical(4));
        let n = dual_norm(&v, &d, 2).unwrap();
        assert!((n - 17f64.sqrt() / 16.0).abs() < 1e-15);
    }

    #[test]
    fn dual_of_dual_is_base() {
        let g = WeightGrading::shifted_power(2, 5, 32).unwrap();
        assert_eq!(g.dual().dual(), g);
    }

    #[test]
    fn lp_norm_examples() {
        let v = GradedVector::from_real(&[1.0, 1.0]).unwrap();
        assert!((lp_norm(&v, 3.0).unwrap() - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
        assert!((lp_norm(&v, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((lp_norm(&v, 1.5).unwrap() - 2f64.powf(2.0 / 3.0)).abs() < 1e-15);
        assert_eq!(lp_norm(&v, 0.5), Err(FrameError::InvalidExponent(0.5)));
    }

    #[test]
    fn truncation_constant_examples() {
        let g = power();
        assert_eq!(truncation_constant(&g, 0, &[GradedVector::canonical(1)]).unwrap(), 1.0);
        let v = GradedVector::from_real(&[1.0, 1.0]).unwrap();
        assert_eq!(truncation_constant(&g, 0, &[v]).unwrap(), 1.0);
        assert_eq!(truncation_constant(&g, 0, &[]), Err(FrameError::Empty(
            "truncation_constant needs at least one sample"
        )));
        assert_eq!(
            truncation_constant(&g, 0, &[GradedVector::canonical(3), GradedVector::zero()]),
            Err(FrameError::ZeroVector(1))
        );
    }

    #[test]
    fn tail_profile_examples() {
        let g = power();
        let e1 = GradedVector::canonical(1);
        let p = seminorm_tail_profile(&e1, &[GradedVector::zero(), e1.clone()], &g, 0).unwrap();
        assert_eq!(p, vec![1.0, 0.0]);

        let v = GradedVector::from_real(&[1.0, 1.0]).unwrap();
        let p = seminorm_tail_profile(&v, &prefix_sums(&v), &g, 1).unwrap();
        assert!((p[0] - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(&p[1..], &[2.0, 0.0]);

        let w = GradedVector::from_real(&[0.5, -1.0, 0.0, 3.0]).unwrap();
        let p = seminorm_tail_profile(&w, &prefix_sums(&w), &g, 3).unwrap();
        assert_eq!(p[4], 0.0);
    }

    #[test]
    fn log_exponential_matches_power() {
        let e = WeightGrading::log_exponential(4, 100).unwrap();
        let p = WeightGrading::power(4, 100).unwrap();
        let v = GradedVector::from_real(&(1..=100).map(|j| 1.0 / j as f64).collect::<Vec<_>>())
            .unwrap();
        for s in 0..=4 {
            let (a, b) = (graded_norm(&v, &e, s).unwrap(), graded_norm(&v, &p, s).unwrap());
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn grading_validation() {
        assert!(WeightGrading::shifted_power(0, 2, 4).is_err());
        assert!(WeightGrading::exponential(vec![0.0, 1.0], 2, 3).is_err());
        assert!(WeightGrading::exponential(vec![0.0, 2.0, 1.0], 2, 3).is_err());
        assert!(WeightGrading::power(400, 10_000).is_err());
    }

    #[test]
    fn sparse_arithmetic() {
        let a = GradedVector::from_sparse([(3, c(1.0)), (1, c(2.0)), (3, c(1.0))]).unwrap();
        assert_eq!(a.get(3), c(2.0));
        assert_eq!(a.support_len(), 3);
        let b = a.sub(&a);
        assert!(b.is_zero());
        assert_eq!(a.prefix(2), GradedVector::from_real(&[2.0]).unwrap());
        assert_eq!(a.tail(2).add(&a.prefix(2)), a);
        assert_eq!(a.pair(&GradedVector::canonical(3)), c(2.0));
        assert!(GradedVector::from_sparse([(0, c(1.0))]).is_err());
        assert!(GradedVector::from_real(&[f64::NAN]).is_err());
    }
}

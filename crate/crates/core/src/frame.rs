//! Functional families `{g_i}` at truncation, their analysis operators and
//! optimal `(X₁, Θ, X₂)`-frame bounds.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::graded::{
    graded_norm, lp_norm, truncation_constant, DualWeighting, GradedVector, WeightGrading,
    Weighting,
};
use crate::linalg::{SparseMatrix, TIE_TOLERANCE};

/// Relative slack allowed when checking a computed inequality in floating point.
pub const INEQUALITY_SLACK: f64 = 1e-12;

/// `coef · j^exponent`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub coef: f64,
    pub exponent: f64,
}

impl PowerLaw {
    pub fn at(&self, j: usize) -> f64 {
        let x = j as f64;
        let p = if self.exponent.fract() == 0.0 && self.exponent.abs() < i32::MAX as f64 {
            x.powi(self.exponent as i32)
        } else {
            x.powf(self.exponent)
        };
        self.coef * p
    }
}

/// Positive weights `b_j`, either tabulated or periodic power laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficients {
    /// `b_j = table[j − 1]`
    Table(Vec<f64>),
    /// `b_j = classes[(j − 1) mod P](j)` with `P = classes.len()`
    Periodic(Vec<PowerLaw>),
}

impl Coefficients {
    pub fn constant(c: f64) -> Self {
        Coefficients::Periodic(vec![PowerLaw { coef: c, exponent: 0.0 }])
    }

    pub fn value(&self, j: usize) -> f64 {
        match self {
            Coefficients::Table(t) => t[j - 1],
            Coefficients::Periodic(classes) => classes[(j - 1) % classes.len()].at(j),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Coefficients::Table(t) => Coefficients::Table(t.iter().map(|b| b * c).collect()),
            Coefficients::Periodic(classes) => Coefficients::Periodic(
                classes.iter().map(|l| PowerLaw { coef: l.coef * c, exponent: l.exponent }).collect(),
            ),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Coefficients::Table(t) if t.len() < n => {
                return Err(FrameError::InvalidFrame(format!(
                    "weight table has {} entries, truncation needs {n}",
                    t.len()
                )))
            }
            Coefficients::Periodic(c) if c.is_empty() => {
                return Err(FrameError::InvalidFrame("periodic weights need a class".into()))
            }
            _ => {}
        }
        for j in 1..=n {
            let b = self.value(j);
            if !(b.is_finite() && b > 0.0) {
                return Err(FrameError::InvalidFrame(format!("weight b_{j} = {b} is not positive")));
            }
        }
        Ok(())
    }
}

/// Storage form of the functional family.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameForm {
    /// `g_i = b_i e_i*`: functional `i` reads coordinate `i`.
    Diagonal(Coefficients),
    /// `g_{2j−1} = g_{2j} = b_pair(j) e_j*`: two functionals per coordinate.
    Block(Coefficients),
    /// `G[i][j] = g_i(e_j)`.
    Dense(SparseMatrix),
}

/// The family `{g_i}_{i ≤ M}` acting on coordinates `1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSystem {
    form: FrameForm,
    truncation: usize,
}

impl FrameSystem {
    pub fn diagonal(b: Coefficients, truncation: usize) -> Result<Self> {
        b.validate(truncation)?;
        Ok(Self { form: FrameForm::Diagonal(b), truncation })
    }

    pub fn block(b_pair: Coefficients, truncation: usize) -> Result<Self> {
        b_pair.validate(truncation)?;
        Ok(Self { form: FrameForm::Block(b_pair), truncation })
    }

    pub fn dense(matrix: SparseMatrix) -> Result<Self> {
        if matrix.cols() == 0 || matrix.rows() == 0 {
            return Err(FrameError::InvalidFrame("dense frame must be nonempty".into()));
        }
        let truncation = matrix.cols();
        Ok(Self { form: FrameForm::Dense(matrix), truncation })
    }

    /// `b_j = 1` on odd `j`, `b_j = j^r` on even `j`.
    pub fn alternating_power(r: u32, truncation: usize) -> Result<Self> {
        Self::diagonal(
            Coefficients::Periodic(vec![
                PowerLaw { coef: 1.0, exponent: 0.0 },
                PowerLaw { coef: 1.0, exponent: r as f64 },
            ]),
            truncation,
        )
    }

    /// `b_j = j^r` for every `j`.
    pub fn uniform_power(r: u32, truncation: usize) -> Result<Self> {
        Self::diagonal(
            Coefficients::Periodic(vec![PowerLaw { coef: 1.0, exponent: r as f64 }]),
            truncation,
        )
    }

    /// Paired functionals with `b_pair(j) = 1` on odd `j` and `(2j)^r` on even `j`,
    /// i.e. `b_1 = b_2 = 1, b_3 = b_4 = 4^r, b_5 = b_6 = 1, b_7 = b_8 = 8^r, …`.
    pub fn paired_alternating_power(r: u32, truncation: usize) -> Result<Self> {
        Self::block(
            Coefficients::Periodic(vec![
                PowerLaw { coef: 1.0, exponent: 0.0 },
                PowerLaw { coef: 2f64.powi(r as i32), exponent: r as f64 },
            ]),
            truncation,
        )
    }

    pub fn identity(truncation: usize) -> Result<Self> {
        Self::diagonal(Coefficients::constant(1.0), truncation)
    }

    pub fn form(&self) -> &FrameForm {
        &self.form
    }

    /// Coordinate count `N` of the acted-on space.
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Functional count `M`.
    pub fn functional_count(&self) -> usize {
        match &self.form {
            FrameForm::Diagonal(_) => self.truncation,
            FrameForm::Block(_) => 2 * self.truncation,
            FrameForm::Dense(m) => m.rows(),
        }
    }

    /// Every weight multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        match &self.form {
            FrameForm::Diagonal(b) => Self::diagonal(b.scaled(c), self.truncation),
            FrameForm::Block(b) => Self::block(b.scaled(c), self.truncation),
            FrameForm::Dense(m) => Self::dense(m.weighted(|_| c, |_| 1.0)),
        }
    }

    /// The `M × N` matrix `G[i][j] = g_i(e_j)`.
    pub fn matrix(&self) -> SparseMatrix {
        let n = self.truncation;
        match &self.form {
            FrameForm::Diagonal(b) => {
                SparseMatrix::from_triplets(n, n, (0..n).map(|i| (i, i, b.value(i + 1))))
            }
            FrameForm::Block(b) => SparseMatrix::from_triplets(
                2 * n,
                n,
                (0..n).flat_map(|j| {
                    let v = b.value(j + 1);
                    [(2 * j, j, v), (2 * j + 1, j, v)]
                }),
            ),
            FrameForm::Dense(m) => Ok(m.clone()),
        }
        .expect("frame entries are validated")
    }

    fn check_setting(&self, setting: &GradedSetting) -> Result<()> {
        if setting.x.truncation() < self.truncation {
            return Err(FrameError::DimensionMismatch {
                expected: self.truncation,
                got: setting.x.truncation(),
            });
        }
        if setting.theta.truncation() < self.functional_count() {
            return Err(FrameError::DimensionMismatch {
                expected: self.functional_count(),
                got: setting.theta.truncation(),
            });
        }
        Ok(())
    }
}

/// The coefficient sequence `{g_i(f)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisResult {
    pub coefficients: GradedVector,
}

/// `U f = {g_i(f)}_{i ≤ M}`.
pub fn analyze(frame: &FrameSystem, f: &GradedVector) -> Result<AnalysisResult> {
    if f.support_len() > frame.truncation {
        return Err(FrameError::DimensionMismatch { expected: frame.truncation, got: f.support_len() });
    }
    let coefficients = match &frame.form {
        FrameForm::Diagonal(b) => {
            GradedVector::from_sparse(f.iter().map(|(j, z)| (j, z * b.value(j))))?
        }
        FrameForm::Block(b) => GradedVector::from_sparse(f.iter().flat_map(|(j, z)| {
            let c = z * b.value(j);
            [(2 * j - 1, c), (2 * j, c)]
        }))?,
        FrameForm::Dense(m) => m.apply(f)?,
    };
    Ok(AnalysisResult { coefficients })
}

/// The graded spaces a frame is measured against: `X_s` and `Θ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedSetting {
    pub x: WeightGrading,
    pub theta: WeightGrading,
}

impl GradedSetting {
    pub fn new(x: WeightGrading, theta: WeightGrading) -> Self {
        Self { x, theta }
    }
}

/// Levels at which a frame inequality `A‖f‖_{s₁} ≤ |||Uf|||_k ≤ B‖f‖_{s₂}` is posed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundLevels {
    pub theta: usize,
    pub lower: usize,
    pub upper: usize,
}

impl BoundLevels {
    pub fn new(theta: usize, lower: usize, upper: usize) -> Self {
        Self { theta, lower, upper }
    }
}

/// What the truncated extremum says about the extremum over all of `ℕ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tail {
    /// The global extremum is attained within the truncation.
    Attained,
    /// The global extremum is a limit that is approached but not attained.
    Limit(f64),
    /// The ratio vanishes (lower side) or diverges (upper side) along a subsequence.
    Unbounded,
    /// Eventual monotonicity could not be certified.
    Uncertified,
}

impl Tail {
    pub fn is_certified(&self) -> bool {
        !matches!(self, Tail::Uncertified)
    }
}

/// Where an extremal ratio is attained.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Coordinate(usize),
    Vector(GradedVector),
}

/// Optimal frame bounds at truncation, with witnesses and tail certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBounds {
    /// Lower bound `A`.
    pub lower: f64,
    /// Upper bound `B`.
    pub upper: f64,
    pub lower_witness: Witness,
    pub upper_witness: Witness,
    pub lower_tail: Tail,
    pub upper_tail: Tail,
}

impl FrameBounds {
    pub fn lower_coordinate(&self) -> Option<usize> {
        match self.lower_witness {
            Witness::Coordinate(j) => Some(j),
            Witness::Vector(_) => None,
        }
    }

    pub fn upper_coordinate(&self) -> Option<usize> {
        match self.upper_witness {
            Witness::Coordinate(j) => Some(j),
            Witness::Vector(_) => None,
        }
    }
}

/// One residue class `j ≡ residue + 1 (mod period)` of a ratio sequence,
/// where the ratio is `coef · j^exponent · φ(j)`. For block frames
/// `φ(j) = (1 + ((2j−1)/(2j))^{2e})^{1/2}` with `e` the Θ exponent; otherwise `φ ≡ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ClassLaw {
    pub residue: usize,
    pub period: usize,
    pub coef: f64,
    pub exponent: f64,
    pub block_theta_exponent: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum ClassExtent {
    Attained,
    Limit(f64),
    Unbounded,
    Uncertified,
}

impl ClassLaw {
    fn at(&self, j: usize) -> f64 {
        let base = PowerLaw { coef: self.coef, exponent: self.exponent }.at(j);
        match self.block_theta_exponent {
            None => base,
            Some(t) => {
                let x = (2 * j - 1) as f64 / (2 * j) as f64;
                base * 1f64.hypot(x.powf(t))
            }
        }
    }

    fn first(&self) -> usize {
        self.residue + 1
    }

    fn last_member(&self, n: usize) -> Option<usize> {
        (self.first() <= n).then(|| n - (n - self.first()) % self.period)
    }

    pub fn lower_extent(&self, n: usize) -> ClassExtent {
        if self.last_member(n).is_none() {
            return ClassExtent::Uncertified;
        }
        if self.exponent < 0.0 {
            ClassExtent::Unbounded
        } else {
            // Nondecreasing from the first member on.
            ClassExtent::Attained
        }
    }

    pub fn upper_extent(&self, n: usize) -> ClassExtent {
        let Some(last) = self.last_member(n) else {
            return ClassExtent::Uncertified;
        };
        match (self.exponent, self.block_theta_exponent) {
            (e, _) if e > 0.0 => ClassExtent::Unbounded,
            (0.0, None) => ClassExtent::Attained,
            (0.0, Some(t)) => {
                if t == 0.0 {
                    ClassExtent::Attained
                } else {
                    ClassExtent::Limit(self.coef * std::f64::consts::SQRT_2)
                }
            }
            (_, None) => ClassExtent::Attained,
            (e, Some(t)) => {
                // d/dj log ratio ≤ e/j + t/(2j²) < 0 once j > t / (2|e|).
                let turn = (t / (2.0 * e.abs())).floor() as usize + 1;
                if last >= turn {
                    ClassExtent::Attained
                } else {
                    ClassExtent::Uncertified
                }
            }
        }
    }
}

/// Ratio sequence `ρ(j) = (Θ_k weight of g(e_j)) / v_s(j)` of a diagonal or block frame.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RatioSequence {
    pub values: Vec<f64>,
    pub laws: Option<Vec<ClassLaw>>,
}

impl RatioSequence {
    pub fn new(frame: &FrameSystem, setting: &GradedSetting, theta: usize, x_level: usize) -> Result<Self> {
        frame.check_setting(setting)?;
        setting.theta.check_level(theta)?;
        setting.x.check_level(x_level)?;
        let (th, x) = (&setting.theta, &setting.x);
        let (b, block) = match &frame.form {
            FrameForm::Diagonal(b) => (b, false),
            FrameForm::Block(b) => (b, true),
            FrameForm::Dense(_) => return Err(FrameError::WrongForm),
        };
        let laws: Option<Vec<ClassLaw>> = match (b, th.power_law(theta), x.power_law(x_level)) {
            (Coefficients::Periodic(classes), Some((tc, te)), Some((xc, xe))) => Some(
                classes
                    .iter()
                    .enumerate()
                    .map(|(m, law)| {
                        let theta_coef = if block { tc * 2f64.powf(te) } else { tc };
                        ClassLaw {
                            residue: m,
                            period: classes.len(),
                            coef: law.coef * theta_coef / xc,
                            exponent: law.exponent + te - xe,
                            block_theta_exponent: block.then_some(te),
                        }
                    })
                    .collect(),
            ),
            _ => None,
        };
        // Closed-form classes avoid forming j^k and j^s separately.
        let values = (1..=frame.truncation)
            .map(|j| match &laws {
                Some(laws) => laws[(j - 1) % laws.len()].at(j),
                None => {
                    let tw = if block {
                        th.weight(theta, 2 * j - 1).hypot(th.weight(theta, 2 * j))
                    } else {
                        th.weight(theta, j)
                    };
                    b.value(j) * tw / x.weight(x_level, j)
                }
            })
            .collect();
        Ok(Self { values, laws })
    }

    /// Smallest index attaining the minimum (within the tie tolerance).
    pub fn argmin(&self) -> (usize, f64) {
        let m = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let j = self.values.iter().position(|&v| v <= m * (1.0 + TIE_TOLERANCE)).unwrap();
        (j + 1, m)
    }

    pub fn argmax(&self) -> (usize, f64) {
        let m = self.values.iter().copied().fold(0.0, f64::max);
        let j = self.values.iter().position(|&v| v >= m * (1.0 - TIE_TOLERANCE)).unwrap();
        (j + 1, m)
    }

    pub fn lower_tail(&self) -> Tail {
        let Some(laws) = &self.laws else { return Tail::Uncertified };
        let n = self.values.len();
        let extents: Vec<_> = laws.iter().map(|l| l.lower_extent(n)).collect();
        if extents.contains(&ClassExtent::Uncertified) {
            Tail::Uncertified
        } else if extents.contains(&ClassExtent::Unbounded) {
            Tail::Unbounded
        } else {
            Tail::Attained
        }
    }

    pub fn upper_tail(&self) -> Tail {
        let Some(laws) = &self.laws else { return Tail::Uncertified };
        let n = self.values.len();
        let extents: Vec<_> = laws.iter().map(|l| l.upper_extent(n)).collect();
        if extents.contains(&ClassExtent::Uncertified) {
            return Tail::Uncertified;
        }
        if extents.contains(&ClassExtent::Unbounded) {
            return Tail::Unbounded;
        }
        let truncated = self.argmax().1;
        let limit = extents
            .iter()
            .filter_map(|e| match e {
                ClassExtent::Limit(l) => Some(*l),
                _ => None,
            })
            .fold(0.0f64, f64::max);
        if limit > truncated {
            Tail::Limit(limit)
        } else {
            Tail::Attained
        }
    }
}

/// Optimal bounds for a diagonal or block frame from the closed-form ratio
/// sequences: `A = min_j ρ_{s₁}(j)`, `B = max_j ρ_{s₂}(j)`.
pub fn frame_bounds_analytic(
    frame: &FrameSystem,
    setting: &GradedSetting,
    levels: BoundLevels,
) -> Result<FrameBounds> {
    if matches!(frame.form, FrameForm::Dense(_)) {
        return Err(FrameError::WrongForm);
    }
    check_dominance(frame.truncation, &setting.x, levels)?;
    let lower_seq = RatioSequence::new(frame, setting, levels.theta, levels.lower)?;
    let upper_seq = RatioSequence::new(frame, setting, levels.theta, levels.upper)?;
    let (ja, a) = lower_seq.argmin();
    let (jb, b) = upper_seq.argmax();
    Ok(FrameBounds {
        lower: a,
        upper: b,
        lower_witness: Witness::Coordinate(ja),
        upper_witness: Witness::Coordinate(jb),
        lower_tail: lower_seq.lower_tail(),
        upper_tail: upper_seq.upper_tail(),
    })
}

fn check_dominance(n: usize, x: &WeightGrading, levels: BoundLevels) -> Result<()> {
    x.check_level(levels.lower)?;
    x.check_level(levels.upper)?;
    for j in 1..=n {
        if x.weight(levels.lower, j) > x.weight(levels.upper, j) {
            return Err(FrameError::DominanceViolated { index: j });
        }
    }
    Ok(())
}

/// Optimal bounds for any frame form from extremal singular values of the
/// weighted matrix `diag(w_k) · G · diag(1/v_s)`.
pub fn frame_bounds_numeric(
    frame: &FrameSystem,
    setting: &GradedSetting,
    levels: BoundLevels,
) -> Result<FrameBounds> {
    frame.check_setting(setting)?;
    setting.theta.check_level(levels.theta)?;
    check_dominance(frame.truncation, &setting.x, levels)?;
    let g = frame.matrix();
    let (th, x) = (&setting.theta, &setting.x);
    let weighted = |s: usize| {
        g.weighted(|i| th.weight(levels.theta, i + 1), |j| x.weight(s, j + 1).recip())
    };
    let lo = weighted(levels.lower).singular_extremes()?;
    let hi = weighted(levels.upper).singular_extremes()?;
    let to_x = |u: &[(usize, f64)], s: usize| {
        Witness::Vector(
            GradedVector::from_sparse(
                u.iter().map(|&(j, c)| (j + 1, Complex64::new(c / x.weight(s, j + 1), 0.0))),
            )
            .expect("finite eigenvector"),
        )
    };
    Ok(FrameBounds {
        lower: lo.min,
        upper: hi.max,
        lower_witness: to_x(&lo.argmin, levels.lower),
        upper_witness: to_x(&hi.argmax, levels.upper),
        lower_tail: Tail::Uncertified,
        upper_tail: Tail::Uncertified,
    })
}

/// Analytic bounds for diagonal and block frames, numeric bounds otherwise.
pub fn frame_bounds(frame: &FrameSystem, setting: &GradedSetting, levels: BoundLevels) -> Result<FrameBounds> {
    match frame.form {
        FrameForm::Dense(_) => frame_bounds_numeric(frame, setting, levels),
        _ => frame_bounds_analytic(frame, setting, levels),
    }
}

/// Smallest `B` with `|||{g(f_i)}_i|||_{Θ*_k} ≤ B‖g‖_{X*_s}` over coefficient
/// functionals `g`, where `g(f) = ∑_j g_j f_j`.
pub fn bessel_bound(
    candidates: &[GradedVector],
    theta_dual: &DualWeighting,
    k: usize,
    x_dual: &DualWeighting,
    s: usize,
) -> Result<f64> {
    if candidates.is_empty() {
        return Err(FrameError::Empty("bessel_bound needs candidate vectors"));
    }
    theta_dual.check_level(k)?;
    x_dual.check_level(s)?;
    if candidates.len() > theta_dual.truncation() {
        return Err(FrameError::DimensionMismatch {
            expected: theta_dual.truncation(),
            got: candidates.len(),
        });
    }
    for f in candidates {
        x_dual.check_support(f)?;
    }
    let rows = SparseMatrix::from_columns(x_dual.truncation(), candidates)?.transpose();
    let h = rows.weighted(|i| theta_dual.weight(k, i + 1), |j| x_dual.weight(s, j + 1).recip());
    let b = h.singular_extremes()?.max;
    if !b.is_finite() {
        return Err(FrameError::Degenerate("Bessel bound overflows".into()));
    }
    Ok(b)
}

/// Which side of a frame inequality failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSet {
    Dense,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundViolation {
    pub set: SampleSet,
    pub index: usize,
    pub side: Side,
    pub lhs: f64,
    pub rhs: f64,
    pub vector: GradedVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionReport {
    pub lambda: f64,
    pub checked: usize,
    pub violations: Vec<BoundViolation>,
}

impl ExtensionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The three quantities of a frame inequality for one vector.
pub(crate) fn inequality_terms(
    frame: &FrameSystem,
    setting: &GradedSetting,
    levels: BoundLevels,
    f: &GradedVector,
) -> Result<(f64, f64, f64)> {
    let coeff = analyze(frame, f)?.coefficients;
    Ok((
        graded_norm(f, &setting.x, levels.lower)?,
        graded_norm(&coeff, &setting.theta, levels.theta)?,
        graded_norm(f, &setting.x, levels.upper)?,
    ))
}

pub(crate) fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + INEQUALITY_SLACK)
}

/// Checks `A‖f‖_{s₁} ≤ |||Uf|||_k ≤ B‖f‖_{s₂}` on the dense samples and the
/// extended inequality with `(A, λB)` on the full samples, `λ` being the
/// measured truncation constant of Θ_k on the full samples' coefficients.
pub fn dense_subset_extension_check(
    frame: &FrameSystem,
    setting: &GradedSetting,
    levels: BoundLevels,
    lower: f64,
    upper: f64,
    dense_samples: &[GradedVector],
    full_samples: &[GradedVector],
) -> Result<ExtensionReport> {
    let coeffs: Vec<GradedVector> = full_samples
        .iter()
        .map(|f| analyze(frame, f).map(|a| a.coefficients))
        .collect::<Result<_>>()?;
    let nonzero: Vec<GradedVector> = coeffs.into_iter().filter(|c| !c.is_zero()).collect();
    let lambda = if nonzero.is_empty() {
        1.0
    } else {
        truncation_constant(&setting.theta, levels.theta, &nonzero)?
    };
    let mut violations = Vec::new();
    let sets = [(SampleSet::Dense, dense_samples, 1.0), (SampleSet::Full, full_samples, lambda)];
    let mut checked = 0;
    for (set, samples, factor) in sets {
        for (index, f) in samples.iter().enumerate() {
            checked += 1;
            let (lo, mid, hi) = inequality_terms(frame, setting, levels, f)?;
            if !within(lower * lo, mid) {
                violations.push(BoundViolation {
                    set,
                    index,
                    side: Side::Lower,
                    lhs: lower * lo,
                    rhs: mid,
                    vector: f.clone(),
                });
            }
            if !within(mid, factor * upper * hi) {
                violations.push(BoundViolation {
                    set,
                    index,
                    side: Side::Upper,
                    lhs: mid,
                    rhs: factor * upper * hi,
                    vector: f.clone(),
                });
            }
        }
    }
    Ok(ExtensionReport { lambda, checked, violations })
}

/// One sample's `‖c‖_q ≤ ‖c‖_2 ≤ ‖c‖_p` chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpChain {
    pub q_norm: f64,
    pub l2_norm: f64,
    pub p_norm: f64,
    pub holds: bool,
}

/// Prefix of the non-closedness witness `c_j = j^{−1/(p+ε)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessGrowth {
    pub prefix: usize,
    pub l2_norm: f64,
    pub p_norm: f64,
    pub ratio: f64,
    /// `n^{1/p − 1/2}`: the Hölder ceiling on `‖c‖_p / ‖c‖_2` for support `n`.
    pub holder_ceiling: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpDemoReport {
    pub p: f64,
    pub q: f64,
    pub epsilon: f64,
    pub chains: Vec<LpChain>,
    pub growth: Vec<WitnessGrowth>,
    /// `(1 + 1/(2/(p+ε) − 1))^{1/2}`, an upper bound on the ℓ² norm of the full witness.
    pub l2_limit_bound: f64,
    pub l2_bounded: bool,
    pub p_norms_increasing: bool,
}

impl LpDemoReport {
    pub fn passed(&self) -> bool {
        self.chains.iter().all(|c| c.holds) && self.l2_bounded && self.p_norms_increasing
    }
}

/// The coordinate-functional frame between `ℓ^q`, `ℓ²` and `ℓ^p`: checks the
/// inequality chain on the samples and tabulates a family that stays bounded
/// in `ℓ²` while its `ℓ^p` norms grow without bound, so the range of the
/// coefficient map is not closed in `ℓ²`.
pub fn lp_chain_demo(
    p: f64,
    q: f64,
    samples: &[GradedVector],
    epsilon: f64,
    prefixes: &[usize],
) -> Result<LpDemoReport> {
    if !(p > 1.0 && p < 2.0 && q > 2.0 && q.is_finite()) {
        return Err(FrameError::InvalidParameters(format!("need 1 < p < 2 < q < ∞, got p={p}, q={q}")));
    }
    if !(epsilon > 0.0 && p + epsilon < 2.0) {
        return Err(FrameError::InvalidParameters(format!(
            "witness exponent needs 0 < ε < 2 − p, got ε={epsilon}"
        )));
    }
    let chains = samples
        .iter()
        .map(|c| {
            let (qn, l2, pn) = (lp_norm(c, q)?, lp_norm(c, 2.0)?, lp_norm(c, p)?);
            Ok(LpChain { q_norm: qn, l2_norm: l2, p_norm: pn, holds: within(qn, l2) && within(l2, pn) })
        })
        .collect::<Result<Vec<_>>>()?;
    let decay = (p + epsilon).recip();
    let growth = prefixes
        .iter()
        .map(|&n| {
            let c = GradedVector::from_real(&(1..=n).map(|j| (j as f64).powf(-decay)).collect::<Vec<_>>())?;
            let (l2, pn) = (lp_norm(&c, 2.0)?, lp_norm(&c, p)?);
            Ok(WitnessGrowth {
                prefix: n,
                l2_norm: l2,
                p_norm: pn,
                ratio: pn / l2,
                holder_ceiling: (n as f64).powf(p.recip() - 0.5),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let l2_limit_bound = (1.0 + (2.0 * decay - 1.0).recip()).sqrt();
    let l2_bounded = growth.iter().all(|g| g.l2_norm <= l2_limit_bound);
    let p_norms_increasing = growth.windows(2).all(|w| w[1].p_norm > w[0].p_norm);
    Ok(LpDemoReport { p, q, epsilon, chains, growth, l2_limit_bound, l2_bounded, p_norms_increasing })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setting(n: usize, theta_n: usize, levels: usize) -> GradedSetting {
        GradedSetting::new(
            WeightGrading::power(levels, n).unwrap(),
            WeightGrading::power(levels, theta_n).unwrap(),
        )
    }

    fn block_setting(n: usize, levels: usize) -> GradedSetting {
        GradedSetting::new(
            WeightGrading::shifted_power(2, levels, n).unwrap(),
            WeightGrading::power(levels, 2 * n).unwrap(),
        )
    }

    #[test]
    fn analyze_examples() {
        let b = Coefficients::Table((1..=8).map(|j| if j % 2 == 0 { 2.0 } else { 1.0 }).collect());
        let frame = FrameSystem::diagonal(b, 8).unwrap();
        let u = analyze(&frame, &GradedVector::canonical(2)).unwrap();
        assert_eq!(u.coefficients, GradedVector::canonical(2).scale_real(2.0));

        let paired = FrameSystem::paired_alternating_power(1, 8).unwrap();
        let u = analyze(&paired, &GradedVector::canonical(1)).unwrap();
        assert_eq!(u.coefficients, GradedVector::from_real(&[1.0, 1.0]).unwrap());

        let id = FrameSystem::dense(SparseMatrix::identity(4)).unwrap();
        let f = GradedVector::from_real(&[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(analyze(&id, &f).unwrap().coefficients, f);

        assert!(matches!(
            analyze(&id, &GradedVector::canonical(5)),
            Err(FrameError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn paired_weights_match_listing() {
        let frame = FrameSystem::paired_alternating_power(1, 8).unwrap();
        let coeff = analyze(&frame, &GradedVector::from_real(&[1.0; 4]).unwrap()).unwrap();
        let expect = [1.0, 1.0, 4.0, 4.0, 1.0, 1.0, 8.0, 8.0];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(coeff.coefficients.get(i + 1).re, *e);
        }
    }

    #[test]
    fn alternating_bounds_r2() {
        let frame = FrameSystem::alternating_power(2, 64).unwrap();
        let b = frame_bounds_analytic(&frame, &setting(64, 64, 4), BoundLevels::new(0, 0, 2)).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        assert_eq!(b.lower_coordinate(), Some(1));
        // j = 1 and every even j tie at 1; ties resolve to the smallest index.
        assert_eq!(b.upper_coordinate(), Some(1));
        assert_eq!((b.lower_tail, b.upper_tail), (Tail::Attained, Tail::Attained));
    }

    #[test]
    fn isometry_bounds() {
        let frame = FrameSystem::identity(32).unwrap();
        let b = frame_bounds_analytic(&frame, &setting(32, 32, 3), BoundLevels::new(3, 3, 3)).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
    }

    #[test]
    fn paired_bounds_r1() {
        let frame = FrameSystem::paired_alternating_power(1, 64).unwrap();
        let b = frame_bounds_analytic(&frame, &block_setting(64, 3), BoundLevels::new(0, 0, 1)).unwrap();
        // |||Uψ_2|||_0 = √2 = ‖ψ_2‖_0 · √2 is the smallest ratio.
        assert!((b.lower - 2f64.sqrt()).abs() < 1e-15);
        assert!((b.upper - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(b.upper_coordinate(), Some(2));
        assert_eq!(b.upper_tail, Tail::Attained);
    }

    #[test]
    fn paired_upper_limit_is_certified() {
        let frame = FrameSystem::paired_alternating_power(1, 64).unwrap();
        let b = frame_bounds_analytic(&frame, &block_setting(64, 4), BoundLevels::new(2, 2, 3)).unwrap();
        assert!(b.upper < 2f64.sqrt());
        match b.upper_tail {
            Tail::Limit(l) => assert!((l - 2f64.sqrt()).abs() < 1e-15),
            t => panic!("expected a limit, got {t:?}"),
        }
    }

    #[test]
    fn vanishing_lower_ratio_is_flagged() {
        let frame = FrameSystem::alternating_power(1, 64).unwrap();
        let b = frame_bounds_analytic(&frame, &setting(64, 64, 4), BoundLevels::new(0, 1, 1)).unwrap();
        assert_eq!(b.lower_tail, Tail::Unbounded);
        assert_eq!(b.upper_tail, Tail::Attained);
    }

    #[test]
    fn dominance_and_form_errors() {
        let frame = FrameSystem::identity(8).unwrap();
        let s = setting(8, 8, 3);
        assert_eq!(
            frame_bounds_analytic(&frame, &s, BoundLevels::new(0, 2, 1)),
            Err(FrameError::DominanceViolated { index: 2 })
        );
        let dense = FrameSystem::dense(SparseMatrix::identity(8)).unwrap();
        assert_eq!(frame_bounds_analytic(&dense, &s, BoundLevels::new(0, 0, 0)), Err(FrameError::WrongForm));
    }

    #[test]
    fn numeric_examples() {
        let dense = FrameSystem::dense(SparseMatrix::identity(8)).unwrap();
        let b = frame_bounds_numeric(&dense, &setting(8, 8, 1), BoundLevels::new(0, 0, 0)).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));

        let frame = FrameSystem::alternating_power(1, 256).unwrap();
        let b = frame_bounds_numeric(&frame, &setting(256, 256, 3), BoundLevels::new(1, 1, 2)).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12);

        let golden = FrameSystem::dense(SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap())
            .unwrap();
        let b = frame_bounds_numeric(&golden, &setting(2, 2, 0), BoundLevels::new(0, 0, 0)).unwrap();
        assert!((b.lower - 0.618_033_988_749_895).abs() < 1e-12);
        assert!((b.upper - 1.618_033_988_749_895).abs() < 1e-12);
    }

    #[test]
    fn bessel_examples() {
        let g = WeightGrading::power(3, 16).unwrap();
        let d = g.dual();
        let ident: Vec<_> = (1..=16).map(GradedVector::canonical).collect();
        assert_eq!(bessel_bound(&ident, &d, 2, &d, 2).unwrap(), 1.0);
        let doubled: Vec<_> = ident.iter().map(|e| e.scale_real(2.0)).collect();
        assert_eq!(bessel_bound(&doubled, &d, 1, &d, 1).unwrap(), 2.0);
        let frame = FrameSystem::alternating_power(1, 16).unwrap();
        let FrameForm::Diagonal(b) = frame.form() else { unreachable!() };
        let dual: Vec<_> = (1..=16).map(|i| GradedVector::canonical(i).scale_real(1.0 / b.value(i))).collect();
        assert_eq!(bessel_bound(&dual, &d, 3, &d, 3).unwrap(), 1.0);
        assert!(bessel_bound(&[], &d, 0, &d, 0).is_err());
    }

    #[test]
    fn extension_check_examples() {
        let n = 32;
        let s = setting(n, n, 4);
        let frame = FrameSystem::alternating_power(2, n).unwrap();
        let levels = BoundLevels::new(1, 1, 3);
        let canon: Vec<_> = (1..=n).map(GradedVector::canonical).collect();
        let r = dense_subset_extension_check(&frame, &s, levels, 1.0, 1.0, &canon, &canon).unwrap();
        assert!(r.passed());
        assert_eq!(r.lambda, 1.0);

        let half = frame.scaled(0.5).unwrap();
        let r = dense_subset_extension_check(&half, &s, levels, 1.0, 1.0, &canon, &canon).unwrap();
        assert!(r.violations.iter().any(|v| v.side == Side::Lower));
    }

    #[test]
    fn lp_chain_examples() {
        let c = GradedVector::from_real(&[1.0, 1.0]).unwrap();
        let r = lp_chain_demo(1.5, 3.0, &[c, GradedVector::canonical(1)], 0.05, &[10, 100]).unwrap();
        let ch = r.chains[0];
        assert!((ch.q_norm - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert!((ch.l2_norm - 2f64.sqrt()).abs() < 1e-12);
        assert!((ch.p_norm - 2f64.powf(2.0 / 3.0)).abs() < 1e-12);
        assert!(ch.holds);
        assert_eq!((r.chains[1].q_norm, r.chains[1].l2_norm, r.chains[1].p_norm), (1.0, 1.0, 1.0));
        assert!(lp_chain_demo(2.5, 3.0, &[], 0.05, &[]).is_err());
        assert!(lp_chain_demo(1.5, 1.8, &[], 0.05, &[]).is_err());
    }
}

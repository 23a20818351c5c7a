//! Left inverses of the analysis operator in three interchangeable forms:
//! a synthesis matrix `V`, its dual vectors `f_i = V e_i`, and the projection
//! `P = U V` onto the range of `U`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame::{
    analyze, bessel_bound, frame_bounds, BoundLevels, FrameForm, FrameSystem, GradedSetting,
};
use crate::graded::{dual_norm, graded_norm, GradedVector, WeightGrading, Weighting};
use crate::linalg::{RangeSolver, SparseMatrix};
use crate::multilevel::{close, IndexPlan};

/// Largest allowed entry of `V U − I`.
pub const LEFT_INVERSE_TOLERANCE: f64 = 1e-10;
/// Largest allowed relative residual of `U x = P d`.
pub const RANGE_TOLERANCE: f64 = 1e-9;
/// Relative agreement required between bound tables built along different routes.
pub const BOUND_AGREEMENT: f64 = 1e-9;
/// Residuals below `ZERO_FLOOR · ‖f‖` count as exactly zero.
pub const ZERO_FLOOR: f64 = 1e-12;

/// The reconstruction vectors `f_1, …, f_M` in `X` truncated to `N` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSystem {
    vectors: Vec<GradedVector>,
    truncation: usize,
}

impl DualSystem {
    pub fn new(vectors: Vec<GradedVector>, truncation: usize) -> Result<Self> {
        if vectors.is_empty() {
            return Err(FrameError::Empty("dual system"));
        }
        for f in &vectors {
            if f.support_len() > truncation {
                return Err(FrameError::CoordinateBeyondTruncation { index: f.support_len(), truncation });
            }
        }
        Ok(Self { vectors, truncation })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// `f_i`, 1-based.
    pub fn get(&self, i: usize) -> &GradedVector {
        &self.vectors[i - 1]
    }

    pub fn vectors(&self) -> &[GradedVector] {
        &self.vectors
    }

    /// `N × M` matrix with columns `f_i`.
    pub fn matrix(&self) -> SparseMatrix {
        SparseMatrix::from_columns(self.truncation, &self.vectors).expect("real dual vectors")
    }
}

/// `C_k` with `‖Vd‖_{s_k} ≤ C_k |||d|||_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelBound {
    pub k: usize,
    pub level: usize,
    pub c: f64,
}

/// A synthesis operator `V d = ∑ d_i f_i` with its per-level bound table.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisOp {
    dual: DualSystem,
    matrix: SparseMatrix,
    bounds: Vec<LevelBound>,
}

impl SynthesisOp {
    /// Bounds from the weighted matrix `diag(v_{s_k}) V diag(1/w_k)`.
    pub fn from_matrix(v: SparseMatrix, setting: &GradedSetting, plan: &IndexPlan) -> Result<Self> {
        check_shape(v.rows(), v.cols(), setting)?;
        let mut bounds = Vec::with_capacity(plan.len());
        for (k, e) in plan.entries().iter().enumerate() {
            setting.theta.check_level(k)?;
            setting.x.check_level(e.lower)?;
            let h = v.weighted(|r| setting.x.weight(e.lower, r + 1), |c| setting.theta.weight(k, c + 1).recip());
            let c = h.singular_extremes()?.max;
            if !c.is_finite() {
                return Err(FrameError::Degenerate(format!("C_{k} overflows")));
            }
            bounds.push(LevelBound { k, level: e.lower, c });
        }
        let dual = build_dual_from_v(&v)?;
        Ok(Self { dual, matrix: v, bounds })
    }

    pub fn dual(&self) -> &DualSystem {
        &self.dual
    }

    /// `V` as an `N × M` matrix.
    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn bounds(&self) -> &[LevelBound] {
        &self.bounds
    }

    pub fn c(&self, k: usize) -> Option<f64> {
        self.bounds.get(k).map(|b| b.c)
    }

    pub fn apply(&self, d: &GradedVector) -> Result<GradedVector> {
        self.matrix.apply(d)
    }
}

fn check_shape(n: usize, m: usize, setting: &GradedSetting) -> Result<()> {
    if n > setting.x.truncation() {
        return Err(FrameError::DimensionMismatch { expected: setting.x.truncation(), got: n });
    }
    if m > setting.theta.truncation() {
        return Err(FrameError::DimensionMismatch { expected: setting.theta.truncation(), got: m });
    }
    Ok(())
}

/// `∑_{i ≤ n} d_i f_i`.
pub fn synthesize(op: &SynthesisOp, d: &GradedVector, n: usize) -> Result<GradedVector> {
    let m = op.dual.len();
    if n > m {
        return Err(FrameError::DimensionMismatch { expected: m, got: n });
    }
    if d.support_len() > m {
        return Err(FrameError::DimensionMismatch { expected: m, got: d.support_len() });
    }
    let mut out = GradedVector::zero();
    for (i, z) in d.iter().take_while(|&(i, _)| i <= n) {
        out = out.axpy(z, op.dual.get(i));
    }
    Ok(out)
}

/// `f_i = V e_i`.
pub fn build_dual_from_v(v: &SparseMatrix) -> Result<DualSystem> {
    DualSystem::new(v.columns(), v.rows())
}

/// `V d = ∑ d_i f_i`, with `C_k` computed as the Bessel bound of the dual
/// vectors between `Θ*_k` and `X*_{s_k}`.
pub fn build_v_from_dual(dual: &DualSystem, setting: &GradedSetting, plan: &IndexPlan) -> Result<SynthesisOp> {
    check_shape(dual.truncation, dual.len(), setting)?;
    let (theta_dual, x_dual) = (setting.theta.dual(), setting.x.dual());
    let bounds = plan
        .entries()
        .iter()
        .enumerate()
        .map(|(k, e)| {
            Ok(LevelBound { k, level: e.lower, c: bessel_bound(&dual.vectors, &theta_dual, k, &x_dual, e.lower)? })
        })
        .collect::<Result<_>>()?;
    Ok(SynthesisOp { matrix: dual.matrix(), dual: dual.clone(), bounds })
}

/// A projection on the first `M` coordinates of `Θ`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProjectionOp {
    /// 2 × 2 blocks acting on the pairs `(2j−1, 2j)`.
    Block(Vec<[[f64; 2]; 2]>),
    Matrix(SparseMatrix),
}

impl ProjectionOp {
    pub fn identity(m: usize) -> Self {
        ProjectionOp::Matrix(SparseMatrix::identity(m))
    }

    /// `(d_1, d_2, d_3, d_4, …) ↦ (d_2, d_2, d_4, d_4, …)` on `pairs` pairs.
    pub fn even_selection(pairs: usize) -> Self {
        ProjectionOp::Block(vec![[[0.0, 1.0], [0.0, 1.0]]; pairs])
    }

    /// Replaces each pair by its mean.
    pub fn pair_average(pairs: usize) -> Self {
        ProjectionOp::Block(vec![[[0.5, 0.5], [0.5, 0.5]]; pairs])
    }

    pub fn size(&self) -> usize {
        match self {
            ProjectionOp::Block(b) => 2 * b.len(),
            ProjectionOp::Matrix(m) => m.rows(),
        }
    }

    pub fn matrix(&self) -> SparseMatrix {
        match self {
            ProjectionOp::Block(blocks) => SparseMatrix::from_triplets(
                2 * blocks.len(),
                2 * blocks.len(),
                blocks.iter().enumerate().flat_map(|(j, b)| {
                    (0..2).flat_map(move |r| (0..2).map(move |c| (2 * j + r, 2 * j + c, b[r][c])))
                }),
            )
            .expect("finite block entries"),
            ProjectionOp::Matrix(m) => m.clone(),
        }
    }

    pub fn apply(&self, d: &GradedVector) -> Result<GradedVector> {
        let m = self.size();
        if d.support_len() > m {
            return Err(FrameError::DimensionMismatch { expected: m, got: d.support_len() });
        }
        match self {
            ProjectionOp::Block(blocks) => {
                let mut out = Vec::new();
                for (j, b) in blocks.iter().enumerate() {
                    let (x, y) = (d.get(2 * j + 1), d.get(2 * j + 2));
                    if x == Complex64::default() && y == Complex64::default() {
                        continue;
                    }
                    out.push((2 * j + 1, x * b[0][0] + y * b[0][1]));
                    out.push((2 * j + 2, x * b[1][0] + y * b[1][1]));
                }
                GradedVector::from_sparse(out)
            }
            ProjectionOp::Matrix(p) => p.apply(d),
        }
    }

    /// Largest entry of `P² − P`.
    pub fn idempotence_defect(&self) -> f64 {
        match self {
            ProjectionOp::Block(blocks) => blocks
                .iter()
                .flat_map(|b| {
                    (0..2).flat_map(move |r| {
                        (0..2).map(move |c| (b[r][0] * b[0][c] + b[r][1] * b[1][c] - b[r][c]).abs())
                    })
                })
                .fold(0.0, f64::max),
            ProjectionOp::Matrix(p) => p.matmul(p).expect("square").max_abs_diff(p),
        }
    }

    /// Operator norm of `P` on `Θ_k`.
    pub fn norm(&self, theta: &WeightGrading, k: usize) -> Result<f64> {
        theta.check_level(k)?;
        if self.size() > theta.truncation() {
            return Err(FrameError::DimensionMismatch { expected: theta.truncation(), got: self.size() });
        }
        let w = |i: usize| theta.weight(k, i + 1);
        Ok(self.matrix().weighted(w, |c| w(c).recip()).singular_extremes()?.max)
    }

    fn from_matrix_for(frame: &FrameSystem, p: SparseMatrix) -> Self {
        if !matches!(frame.form(), FrameForm::Block(_)) {
            return ProjectionOp::Matrix(p);
        }
        if p.triplets().any(|(r, c, _)| r / 2 != c / 2) {
            return ProjectionOp::Matrix(p);
        }
        let blocks = (0..p.rows() / 2)
            .map(|j| {
                let e = |r: usize, c: usize| p.get(2 * j + r, 2 * j + c);
                [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
            })
            .collect();
        ProjectionOp::Block(blocks)
    }
}

fn check_left_inverse(frame: &FrameSystem, v: &SparseMatrix) -> Result<()> {
    let vu = v.matmul(&frame.matrix())?;
    let (index, defect) = vu.identity_defect();
    if defect > LEFT_INVERSE_TOLERANCE {
        return Err(FrameError::NotLeftInverse { index: index + 1, defect });
    }
    Ok(())
}

/// `P = U V`, after checking `V U = I`.
pub fn projection_from_v(frame: &FrameSystem, op: &SynthesisOp) -> Result<ProjectionOp> {
    check_left_inverse(frame, &op.matrix)?;
    let p = frame.matrix().matmul(&op.matrix)?;
    Ok(ProjectionOp::from_matrix_for(frame, p))
}

/// Relative residuals of `U x = P d` for each `d`.
pub fn range_residuals(frame: &FrameSystem, p: &ProjectionOp, samples: &[GradedVector]) -> Result<Vec<f64>> {
    let solver = RangeSolver::new(&frame.matrix())?;
    samples.iter().map(|d| Ok(solver.solve(&p.apply(d)?)?.relative_residual)).collect()
}

/// `V = U⁻¹ P`: column `i` of `V` solves `U x = P e_i`.
pub fn v_from_projection(
    frame: &FrameSystem,
    p: &ProjectionOp,
    setting: &GradedSetting,
    plan: &IndexPlan,
) -> Result<SynthesisOp> {
    let m = frame.functional_count();
    if p.size() != m {
        return Err(FrameError::DimensionMismatch { expected: m, got: p.size() });
    }
    let solver = RangeSolver::new(&frame.matrix())?;
    let pm = p.matrix();
    let mut triplets = Vec::new();
    for (i, col) in pm.columns().into_iter().enumerate() {
        if col.is_zero() {
            continue;
        }
        let sol = solver.solve(&col)?;
        if sol.relative_residual > RANGE_TOLERANCE {
            return Err(FrameError::OutsideRange { residual: sol.relative_residual });
        }
        triplets.extend(sol.x.iter().map(|(r, z)| (r - 1, i, z.re)));
    }
    let v = SparseMatrix::from_triplets(frame.truncation(), m, triplets)?;
    check_left_inverse(frame, &v)?;
    SynthesisOp::from_matrix(v, setting, plan)
}

/// One point of a convergence profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub n: usize,
    pub residual: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRecord {
    pub sample: usize,
    pub k: usize,
    /// Last index carrying a nonzero expansion coefficient.
    pub support: usize,
    pub profile: Vec<ProfilePoint>,
    pub bound_holds: bool,
    /// Residual vanishes (up to the floor) from `support` on.
    pub exact_after_support: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub records: Vec<ExpansionRecord>,
}

impl ExpansionReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.bound_holds && r.exact_after_support)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ExpansionRecord> {
        self.records.iter().filter(|r| !(r.bound_holds && r.exact_after_support))
    }
}

fn default_grid(support: usize, m: usize) -> Vec<usize> {
    (0..=(support + 8).min(m)).collect()
}

fn profile_record(
    sample: usize,
    k: usize,
    coeffs: &GradedVector,
    grid: &[usize],
    scale: f64,
    mut point: impl FnMut(usize) -> Result<(f64, f64)>,
) -> Result<ExpansionRecord> {
    let support = coeffs.support_len();
    let floor = ZERO_FLOOR * scale;
    let mut profile = Vec::with_capacity(grid.len());
    let (mut bound_holds, mut exact) = (true, true);
    for &n in grid {
        let (residual, bound) = point(n)?;
        bound_holds &= residual <= bound * (1.0 + ZERO_FLOOR) + floor;
        if n >= support {
            exact &= residual <= floor;
        }
        profile.push(ProfilePoint { n, residual, bound });
    }
    Ok(ExpansionRecord { sample, k, support, profile, bound_holds, exact_after_support: exact })
}

/// Residuals `‖f − ∑_{i≤n} g_i(f) f_i‖_{s_k}` against the tail bound
/// `C_k |||∑_{i>n} g_i(f) e_i|||_k`.
pub fn verify_expansion(
    frame: &FrameSystem,
    op: &SynthesisOp,
    setting: &GradedSetting,
    samples: &[GradedVector],
    n_grid: Option<&[usize]>,
) -> Result<ExpansionReport> {
    let m = frame.functional_count();
    let mut records = Vec::new();
    for (si, f) in samples.iter().enumerate() {
        let coeffs = analyze(frame, f)?.coefficients;
        let grid = n_grid.map_or_else(|| default_grid(coeffs.support_len(), m), <[usize]>::to_vec);
        let partials: Vec<GradedVector> = grid.iter().map(|&n| synthesize(op, &coeffs, n.min(m))).collect::<Result<_>>()?;
        for lb in &op.bounds {
            let scale = graded_norm(f, &setting.x, lb.level)?;
            let rec = profile_record(si, lb.k, &coeffs, &grid, scale, |n| {
                let idx = grid.iter().position(|&g| g == n).unwrap();
                let residual = graded_norm(&f.sub(&partials[idx]), &setting.x, lb.level)?;
                let tail = graded_norm(&coeffs.tail(n), &setting.theta, lb.k)?;
                Ok((residual, lb.c * tail))
            })?;
            records.push(rec);
        }
    }
    Ok(ExpansionReport { records })
}

/// Residuals `‖g − ∑_{i≤n} g(f_i) g_i‖_{X*_{s̃_k}}` against
/// `‖T̃_k‖ |||∑_{i>n} g(f_i) δ_i|||_{Θ*_k}`, where `‖T̃_k‖` is the optimal
/// upper frame bound between `X_{s̃_k}` and `Θ_k`.
pub fn verify_dual_expansion(
    frame: &FrameSystem,
    dual: &DualSystem,
    setting: &GradedSetting,
    plan: &IndexPlan,
    dual_samples: &[GradedVector],
    n_grid: Option<&[usize]>,
) -> Result<ExpansionReport> {
    let m = frame.functional_count();
    if dual.len() != m {
        return Err(FrameError::DimensionMismatch { expected: m, got: dual.len() });
    }
    let rows = frame.matrix().transpose().columns();
    let (theta_dual, x_dual) = (setting.theta.dual(), setting.x.dual());
    let norms = plan
        .entries()
        .iter()
        .enumerate()
        .map(|(k, e)| Ok(frame_bounds(frame, setting, BoundLevels::new(k, e.upper, e.upper))?.upper))
        .collect::<Result<Vec<f64>>>()?;
    let mut records = Vec::new();
    for (si, g) in dual_samples.iter().enumerate() {
        if g.support_len() > frame.truncation() {
            return Err(FrameError::DimensionMismatch { expected: frame.truncation(), got: g.support_len() });
        }
        let coeffs = GradedVector::from_sparse((1..=m).map(|i| (i, g.pair(dual.get(i)))))?;
        let grid = n_grid.map_or_else(|| default_grid(coeffs.support_len(), m), <[usize]>::to_vec);
        let mut partials = Vec::with_capacity(grid.len());
        for &n in &grid {
            let mut acc = GradedVector::zero();
            for (i, z) in coeffs.iter().take_while(|&(i, _)| i <= n) {
                acc = acc.axpy(z, &rows[i - 1]);
            }
            partials.push(acc);
        }
        for (k, e) in plan.entries().iter().enumerate() {
            let scale = dual_norm(g, &x_dual, e.upper)?;
            let rec = profile_record(si, k, &coeffs, &grid, scale, |n| {
                let idx = grid.iter().position(|&g| g == n).unwrap();
                let residual = dual_norm(&g.sub(&partials[idx]), &x_dual, e.upper)?;
                let tail = dual_norm(&coeffs.tail(n), &theta_dual, k)?;
                Ok((residual, norms[k] * tail))
            })?;
            records.push(rec);
        }
    }
    Ok(ExpansionReport { records })
}

/// Starting object for an equivalence round trip.
#[derive(Debug, Clone, PartialEq)]
pub enum EquivalenceSource {
    Synthesis(SparseMatrix),
    Dual(DualSystem),
    Projection(ProjectionOp),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub name: String,
    pub passed: bool,
    pub measure: f64,
}

/// `C_k` along three routes: direct matrix norm, Bessel bound of the dual,
/// and the operator recovered from the projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundAgreement {
    pub k: usize,
    pub direct: f64,
    pub bessel: f64,
    pub recovered: f64,
}

impl BoundAgreement {
    pub fn agrees(&self) -> bool {
        close(self.direct, self.bessel, BOUND_AGREEMENT) && close(self.direct, self.recovered, BOUND_AGREEMENT)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub legs: Vec<Leg>,
    pub bounds: Vec<BoundAgreement>,
    pub synthesis: SynthesisOp,
    pub projection: ProjectionOp,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.legs.iter().all(|l| l.passed) && self.bounds.iter().all(BoundAgreement::agrees)
    }
}

/// Builds every other form from `source` (`V → dual → V′ → P → V″`) and
/// checks that they agree.
pub fn verify_equivalences(
    frame: &FrameSystem,
    setting: &GradedSetting,
    plan: &IndexPlan,
    source: EquivalenceSource,
) -> Result<EquivalenceReport> {
    let mut legs = Vec::new();
    let (v, source_p) = match source {
        EquivalenceSource::Synthesis(v) => (v, None),
        EquivalenceSource::Dual(d) => (d.matrix(), None),
        EquivalenceSource::Projection(p) => (v_from_projection(frame, &p, setting, plan)?.matrix, Some(p)),
    };
    let direct = SynthesisOp::from_matrix(v.clone(), setting, plan)?;
    let dual = build_dual_from_v(&v)?;
    let via_dual = build_v_from_dual(&dual, setting, plan)?;
    let diff = via_dual.matrix.max_abs_diff(&v);
    legs.push(Leg { name: "dual_rebuilds_v".into(), passed: diff == 0.0, measure: diff });

    let p = projection_from_v(frame, &via_dual)?;
    let idem = p.idempotence_defect();
    legs.push(Leg { name: "projection_idempotent".into(), passed: idem <= 1e-12, measure: idem });
    if let Some(src) = &source_p {
        let d = p.matrix().max_abs_diff(&src.matrix());
        legs.push(Leg { name: "projection_reproduced".into(), passed: d <= 1e-12, measure: d });
    }

    let recovered = v_from_projection(frame, &p, setting, plan)?;
    let (_, defect) = recovered.matrix.matmul(&frame.matrix())?.identity_defect();
    legs.push(Leg { name: "recovered_left_inverse".into(), passed: defect <= LEFT_INVERSE_TOLERANCE, measure: defect });

    let canon: Vec<GradedVector> = (1..=frame.functional_count()).map(GradedVector::canonical).collect();
    let ranges = range_residuals(frame, &p, &canon)?;
    let worst = ranges.iter().copied().fold(0.0, f64::max);
    legs.push(Leg { name: "range_of_projection".into(), passed: worst <= RANGE_TOLERANCE, measure: worst });

    let bounds = direct
        .bounds
        .iter()
        .zip(&via_dual.bounds)
        .zip(&recovered.bounds)
        .map(|((a, b), c)| BoundAgreement { k: a.k, direct: a.c, bessel: b.c, recovered: c.c })
        .collect();
    Ok(EquivalenceReport { legs, bounds, synthesis: via_dual, projection: p })
}

/// The frame's canonical left inverse when `U` is diagonal or paired:
/// `f_i = e_i / b_i`, or `f_{2j−1} = 0`, `f_{2j} = e_j / b_pair(j)`.
pub fn canonical_left_inverse(frame: &FrameSystem) -> Result<SparseMatrix> {
    let n = frame.truncation();
    match frame.form() {
        FrameForm::Diagonal(b) => SparseMatrix::from_triplets(n, n, (0..n).map(|i| (i, i, b.value(i + 1).recip()))),
        FrameForm::Block(b) => {
            SparseMatrix::from_triplets(n, 2 * n, (0..n).map(|j| (j, 2 * j + 1, b.value(j + 1).recip())))
        }
        FrameForm::Dense(_) => Err(FrameError::WrongForm),
    }
}

/// `V = U⁺`: column `i` is the least-squares solution of `U x = e_i`.
pub fn least_squares_left_inverse(frame: &FrameSystem) -> Result<SparseMatrix> {
    let solver = RangeSolver::new(&frame.matrix())?;
    let m = frame.functional_count();
    let mut triplets = Vec::new();
    for i in 0..m {
        let sol = solver.solve(&GradedVector::canonical(i + 1))?;
        triplets.extend(sol.x.iter().map(|(r, z)| (r - 1, i, z.re)));
    }
    let v = SparseMatrix::from_triplets(frame.truncation(), m, triplets)?;
    check_left_inverse(frame, &v)?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multilevel::IndexPlan;

    fn setting(n: usize, m: usize, levels: usize) -> GradedSetting {
        GradedSetting::new(WeightGrading::power(levels, n).unwrap(), WeightGrading::power(levels, m).unwrap())
    }

    fn paired_setting(n: usize, levels: usize) -> GradedSetting {
        GradedSetting::new(
            WeightGrading::shifted_power(2, levels, n).unwrap(),
            WeightGrading::power(levels, 2 * n).unwrap(),
        )
    }

    fn alternating_op(r: u32, n: usize, levels: usize) -> (FrameSystem, SynthesisOp, GradedSetting, IndexPlan) {
        let frame = FrameSystem::alternating_power(r, n).unwrap();
        let s = setting(n, n, levels + r as usize);
        let plan = IndexPlan::shifted(levels, r as usize, 1.0, 1.0).unwrap();
        let v = canonical_left_inverse(&frame).unwrap();
        let op = SynthesisOp::from_matrix(v, &s, &plan).unwrap();
        (frame, op, s, plan)
    }

    #[test]
    fn synthesize_examples() {
        let (_, op, _, _) = alternating_op(1, 8, 3);
        let e3 = GradedVector::canonical(3);
        for n in 3..=8 {
            assert_eq!(synthesize(&op, &e3, n).unwrap(), *op.dual().get(3));
        }
        let d = GradedVector::from_real(&[1.0, 2.0]).unwrap();
        assert_eq!(synthesize(&op, &d, 2).unwrap(), GradedVector::from_real(&[1.0, 1.0]).unwrap());
        assert!(synthesize(&op, &GradedVector::zero(), 8).unwrap().is_zero());
        assert!(synthesize(&op, &d, 9).is_err());
    }

    #[test]
    fn bound_tables() {
        let s = setting(16, 16, 4);
        let plan = IndexPlan::shifted(4, 0, 1.0, 1.0).unwrap();
        let ident = SynthesisOp::from_matrix(SparseMatrix::identity(16), &s, &plan).unwrap();
        assert!(ident.bounds().iter().all(|b| b.c == 1.0));
        let dual = DualSystem::new((1..=16).map(|i| GradedVector::canonical(i).scale_real(2.0)).collect(), 16).unwrap();
        let op = build_v_from_dual(&dual, &s, &plan).unwrap();
        assert!(op.bounds().iter().all(|b| b.c == 2.0));

        let (_, op, _, _) = alternating_op(2, 32, 4);
        assert!(op.bounds().iter().all(|b| b.c == 1.0));
    }

    #[test]
    fn dual_from_v_examples() {
        let dual = build_dual_from_v(&SparseMatrix::identity(4)).unwrap();
        assert_eq!(dual.get(2), &GradedVector::canonical(2));
        let (_, op, _, _) = alternating_op(1, 8, 2);
        assert_eq!(op.dual().get(4), &GradedVector::canonical(4).scale_real(0.25));
    }

    #[test]
    fn paired_projection_rule() {
        let frame = FrameSystem::paired_alternating_power(1, 8).unwrap();
        let s = paired_setting(8, 4);
        let plan = IndexPlan::shifted(3, 1, 1.0, 2f64.sqrt()).unwrap();
        let v = canonical_left_inverse(&frame).unwrap();
        let op = SynthesisOp::from_matrix(v, &s, &plan).unwrap();
        let p = projection_from_v(&frame, &op).unwrap();
        assert_eq!(p, ProjectionOp::even_selection(8));
        assert_eq!(p.idempotence_defect(), 0.0);
        let d = GradedVector::from_real(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(p.apply(&d).unwrap(), GradedVector::from_real(&[2.0, 2.0, 4.0, 4.0]).unwrap());
    }

    #[test]
    fn v_from_even_selection() {
        let frame = FrameSystem::paired_alternating_power(3, 8).unwrap();
        let s = paired_setting(8, 6);
        let plan = IndexPlan::shifted(3, 3, 1.0, 2f64.sqrt()).unwrap();
        let op = v_from_projection(&frame, &ProjectionOp::even_selection(8), &s, &plan).unwrap();
        assert!(op.dual().get(1).is_zero());
        let f2 = op.dual().get(2);
        assert_eq!(f2.nnz(), 1);
        assert!((f2.get(1).re - 1.0).abs() < 1e-15);
        assert!(op.apply(&GradedVector::canonical(2)).unwrap().max_abs_diff(&GradedVector::canonical(1)) < 1e-15);
    }

    #[test]
    fn degenerate_projection_is_rejected() {
        let frame = FrameSystem::alternating_power(1, 8).unwrap();
        let s = setting(8, 8, 3);
        let plan = IndexPlan::shifted(2, 1, 1.0, 1.0).unwrap();
        let zero = ProjectionOp::Matrix(SparseMatrix::zeros(8, 8));
        assert!(matches!(v_from_projection(&frame, &zero, &s, &plan), Err(FrameError::NotLeftInverse { .. })));

        let paired = FrameSystem::paired_alternating_power(1, 4).unwrap();
        let swap = ProjectionOp::Block(vec![[[1.0, 0.0], [0.0, 0.0]]; 4]);
        let ps = paired_setting(4, 3);
        assert!(matches!(v_from_projection(&paired, &swap, &ps, &plan), Err(FrameError::OutsideRange { .. })));
    }

    #[test]
    fn expansion_profile_example() {
        let (frame, op, s, _) = alternating_op(1, 8, 3);
        let f = GradedVector::from_real(&[1.0, 1.0]).unwrap();
        let r = verify_expansion(&frame, &op, &s, &[f], Some(&[0, 1, 2])).unwrap();
        let rec = r.records.iter().find(|r| r.k == 1).unwrap();
        let res: Vec<f64> = rec.profile.iter().map(|p| p.residual).collect();
        assert!((res[0] - 5f64.sqrt()).abs() < 1e-15 && res[1] == 2.0 && res[2] == 0.0);
        assert_eq!(rec.profile[1].bound, 4.0);
        assert!(r.passed());
    }

    #[test]
    fn dual_expansion_examples() {
        let (frame, op, s, plan) = alternating_op(2, 16, 2);
        let g = GradedVector::canonical(2);
        let r = verify_dual_expansion(&frame, op.dual(), &s, &plan, &[g, GradedVector::zero()], None).unwrap();
        assert!(r.passed());
        for rec in &r.records {
            assert!(rec.profile.iter().filter(|p| p.n >= 2).all(|p| p.residual == 0.0));
        }
        let g5 = GradedVector::from_real(&[1.0, -2.0, 0.5, 3.0, 1.5]).unwrap();
        let r = verify_dual_expansion(&frame, op.dual(), &s, &plan, &[g5], None).unwrap();
        assert!(r.passed());
        assert_eq!(r.records[0].support, 5);
    }

    #[test]
    fn equivalence_round_trips() {
        let (frame, op, s, plan) = alternating_op(2, 32, 4);
        let rep = verify_equivalences(&frame, &s, &plan, EquivalenceSource::Synthesis(op.matrix().clone())).unwrap();
        assert!(rep.passed(), "{:?}", rep.legs);
        assert!(rep.projection.idempotence_defect() <= 1e-15);

        let paired = FrameSystem::paired_alternating_power(1, 32).unwrap();
        let ps = paired_setting(32, 5);
        let pplan = IndexPlan::shifted(4, 1, 1.0, 2f64.sqrt()).unwrap();
        let rep = verify_equivalences(&paired, &ps, &pplan, EquivalenceSource::Projection(ProjectionOp::even_selection(32)))
            .unwrap();
        assert!(rep.passed(), "{:?} {:?}", rep.legs, rep.bounds);

        let id = FrameSystem::identity(16).unwrap();
        let is = setting(16, 16, 3);
        let iplan = IndexPlan::shifted(3, 0, 1.0, 1.0).unwrap();
        let dual = DualSystem::new((1..=16).map(GradedVector::canonical).collect(), 16).unwrap();
        let rep = verify_equivalences(&id, &is, &iplan, EquivalenceSource::Dual(dual)).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.projection, ProjectionOp::identity(16));
    }

    #[test]
    fn least_squares_inverse_of_golden_matrix() {
        let frame = FrameSystem::dense(SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap()).unwrap();
        let v = least_squares_left_inverse(&frame).unwrap();
        let expect = [[1.0, -1.0], [0.0, 1.0]];
        for (r, row) in expect.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                assert!((v.get(r, c) - e).abs() < 1e-12);
            }
        }
        let paired = FrameSystem::paired_alternating_power(1, 4).unwrap();
        let v = least_squares_left_inverse(&paired).unwrap();
        assert!((v.get(1, 2) - 0.125).abs() < 1e-15 && (v.get(1, 3) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn paired_projection_norm_is_sqrt2() {
        let p = ProjectionOp::even_selection(16);
        let theta = WeightGrading::power(4, 32).unwrap();
        for k in 0..=4 {
            let n = p.norm(&theta, k).unwrap();
            assert!(n <= 2f64.sqrt() * (1.0 + 1e-12));
        }
        assert!((p.norm(&theta, 0).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }
}

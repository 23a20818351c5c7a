#![allow(dead_code)]

use frechet_frames::frame::{analyze, frame_bounds_analytic, BoundLevels, Coefficients, FrameForm, FrameSystem, GradedSetting, PowerLaw};
use frechet_frames::graded::{graded_norm, truncation_constant, GradedVector, WeightGrading};
use frechet_frames::linalg::SparseMatrix;
use frechet_frames::multilevel::IndexPlan;
use frechet_frames::reconstruction::{
    canonical_left_inverse, least_squares_left_inverse, projection_from_v, SynthesisOp,
};
use frechet_frames::scenario::{self, Format, ScenarioConfig, ScenarioKind};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub fn vector(max_len: usize) -> impl Strategy<Value = GradedVector> {
    prop::collection::vec(-10.0f64..10.0, 1..=max_len)
        .prop_filter_map("nonzero", |v| GradedVector::from_real(&v).ok().filter(|g| !g.is_zero()))
}

pub fn grading(levels: usize, n: usize) -> impl Strategy<Value = WeightGrading> {
    prop_oneof![
        Just(WeightGrading::power(levels, n).unwrap()),
        (1u32..=3).prop_map(move |f| WeightGrading::shifted_power(f, levels, n).unwrap()),
        Just(WeightGrading::log_exponential(levels, n).unwrap()),
    ]
}

pub fn periodic_weights() -> impl Strategy<Value = Coefficients> {
    prop::collection::vec((0.25f64..4.0, 0u32..=3), 1..=3).prop_map(|classes| {
        Coefficients::Periodic(classes.into_iter().map(|(coef, e)| PowerLaw { coef, exponent: e as f64 }).collect())
    })
}

/// A diagonal or block frame with periodic power weights and matching power gradings.
#[derive(Debug, Clone)]
pub struct FrameCase {
    pub frame: FrameSystem,
    pub setting: GradedSetting,
}

pub const CASE_LEVELS: usize = 6;

pub fn structured_frame(max_n: usize) -> impl Strategy<Value = FrameCase> {
    (any::<bool>(), periodic_weights(), 2..=max_n).prop_map(|(block, b, n)| {
        if block {
            FrameCase {
                frame: FrameSystem::block(b, n).unwrap(),
                setting: GradedSetting::new(
                    WeightGrading::shifted_power(2, CASE_LEVELS, n).unwrap(),
                    WeightGrading::power(CASE_LEVELS, 2 * n).unwrap(),
                ),
            }
        } else {
            FrameCase {
                frame: FrameSystem::diagonal(b, n).unwrap(),
                setting: GradedSetting::new(
                    WeightGrading::power(CASE_LEVELS, n).unwrap(),
                    WeightGrading::power(CASE_LEVELS, n).unwrap(),
                ),
            }
        }
    })
}

/// Tall dense frames `I + E` with small perturbations, so `U` stays injective.
pub fn dense_frame() -> impl Strategy<Value = FrameCase> {
    (2usize..=6, 0usize..=4)
        .prop_flat_map(|(n, extra)| {
            let m = n + extra;
            (Just((n, m)), prop::collection::vec(-0.3f64..0.3, n * m))
        })
        .prop_map(|((n, m), noise)| {
            let rows: Vec<Vec<f64>> = (0..m)
                .map(|i| (0..n).map(|j| noise[i * n + j] + if i == j { 1.0 } else { 0.0 }).collect())
                .collect();
            FrameCase {
                frame: FrameSystem::dense(SparseMatrix::from_dense(&rows).unwrap()).unwrap(),
                setting: GradedSetting::new(
                    WeightGrading::power(CASE_LEVELS, n).unwrap(),
                    WeightGrading::power(CASE_LEVELS, m).unwrap(),
                ),
            }
        })
}

pub fn any_frame() -> impl Strategy<Value = FrameCase> {
    prop_oneof![structured_frame(24), dense_frame()]
}

pub fn levels() -> impl Strategy<Value = BoundLevels> {
    (0..=CASE_LEVELS, 0..=CASE_LEVELS, 0..=CASE_LEVELS).prop_map(|(k, a, b)| BoundLevels::new(k, a.min(b), a.max(b)))
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn fail(msg: String) -> Result<(), TestCaseError> {
    Err(TestCaseError::fail(msg))
}

pub fn left_inverse(case: &FrameCase) -> SparseMatrix {
    match canonical_left_inverse(&case.frame) {
        Ok(v) => v,
        Err(_) => least_squares_left_inverse(&case.frame).unwrap(),
    }
}

fn restrict(f: &GradedVector, n: usize) -> GradedVector {
    f.prefix(n)
}

pub fn check_norm_monotone((v, g): (GradedVector, WeightGrading)) -> Result<(), TestCaseError> {
    for s in 0..g.levels() {
        let (a, b) = (graded_norm(&v, &g, s).unwrap(), graded_norm(&v, &g, s + 1).unwrap());
        if a > b * (1.0 + 1e-12) {
            return fail(format!("‖v‖_{s} = {a} > ‖v‖_{} = {b}", s + 1));
        }
    }
    Ok(())
}

pub fn norm_monotone_input() -> impl Strategy<Value = (GradedVector, WeightGrading)> {
    (vector(48), grading(6, 64))
}

pub fn check_truncation_unit((vs, g, s): (Vec<GradedVector>, WeightGrading, usize)) -> Result<(), TestCaseError> {
    let lambda = truncation_constant(&g, s, &vs).unwrap();
    if (lambda - 1.0).abs() > 1e-12 {
        return fail(format!("λ = {lambda}"));
    }
    Ok(())
}

pub fn truncation_input() -> impl Strategy<Value = (Vec<GradedVector>, WeightGrading, usize)> {
    (prop::collection::vec(vector(48), 1..=4), grading(6, 64), 0usize..=6)
}

pub fn check_linearity(
    (case, f, g, alpha, beta): (FrameCase, GradedVector, GradedVector, f64, f64),
) -> Result<(), TestCaseError> {
    let n = case.frame.truncation();
    let (f, g) = (restrict(&f, n), restrict(&g, n));
    let lhs = analyze(&case.frame, &f.scale_real(alpha).add(&g.scale_real(beta))).unwrap().coefficients;
    let uf = analyze(&case.frame, &f).unwrap().coefficients;
    let ug = analyze(&case.frame, &g).unwrap().coefficients;
    let rhs = uf.scale_real(alpha).add(&ug.scale_real(beta));
    let scale = lhs.iter().chain(rhs.iter()).map(|(_, z)| z.norm()).fold(1.0, f64::max);
    let diff = lhs.max_abs_diff(&rhs);
    if diff > 1e-12 * scale {
        return fail(format!("linearity defect {diff}"));
    }
    Ok(())
}

pub fn linearity_input() -> impl Strategy<Value = (FrameCase, GradedVector, GradedVector, f64, f64)> {
    (any_frame(), vector(24), vector(24), -5.0f64..5.0, -5.0f64..5.0)
}

pub fn check_scaling((case, levels, c): (FrameCase, BoundLevels, f64)) -> Result<(), TestCaseError> {
    let base = frame_bounds_analytic(&case.frame, &case.setting, levels).unwrap();
    let scaled = frame_bounds_analytic(&case.frame.scaled(c).unwrap(), &case.setting, levels).unwrap();
    if !rel_close(scaled.lower, c * base.lower, 1e-12) || !rel_close(scaled.upper, c * base.upper, 1e-12) {
        return fail(format!("bounds {:?} vs {c}·{:?}", (scaled.lower, scaled.upper), (base.lower, base.upper)));
    }
    if scaled.lower_witness != base.lower_witness || scaled.upper_witness != base.upper_witness {
        return fail("witness moved under scaling".into());
    }
    if scaled.lower_tail.is_certified() != base.lower_tail.is_certified() {
        return fail("tail certificate changed under scaling".into());
    }
    Ok(())
}

pub fn scaling_input() -> impl Strategy<Value = (FrameCase, BoundLevels, f64)> {
    (structured_frame(64), levels(), 0.1f64..10.0)
}

fn projection_and_v(case: &FrameCase) -> (frechet_frames::reconstruction::ProjectionOp, SynthesisOp) {
    let plan = IndexPlan::shifted(1, 0, 1.0, 1.0).unwrap();
    let op = SynthesisOp::from_matrix(left_inverse(case), &case.setting, &plan).unwrap();
    (projection_from_v(&case.frame, &op).unwrap(), op)
}

pub fn check_idempotence((case, d): (FrameCase, GradedVector)) -> Result<(), TestCaseError> {
    let (p, _) = projection_and_v(&case);
    let d = restrict(&d, case.frame.functional_count());
    let once = p.apply(&d).unwrap();
    let twice = p.apply(&once).unwrap();
    let scale = once.iter().map(|(_, z)| z.norm()).fold(1.0, f64::max);
    let diff = twice.max_abs_diff(&once);
    // Dense projections come from a least-squares left inverse.
    let tol = if matches!(case.frame.form(), FrameForm::Dense(_)) { 1e-10 } else { 1e-12 };
    if diff > tol * scale {
        return fail(format!("P²d − Pd = {diff}"));
    }
    Ok(())
}

pub fn idempotence_input() -> impl Strategy<Value = (FrameCase, GradedVector)> {
    (any_frame(), vector(48))
}

pub fn check_left_inverse_law((case, f): (FrameCase, GradedVector)) -> Result<(), TestCaseError> {
    let (_, op) = projection_and_v(&case);
    let f = restrict(&f, case.frame.truncation());
    let back = op.apply(&analyze(&case.frame, &f).unwrap().coefficients).unwrap();
    let scale = f.iter().map(|(_, z)| z.norm()).fold(0.0, f64::max);
    let diff = back.max_abs_diff(&f);
    if diff > 1e-10 * scale {
        return fail(format!("VUf − f = {diff}"));
    }
    Ok(())
}

pub fn left_inverse_input() -> impl Strategy<Value = (FrameCase, GradedVector)> {
    (any_frame(), vector(24))
}

pub fn report_config() -> impl Strategy<Value = ScenarioConfig> {
    (
        prop_oneof![Just(ScenarioKind::Exf1), Just(ScenarioKind::Exf2), Just(ScenarioKind::Runo)],
        1u32..=3,
        16usize..=48,
        2usize..=4,
        1usize..=8,
    )
        .prop_map(|(kind, r, n, k, n_max)| {
            let mut c = ScenarioConfig::new(kind);
            c.r = r;
            c.truncation = n;
            c.levels = k;
            c.n_max = n_max;
            c.runo.prefixes = vec![10, 100];
            c
        })
}

pub fn check_report_determinism(cfg: ScenarioConfig) -> Result<(), TestCaseError> {
    let a = scenario::run(&cfg).unwrap();
    let b = scenario::run(&cfg).unwrap();
    for format in [Format::Csv, Format::Json] {
        if scenario::render(&a, format).unwrap() != scenario::render(&b, format).unwrap() {
            return fail(format!("{format:?} output differs between runs"));
        }
    }
    let json = scenario::render(&a, Format::Json).unwrap();
    let back = scenario::parse_report(std::str::from_utf8(&json).unwrap()).unwrap();
    if back != a {
        return fail("JSON round trip changed the report".into());
    }
    if !a.hash_mismatches().is_empty() {
        return fail("row hash differs from the echoed config".into());
    }
    Ok(())
}

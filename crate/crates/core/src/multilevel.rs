//! Level plans `(s_k, s̃_k, A_k, B_k)`, strictness classification and the
//! subsequence selection that turns a left inverse's continuity data into a
//! re-indexed frame plan.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::frame::{
    frame_bounds, inequality_terms, within, BoundLevels, ClassExtent, FrameBounds, FrameForm,
    FrameSystem, GradedSetting, RatioSequence, Side, Tail,
};
use crate::graded::{GradedVector, Weighting};

/// One level `k` of a plan: `A_k‖f‖_{s_k} ≤ |||Uf|||_k ≤ B_k‖f‖_{s̃_k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub lower: usize,
    pub upper: usize,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexPlan {
    entries: Vec<PlanEntry>,
}

impl IndexPlan {
    pub fn new(entries: Vec<PlanEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(FrameError::Empty("index plan"));
        }
        for (k, e) in entries.iter().enumerate() {
            if e.lower > e.upper {
                return Err(FrameError::InvalidPlan(format!("s_{k} = {} exceeds s̃_{k} = {}", e.lower, e.upper)));
            }
            if !(e.a.is_finite() && e.b.is_finite() && e.a > 0.0 && e.a <= e.b) {
                return Err(FrameError::InvalidPlan(format!("need 0 < A_{k} ≤ B_{k}, got {} and {}", e.a, e.b)));
            }
        }
        for (k, w) in entries.windows(2).enumerate() {
            if w[1].lower < w[0].lower || w[1].upper < w[0].upper {
                return Err(FrameError::InvalidPlan(format!("levels decrease between k = {k} and k = {}", k + 1)));
            }
        }
        Ok(Self { entries })
    }

    /// `s_k = k`, `s̃_k = k + shift` for `k < len`, constant `A, B`.
    pub fn shifted(len: usize, shift: usize, a: f64, b: f64) -> Result<Self> {
        Self::from_fn(len, |k| PlanEntry { lower: k, upper: k + shift, a, b })
    }

    pub fn from_fn(len: usize, f: impl FnMut(usize) -> PlanEntry) -> Result<Self> {
        Self::new((0..len).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, k: usize) -> Result<&PlanEntry> {
        self.entries.get(k).ok_or(FrameError::PlanTooShort { needed: k, len: self.entries.len() })
    }

    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }

    /// Largest X level the plan refers to.
    pub fn max_level(&self) -> usize {
        self.entries.last().map_or(0, |e| e.upper)
    }

    fn check_against(&self, setting: &GradedSetting) -> Result<()> {
        setting.theta.check_level(self.len() - 1)?;
        setting.x.check_level(self.max_level())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelReport {
    pub k: usize,
    pub plan: PlanEntry,
    pub optimal: FrameBounds,
    /// `A_k^opt − A_k`
    pub lower_slack: f64,
    /// `B_k − B_k^opt`
    pub upper_slack: f64,
}

impl LevelReport {
    /// The plan constants are valid for the optimal bounds, including beyond the truncation.
    pub fn constants_hold(&self) -> bool {
        within(self.plan.a, self.optimal.lower)
            && within(self.optimal.upper, self.plan.b)
            && self.optimal.lower_tail != Tail::Unbounded
            && self.optimal.upper_tail != Tail::Unbounded
            && match self.optimal.upper_tail {
                Tail::Limit(l) => within(l, self.plan.b),
                _ => true,
            }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleViolation {
    pub k: usize,
    pub sample: usize,
    pub side: Side,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreFrameReport {
    pub levels: Vec<LevelReport>,
    pub violations: Vec<SampleViolation>,
}

impl PreFrameReport {
    /// Every sample satisfied the inequality at every level.
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&SampleViolation> {
        self.violations.first()
    }

    pub fn constants_hold(&self) -> bool {
        self.levels.iter().all(LevelReport::constants_hold)
    }
}

/// Checks the plan's inequality at every level on every sample and
/// compares the plan constants with the optimal ones.
pub fn verify_pre_f_frame(
    frame: &FrameSystem,
    setting: &GradedSetting,
    plan: &IndexPlan,
    samples: &[GradedVector],
) -> Result<PreFrameReport> {
    plan.check_against(setting)?;
    let mut levels = Vec::with_capacity(plan.len());
    let mut violations = Vec::new();
    for (k, e) in plan.entries.iter().enumerate() {
        let bl = BoundLevels::new(k, e.lower, e.upper);
        let optimal = frame_bounds(frame, setting, bl)?;
        for (i, f) in samples.iter().enumerate() {
            let (lo, mid, hi) = inequality_terms(frame, setting, bl, f)?;
            if !within(e.a * lo, mid) {
                violations.push(SampleViolation { k, sample: i, side: Side::Lower, lhs: e.a * lo, rhs: mid });
            }
            if !within(mid, e.b * hi) {
                violations.push(SampleViolation { k, sample: i, side: Side::Upper, lhs: mid, rhs: e.b * hi });
            }
        }
        levels.push(LevelReport {
            k,
            plan: *e,
            lower_slack: optimal.lower - e.a,
            upper_slack: e.b - optimal.upper,
            optimal,
        });
    }
    Ok(PreFrameReport { levels, violations })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strictness {
    Strict,
    NotStrict,
    Undetermined,
}

/// Canonical vectors `ψ_j`, `j ≡ residue + 1 (mod period)`, along which the
/// ratio `|||Uψ_j|||_s / ‖ψ_j‖_n` grows without bound or tends to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessFamily {
    pub residue: usize,
    pub period: usize,
    pub side: Side,
    /// Growth exponent of the ratio along the family.
    pub exponent: f64,
    /// `(j, ratio)` for the first few members.
    pub samples: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedCandidate {
    pub n: usize,
    pub witnesses: Vec<WitnessFamily>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevelCertificate {
    /// `A_s‖φ‖_n ≤ |||Uφ|||_s ≤ B_s‖φ‖_n` with `n = n_s`.
    Admissible { n: usize, lower: f64, upper: f64, rejected: Vec<RejectedCandidate> },
    /// Every `n ≤ n_max` fails; `beyond_bound` when every larger `n` fails too.
    Failing { rejected: Vec<RejectedCandidate>, beyond_bound: bool },
    /// Monotonicity of the ratio at `(s, n)` could not be certified.
    Undetermined { n: usize, rejected: Vec<RejectedCandidate> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStrictness {
    pub s: usize,
    pub certificate: LevelCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrictnessVerdict {
    pub verdict: Strictness,
    pub n_max: usize,
    pub levels: Vec<LevelStrictness>,
}

impl StrictnessVerdict {
    /// `n_s` per level when every level is admissible.
    pub fn indices(&self) -> Option<Vec<usize>> {
        self.levels
            .iter()
            .map(|l| match l.certificate {
                LevelCertificate::Admissible { n, .. } => Some(n),
                _ => None,
            })
            .collect()
    }
}

const WITNESS_SAMPLES: usize = 4;

/// Searches, for each Θ level `s < levels`, the smallest X level `n ≤ n_max`
/// at which `|||Uφ|||_s` is equivalent to `‖φ‖_n` on all of `X`.
pub fn classify_strictness(
    frame: &FrameSystem,
    setting: &GradedSetting,
    levels: usize,
    n_max: usize,
) -> Result<StrictnessVerdict> {
    if matches!(frame.form(), FrameForm::Dense(_)) {
        return Err(FrameError::WrongForm);
    }
    if levels == 0 {
        return Err(FrameError::Empty("strictness needs at least one level"));
    }
    setting.theta.check_level(levels - 1)?;
    let x = setting.x.resized(setting.x.levels().max(n_max), setting.x.truncation())?;
    let setting = GradedSetting::new(x, setting.theta.clone());
    let mut out = Vec::with_capacity(levels);
    for s in 0..levels {
        out.push(LevelStrictness { s, certificate: classify_level(frame, &setting, s, n_max)? });
    }
    let verdict = if out.iter().any(|l| matches!(l.certificate, LevelCertificate::Failing { beyond_bound: true, .. })) {
        Strictness::NotStrict
    } else if out.iter().all(|l| matches!(l.certificate, LevelCertificate::Admissible { .. })) {
        Strictness::Strict
    } else {
        Strictness::Undetermined
    };
    Ok(StrictnessVerdict { verdict, n_max, levels: out })
}

fn classify_level(frame: &FrameSystem, setting: &GradedSetting, s: usize, n_max: usize) -> Result<LevelCertificate> {
    let mut rejected = Vec::new();
    let mut last_vanishes = false;
    for n in 0..=n_max {
        let seq = RatioSequence::new(frame, setting, s, n)?;
        let Some(laws) = &seq.laws else {
            return Ok(LevelCertificate::Undetermined { n, rejected });
        };
        let (lower_tail, upper_tail) = (seq.lower_tail(), seq.upper_tail());
        if !lower_tail.is_certified() || !upper_tail.is_certified() {
            return Ok(LevelCertificate::Undetermined { n, rejected });
        }
        if lower_tail != Tail::Unbounded && upper_tail != Tail::Unbounded {
            let upper = match upper_tail {
                Tail::Limit(l) => l,
                _ => seq.argmax().1,
            };
            return Ok(LevelCertificate::Admissible { n, lower: seq.argmin().1, upper, rejected });
        }
        let truncation = seq.values.len();
        let witnesses: Vec<WitnessFamily> = laws
            .iter()
            .filter_map(|law| {
                let side = if law.upper_extent(truncation) == ClassExtent::Unbounded {
                    Side::Upper
                } else if law.lower_extent(truncation) == ClassExtent::Unbounded {
                    Side::Lower
                } else {
                    return None;
                };
                let samples = (law.residue + 1..=truncation)
                    .step_by(law.period)
                    .take(WITNESS_SAMPLES)
                    .map(|j| (j, seq.values[j - 1]))
                    .collect();
                Some(WitnessFamily { residue: law.residue, period: law.period, side, exponent: law.exponent, samples })
            })
            .collect();
        last_vanishes = witnesses.iter().any(|w| w.side == Side::Lower);
        rejected.push(RejectedCandidate { n, witnesses });
    }
    // A vanishing lower ratio keeps vanishing as n grows, since every class
    // exponent decreases with n.
    Ok(LevelCertificate::Failing { rejected, beyond_bound: last_vanishes })
}

/// `(p_k, C_k)`: `‖Vd‖_{s_k} ≤ C_k |||d|||_{p_k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityData {
    entries: Vec<(usize, f64)>,
}

impl ContinuityData {
    pub fn new(entries: Vec<(usize, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(FrameError::Empty("continuity data"));
        }
        if let Some((k, &(_, c))) = entries.iter().enumerate().find(|(_, (_, c))| !(c.is_finite() && *c > 0.0)) {
            return Err(FrameError::InvalidParameters(format!("C_{k} = {c} must be positive")));
        }
        Ok(Self { entries })
    }

    /// `C_k = 1` for the given `p_k`.
    pub fn from_levels(p: &[usize]) -> Result<Self> {
        Self::new(p.iter().map(|&p| (p, 1.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// `n_k = max(k, p_k)`
    pub n: Vec<usize>,
    /// Selected indices `k_j`.
    pub k: Vec<usize>,
    pub w: Vec<usize>,
    pub r: Vec<usize>,
    pub w_tilde: Vec<usize>,
    pub a_tilde: Vec<f64>,
    pub b_tilde: Vec<f64>,
}

impl SelectionResult {
    /// `w`, `r`, `w̃` strictly increasing and `w_j ≤ w̃_j`.
    pub fn is_monotone(&self) -> bool {
        let inc = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
        inc(&self.w) && inc(&self.r) && inc(&self.w_tilde) && self.w.iter().zip(&self.w_tilde).all(|(a, b)| a <= b)
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }
}

/// `n_k = max(k, p_k)` over the continuity data, then the greedy first strictly
/// increasing subsequence `n_{k_0} < n_{k_1} < …` with `k_0 = 0`.
pub fn select_subsequence(plan: &IndexPlan, continuity: &ContinuityData) -> Result<SelectionResult> {
    let n: Vec<usize> = continuity.entries.iter().enumerate().map(|(k, &(p, _))| k.max(p)).collect();
    let needed = *n.iter().max().expect("nonempty");
    if needed >= plan.len() {
        return Err(FrameError::PlanTooShort { needed, len: plan.len() });
    }
    let mut ks = vec![0];
    for k in 1..n.len() {
        if n[k] > n[*ks.last().unwrap()] {
            ks.push(k);
        }
    }
    let e = &plan.entries;
    Ok(SelectionResult {
        w: ks.iter().map(|&k| e[k].lower).collect(),
        r: ks.iter().map(|&k| n[k]).collect(),
        w_tilde: ks.iter().map(|&k| e[n[k]].upper).collect(),
        a_tilde: ks.iter().map(|&k| e[k].a).collect(),
        b_tilde: ks.iter().map(|&k| e[n[k]].b).collect(),
        k: ks,
        n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionCheck {
    pub checked: usize,
    pub violations: Vec<SampleViolation>,
}

impl SelectionCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-checks `Ã_j‖f‖_{w_j} ≤ |||Uf|||_{r_j} ≤ B̃_j‖f‖_{w̃_j}` on the samples;
/// violations are indexed by `j`.
pub fn verify_selection(
    frame: &FrameSystem,
    setting: &GradedSetting,
    selection: &SelectionResult,
    samples: &[GradedVector],
) -> Result<SelectionCheck> {
    let mut violations = Vec::new();
    let mut checked = 0;
    for j in 0..selection.len() {
        let bl = BoundLevels::new(selection.r[j], selection.w[j], selection.w_tilde[j]);
        let (a, b) = (selection.a_tilde[j], selection.b_tilde[j]);
        for (i, f) in samples.iter().enumerate() {
            checked += 1;
            let (lo, mid, hi) = inequality_terms(frame, setting, bl, f)?;
            if !within(a * lo, mid) {
                violations.push(SampleViolation { k: j, sample: i, side: Side::Lower, lhs: a * lo, rhs: mid });
            }
            if !within(mid, b * hi) {
                violations.push(SampleViolation { k: j, sample: i, side: Side::Upper, lhs: mid, rhs: b * hi });
            }
        }
    }
    Ok(SelectionCheck { checked, violations })
}

/// Relative agreement used when comparing computed constants.
pub(crate) fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Coefficients;
    use crate::graded::WeightGrading;

    fn setting(n: usize, levels: usize) -> GradedSetting {
        GradedSetting::new(WeightGrading::power(levels, n).unwrap(), WeightGrading::power(levels, n).unwrap())
    }

    fn canonical(n: usize) -> Vec<GradedVector> {
        (1..=n).map(GradedVector::canonical).collect()
    }

    #[test]
    fn plan_validation() {
        assert!(IndexPlan::shifted(4, 2, 1.0, 1.0).is_ok());
        let bad = vec![PlanEntry { lower: 2, upper: 1, a: 1.0, b: 1.0 }];
        assert!(matches!(IndexPlan::new(bad), Err(FrameError::InvalidPlan(_))));
        let dec = vec![
            PlanEntry { lower: 1, upper: 2, a: 1.0, b: 1.0 },
            PlanEntry { lower: 0, upper: 2, a: 1.0, b: 1.0 },
        ];
        assert!(matches!(IndexPlan::new(dec), Err(FrameError::InvalidPlan(_))));
        let ab = vec![PlanEntry { lower: 0, upper: 0, a: 2.0, b: 1.0 }];
        assert!(IndexPlan::new(ab).is_err());
    }

    #[test]
    fn alternating_plan_passes() {
        let frame = FrameSystem::alternating_power(2, 64).unwrap();
        let plan = IndexPlan::shifted(5, 2, 1.0, 1.0).unwrap();
        let r = verify_pre_f_frame(&frame, &setting(64, 8), &plan, &canonical(64)).unwrap();
        assert!(r.passed());
        assert!(r.constants_hold());
        assert!(r.levels.iter().all(|l| l.optimal.lower == 1.0 && l.optimal.upper == 1.0));
    }

    #[test]
    fn strict_plan_fails_on_even_vectors() {
        let frame = FrameSystem::alternating_power(2, 64).unwrap();
        let plan = IndexPlan::shifted(3, 0, 1.0, 1.0).unwrap();
        let r = verify_pre_f_frame(&frame, &setting(64, 8), &plan, &canonical(64)).unwrap();
        let v = r.first_violation().unwrap();
        assert_eq!((v.k, v.side), (0, Side::Upper));
        assert_eq!((v.sample + 1) % 2, 0);
        assert!(r.violations.iter().all(|v| (v.sample + 1) % 2 == 0));
    }

    #[test]
    fn identity_plan_passes() {
        let frame = FrameSystem::identity(32).unwrap();
        let plan = IndexPlan::shifted(4, 0, 1.0, 1.0).unwrap();
        let r = verify_pre_f_frame(&frame, &setting(32, 4), &plan, &canonical(32)).unwrap();
        assert!(r.passed() && r.constants_hold());
    }

    #[test]
    fn alternating_is_not_strict() {
        let frame = FrameSystem::alternating_power(1, 256).unwrap();
        let v = classify_strictness(&frame, &setting(256, 4), 3, 10).unwrap();
        assert_eq!(v.verdict, Strictness::NotStrict);
        let LevelCertificate::Failing { rejected, beyond_bound } = &v.levels[0].certificate else {
            panic!("level 0 should fail");
        };
        assert!(beyond_bound);
        assert_eq!(rejected.len(), 11);
        let w0 = &rejected[0].witnesses;
        assert_eq!(w0.len(), 1);
        assert_eq!((w0[0].residue, w0[0].side), (1, Side::Upper));
        let ratios: Vec<f64> = w0[0].samples.iter().map(|s| s.1).collect();
        assert_eq!(ratios, vec![2.0, 4.0, 6.0, 8.0]);
        for c in &rejected[1..] {
            assert!(c.witnesses.iter().any(|w| w.residue == 0 && w.side == Side::Lower));
        }
        let w1 = rejected[1].witnesses.iter().find(|w| w.side == Side::Lower).unwrap();
        assert_eq!(w1.samples[1], (3, 1.0 / 3.0));
    }

    #[test]
    fn uniform_power_is_strict() {
        for r in 1..=3 {
            let frame = FrameSystem::uniform_power(r, 256).unwrap();
            let v = classify_strictness(&frame, &setting(256, 4), 4, 16).unwrap();
            assert_eq!(v.verdict, Strictness::Strict);
            assert_eq!(v.indices().unwrap(), (0..4).map(|s| s + r as usize).collect::<Vec<_>>());
            for l in &v.levels {
                let LevelCertificate::Admissible { lower, upper, .. } = l.certificate else { unreachable!() };
                assert_eq!((lower, upper), (1.0, 1.0));
            }
        }
        let id = FrameSystem::identity(64).unwrap();
        let v = classify_strictness(&id, &setting(64, 4), 4, 8).unwrap();
        assert_eq!(v.indices().unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn table_weights_are_undetermined() {
        let frame = FrameSystem::diagonal(Coefficients::Table(vec![1.0; 32]), 32).unwrap();
        let v = classify_strictness(&frame, &setting(32, 2), 2, 4).unwrap();
        assert_eq!(v.verdict, Strictness::Undetermined);
    }

    #[test]
    fn selection_worked_example() {
        let plan = IndexPlan::shifted(12, 2, 1.0, 1.0).unwrap();
        let cont = ContinuityData::from_levels(&[0, 3, 3, 5, 8]).unwrap();
        let s = select_subsequence(&plan, &cont).unwrap();
        assert_eq!(s.n, vec![0, 3, 3, 5, 8]);
        assert_eq!(s.k, vec![0, 1, 3, 4]);
        assert_eq!(s.w, vec![0, 1, 3, 4]);
        assert_eq!(s.r, vec![0, 3, 5, 8]);
        assert_eq!(s.w_tilde, vec![2, 5, 7, 10]);
        assert!(s.is_monotone());
    }

    #[test]
    fn selection_trivial_and_doubling() {
        let plan = IndexPlan::shifted(6, 2, 1.0, 1.0).unwrap();
        let s = select_subsequence(&plan, &ContinuityData::from_levels(&[0, 1, 2, 3]).unwrap()).unwrap();
        assert_eq!((s.k.clone(), s.r.clone()), (vec![0, 1, 2, 3], vec![0, 1, 2, 3]));
        assert_eq!(s.w_tilde, vec![2, 3, 4, 5]);

        let plan = IndexPlan::from_fn(9, |k| PlanEntry { lower: k, upper: 2 * k, a: 1.0, b: 1.0 }).unwrap();
        let s = select_subsequence(&plan, &ContinuityData::from_levels(&[0, 2, 4, 6, 8]).unwrap()).unwrap();
        assert_eq!(s.w, vec![0, 1, 2, 3, 4]);
        assert_eq!(s.r, vec![0, 2, 4, 6, 8]);
        assert_eq!(s.w_tilde, vec![0, 4, 8, 12, 16]);

        let short = IndexPlan::shifted(5, 2, 1.0, 1.0).unwrap();
        assert_eq!(
            select_subsequence(&short, &ContinuityData::from_levels(&[0, 3, 3, 5, 8]).unwrap()),
            Err(FrameError::PlanTooShort { needed: 8, len: 5 })
        );
    }

    #[test]
    fn selection_chain_holds() {
        let frame = FrameSystem::alternating_power(2, 64).unwrap();
        let plan = IndexPlan::shifted(12, 2, 1.0, 1.0).unwrap();
        let s = select_subsequence(&plan, &ContinuityData::from_levels(&[0, 3, 3, 5, 8]).unwrap()).unwrap();
        let check = verify_selection(&frame, &setting(64, 12), &s, &canonical(64)).unwrap();
        assert!(check.passed());
        assert_eq!(check.checked, 4 * 64);
    }
}

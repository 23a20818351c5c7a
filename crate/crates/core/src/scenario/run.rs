use std::f64::consts::SQRT_2;

use super::config::{CustomFrame, ScenarioConfig, ScenarioKind, SourceSpec};
use super::report::{Report, ReportRow, RowKind};
use crate::error::{FrameError, Result};
use crate::frame::{
    analyze, lp_chain_demo, Coefficients, FrameBounds, FrameForm, FrameSystem, GradedSetting, Side, Tail, Witness,
};
use crate::graded::{graded_norm, GradedVector, WeightGrading};
use crate::linalg::SparseMatrix;
use crate::multilevel::{
    classify_strictness, verify_pre_f_frame, IndexPlan, LevelCertificate, PreFrameReport, Strictness,
    StrictnessVerdict, WitnessFamily,
};
use crate::reconstruction::{
    canonical_left_inverse, least_squares_left_inverse, verify_dual_expansion, verify_equivalences,
    verify_expansion, EquivalenceReport, EquivalenceSource, ExpansionReport, ProjectionOp,
};

/// Runs the configured scenario.
pub fn run(config: &ScenarioConfig) -> Result<Report> {
    let rows = match config.scenario {
        ScenarioKind::Exf1 => run_exf1(config)?,
        ScenarioKind::Exf2 => run_exf2(config)?,
        ScenarioKind::Runo => run_runo(config)?,
        ScenarioKind::Custom => run_custom(config)?,
    };
    Ok(Report::new(config.clone(), rows))
}

fn canonical(n: usize) -> Vec<GradedVector> {
    (1..=n).map(GradedVector::canonical).collect()
}

fn expansion_samples() -> Vec<GradedVector> {
    let harmonic: Vec<f64> = (1..=8).map(|j| 1.0 / j as f64).collect();
    vec![
        GradedVector::from_real(&[1.0, 1.0]).expect("finite"),
        GradedVector::canonical(5),
        GradedVector::from_real(&harmonic).expect("finite"),
    ]
}

fn dual_samples() -> Vec<GradedVector> {
    vec![
        GradedVector::canonical(2),
        GradedVector::from_real(&[1.0, -2.0, 0.5, 3.0, 1.5]).expect("finite"),
        GradedVector::zero(),
    ]
}

fn witness_label(w: &Witness) -> String {
    match w {
        Witness::Coordinate(j) => format!("j={j}"),
        Witness::Vector(v) => format!("vector(nnz={},support={})", v.nnz(), v.support_len()),
    }
}

fn tail_label(t: Tail) -> String {
    match t {
        Tail::Attained => "attained".into(),
        Tail::Limit(l) => format!("limit {}", super::report::format_number(l)),
        Tail::Unbounded => "unbounded".into(),
        Tail::Uncertified => "uncertified".into(),
    }
}

/// Shared inputs for level rows.
struct LevelInputs<'a> {
    frame: &'a FrameSystem,
    setting: &'a GradedSetting,
    plan: &'a IndexPlan,
    pre: &'a PreFrameReport,
    equivalence: Option<&'a EquivalenceReport>,
    expansions: Option<(&'a ExpansionReport, &'a ExpansionReport)>,
    probe: &'a GradedVector,
}

fn level_rows(config: &ScenarioConfig, label: &str, inputs: &LevelInputs) -> Result<Vec<ReportRow>> {
    let LevelInputs { frame, setting, plan, pre, equivalence, expansions, probe } = inputs;
    let coeffs = analyze(frame, probe)?.coefficients;
    let mut rows = Vec::with_capacity(plan.len());
    for lr in &pre.levels {
        let k = lr.k;
        let FrameBounds { lower, upper, lower_witness, upper_witness, lower_tail, upper_tail } = &lr.optimal;
        let mut row = ReportRow::new(config, RowKind::Level, label);
        row.k = Some(k);
        row.s_lower = Some(lr.plan.lower);
        row.s_upper = Some(lr.plan.upper);
        row.a = Some(*lower);
        row.b = Some(*upper);
        row.a_witness = Some(witness_label(lower_witness));
        row.b_witness = Some(witness_label(upper_witness));
        let pre_ok = lr.constants_hold() && pre.violations.iter().all(|v| v.k != k);
        row.pre_frame = Some(pre_ok);
        row.probe = vec![
            graded_norm(probe, &setting.x, lr.plan.lower)?,
            graded_norm(&coeffs, &setting.theta, k)?,
            graded_norm(probe, &setting.x, lr.plan.upper)?,
        ];
        row.detail = format!(
            "plan A={} B={}; lower tail {}; upper tail {}",
            super::report::format_number(lr.plan.a),
            super::report::format_number(lr.plan.b),
            tail_label(*lower_tail),
            tail_label(*upper_tail)
        );
        let mut passed = pre_ok;
        if let Some(eq) = equivalence {
            let legs_ok = eq.legs.iter().all(|l| l.passed);
            let bound = eq.bounds.iter().find(|b| b.k == k);
            row.c = bound.map(|b| b.bessel);
            let rt = legs_ok && bound.is_some_and(|b| b.agrees());
            row.round_trip = Some(rt);
            passed &= rt;
        }
        if let Some((primal, dual)) = expansions {
            let ok = primal.records.iter().chain(&dual.records).filter(|r| r.k == k).all(|r| r.bound_holds && r.exact_after_support);
            row.expansion = Some(ok);
            passed &= ok;
            if let Some(rec) = primal.records.iter().find(|r| r.k == k && r.sample == 0) {
                row.profile = rec.profile.iter().map(|p| p.residual).collect();
            }
        }
        row.passed = passed;
        rows.push(row);
    }
    Ok(rows)
}

fn family_label(w: &WitnessFamily) -> String {
    let side = match w.side {
        Side::Upper => "unbounded",
        Side::Lower => "vanishing",
    };
    format!("{side} on j≡{}(mod {})", w.residue + 1, w.period)
}

/// Candidates grouped into runs with the same witness families.
fn describe_rejections(rejected: &[crate::multilevel::RejectedCandidate]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < rejected.len() {
        let sig: Vec<String> = rejected[i].witnesses.iter().map(family_label).collect();
        let mut j = i;
        while j + 1 < rejected.len() && rejected[j + 1].witnesses.iter().map(family_label).collect::<Vec<_>>() == sig {
            j += 1;
        }
        let range = if i == j {
            format!("n={}", rejected[i].n)
        } else {
            format!("n={}..{}", rejected[i].n, rejected[j].n)
        };
        parts.push(format!("{range}: {}", sig.join(" & ")));
        i = j + 1;
    }
    parts.join("; ")
}

fn verdict_row(config: &ScenarioConfig, label: &str, v: &StrictnessVerdict) -> ReportRow {
    let mut row = ReportRow::new(config, RowKind::Verdict, label);
    row.strictness = Some(v.verdict);
    row.passed = v.verdict != Strictness::Undetermined;
    let mut details = Vec::new();
    for l in &v.levels {
        details.push(match &l.certificate {
            LevelCertificate::Admissible { n, lower, upper, .. } => format!(
                "s={}: n_s={n} A={} B={}",
                l.s,
                super::report::format_number(*lower),
                super::report::format_number(*upper)
            ),
            LevelCertificate::Failing { rejected, beyond_bound } => format!(
                "s={}: {}{}",
                l.s,
                describe_rejections(rejected),
                if *beyond_bound { "; all n>n_max fail" } else { "; undecided beyond n_max" }
            ),
            LevelCertificate::Undetermined { n, .. } => format!("s={}: uncertified at n={n}", l.s),
        });
    }
    row.detail = format!("n_max={}; {}", v.n_max, details.join(" | "));
    match v.indices() {
        Some(ns) => row.profile = ns.iter().map(|&n| n as f64).collect(),
        None => {
            if let Some(LevelCertificate::Failing { rejected, .. }) = v.levels.first().map(|l| &l.certificate) {
                if let Some(w) = rejected.first().and_then(|c| c.witnesses.first()) {
                    row.profile = w.samples.iter().map(|s| s.1).collect();
                }
            }
        }
    }
    row
}

fn power_setting(levels: usize, n: usize, m: usize) -> Result<GradedSetting> {
    Ok(GradedSetting::new(WeightGrading::power(levels, n)?, WeightGrading::power(levels, m)?))
}

/// Diagonal frame with alternating weights, plus the uniform `j^r` variant.
pub fn run_exf1(config: &ScenarioConfig) -> Result<Vec<ReportRow>> {
    let (n, k_count, r) = (config.truncation, config.levels, config.r as usize);
    let frame = FrameSystem::alternating_power(config.r, n)?;
    let setting = power_setting(k_count - 1 + r, n, n)?;
    let plan = IndexPlan::shifted(k_count, r, 1.0, 1.0)?;
    let probe = GradedVector::from_real(&[1.0, 1.0])?;
    let mut samples = canonical(n);
    samples.push(probe.clone());
    let pre = verify_pre_f_frame(&frame, &setting, &plan, &samples)?;
    let eq = verify_equivalences(&frame, &setting, &plan, EquivalenceSource::Synthesis(canonical_left_inverse(&frame)?))?;
    let exp = verify_expansion(&frame, &eq.synthesis, &setting, &expansion_samples(), None)?;
    let dexp = verify_dual_expansion(&frame, eq.synthesis.dual(), &setting, &plan, &dual_samples(), None)?;
    let inputs = LevelInputs {
        frame: &frame,
        setting: &setting,
        plan: &plan,
        pre: &pre,
        equivalence: Some(&eq),
        expansions: Some((&exp, &dexp)),
        probe: &probe,
    };
    let mut rows = level_rows(config, "alternating", &inputs)?;
    rows.push(verdict_row(config, "strictness", &classify_strictness(&frame, &setting, k_count, config.n_max)?));

    let variant = FrameSystem::uniform_power(config.r, n)?;
    let v = classify_strictness(&variant, &setting, k_count, config.n_max)?;
    let mut row = verdict_row(config, "uniform_power_strictness", &v);
    let shifted_ok = v.indices().is_some_and(|ns| ns.iter().enumerate().all(|(s, &n_s)| n_s == s + r));
    row.detail = format!("n_s=s+{r}: {shifted_ok}; {}", row.detail);
    rows.push(row);
    Ok(rows)
}

/// Paired functionals over the shifted-power grading, starting from the
/// even-selection projection.
pub fn run_exf2(config: &ScenarioConfig) -> Result<Vec<ReportRow>> {
    let (n, k_count, r) = (config.truncation, config.levels, config.r as usize);
    let levels = k_count - 1 + r;
    let frame = FrameSystem::paired_alternating_power(config.r, n)?;
    let setting = GradedSetting::new(WeightGrading::shifted_power(2, levels, n)?, WeightGrading::power(levels, 2 * n)?);
    let plan = IndexPlan::shifted(k_count, r, 1.0, SQRT_2)?;
    let probe = GradedVector::canonical(1);
    let mut samples = canonical(n);
    samples.push(probe.clone());
    let pre = verify_pre_f_frame(&frame, &setting, &plan, &samples)?;
    let p = ProjectionOp::even_selection(n);
    let eq = verify_equivalences(&frame, &setting, &plan, EquivalenceSource::Projection(p.clone()))?;
    let exp = verify_expansion(&frame, &eq.synthesis, &setting, &expansion_samples(), None)?;
    let dexp = verify_dual_expansion(&frame, eq.synthesis.dual(), &setting, &plan, &dual_samples(), None)?;
    let inputs = LevelInputs {
        frame: &frame,
        setting: &setting,
        plan: &plan,
        pre: &pre,
        equivalence: Some(&eq),
        expansions: Some((&exp, &dexp)),
        probe: &probe,
    };
    let mut rows = level_rows(config, "paired", &inputs)?;
    let exact = p.idempotence_defect() == 0.0;
    for row in &mut rows {
        let k = row.k.expect("level row");
        let norm = p.norm(&setting.theta, k)?;
        row.projection_norm = Some(norm);
        let ok = exact && norm <= SQRT_2 * (1.0 + crate::frame::INEQUALITY_SLACK);
        row.round_trip = row.round_trip.map(|rt| rt && ok);
        row.passed &= ok;
    }
    rows.push(verdict_row(config, "strictness", &classify_strictness(&frame, &setting, k_count, config.n_max)?));
    Ok(rows)
}

/// Inequality chain samples and the non-closedness witness table.
pub fn run_runo(config: &ScenarioConfig) -> Result<Vec<ReportRow>> {
    let rc = &config.runo;
    let samples = vec![
        GradedVector::from_real(&[1.0, 1.0])?,
        GradedVector::canonical(1),
        GradedVector::from_real(&[1.0, 0.5, 1.0 / 3.0, 0.25])?,
    ];
    let demo = lp_chain_demo(rc.p, rc.q, &samples, rc.epsilon, &rc.prefixes)?;
    let mut rows = Vec::new();
    for (i, ch) in demo.chains.iter().enumerate() {
        let mut row = ReportRow::new(config, RowKind::Chain, "chain");
        row.probe = vec![ch.q_norm, ch.l2_norm, ch.p_norm];
        row.passed = ch.holds;
        row.detail = format!("sample {i}");
        rows.push(row);
    }
    for g in &demo.growth {
        let mut row = ReportRow::new(config, RowKind::Growth, "growth");
        row.probe = vec![g.prefix as f64, g.l2_norm, g.p_norm, g.ratio, g.holder_ceiling];
        row.passed = g.l2_norm <= demo.l2_limit_bound;
        row.detail = "prefix;l2;lp;ratio;holder_ceiling".into();
        rows.push(row);
    }
    let mut row = ReportRow::new(config, RowKind::Verdict, "non_closed_range");
    row.passed = demo.l2_bounded && demo.p_norms_increasing;
    row.probe = vec![demo.l2_limit_bound];
    row.detail = format!("l2 bounded: {}; lp norms increasing: {}", demo.l2_bounded, demo.p_norms_increasing);
    rows.push(row);
    Ok(rows)
}

/// A user-described frame, gradings and plan.
pub fn run_custom(config: &ScenarioConfig) -> Result<Vec<ReportRow>> {
    let custom = config
        .custom
        .as_ref()
        .ok_or_else(|| FrameError::InvalidParameters("custom scenario needs a [custom] section".into()))?;
    let frame = match &custom.frame {
        CustomFrame::Diagonal { weights } => FrameSystem::diagonal(Coefficients::Periodic(weights.clone()), config.truncation)?,
        CustomFrame::Block { weights } => FrameSystem::block(Coefficients::Periodic(weights.clone()), config.truncation)?,
        CustomFrame::Dense { matrix } => FrameSystem::dense(SparseMatrix::from_dense(matrix)?)?,
    };
    let (n, m) = (frame.truncation(), frame.functional_count());
    let k_count = config.levels;
    let levels = k_count - 1 + custom.plan.shift;
    let setting = GradedSetting::new(custom.x.build(levels, n)?, custom.theta.build(levels, m)?);
    let plan = IndexPlan::shifted(k_count, custom.plan.shift, custom.plan.a, custom.plan.b)?;
    let pre = verify_pre_f_frame(&frame, &setting, &plan, &canonical(n))?;
    let (eq, exp, dexp) = match custom.source {
        Some(source) => {
            let v = match source {
                SourceSpec::Canonical => canonical_left_inverse(&frame)?,
                SourceSpec::LeastSquares => least_squares_left_inverse(&frame)?,
            };
            let eq = verify_equivalences(&frame, &setting, &plan, EquivalenceSource::Synthesis(v))?;
            let samples: Vec<GradedVector> = expansion_samples().into_iter().filter(|f| f.support_len() <= n).collect();
            let duals: Vec<GradedVector> = dual_samples().into_iter().filter(|g| g.support_len() <= n).collect();
            let exp = verify_expansion(&frame, &eq.synthesis, &setting, &samples, None)?;
            let dexp = verify_dual_expansion(&frame, eq.synthesis.dual(), &setting, &plan, &duals, None)?;
            (Some(eq), Some(exp), Some(dexp))
        }
        None => (None, None, None),
    };
    let probe = GradedVector::canonical(1);
    let inputs = LevelInputs {
        frame: &frame,
        setting: &setting,
        plan: &plan,
        pre: &pre,
        equivalence: eq.as_ref(),
        expansions: exp.as_ref().zip(dexp.as_ref()),
        probe: &probe,
    };
    let mut rows = level_rows(config, "custom", &inputs)?;
    if !matches!(frame.form(), FrameForm::Dense(_)) {
        rows.push(verdict_row(config, "strictness", &classify_strictness(&frame, &setting, k_count, config.n_max)?));
    }
    Ok(rows)
}

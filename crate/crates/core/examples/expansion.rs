//! Partial-sum reconstruction `f ≈ ∑_{i≤n} g_i(f) f_i` and its tail bound.

use frechet_frames::frame::{FrameSystem, GradedSetting};
use frechet_frames::graded::{GradedVector, WeightGrading};
use frechet_frames::multilevel::IndexPlan;
use frechet_frames::reconstruction::{canonical_left_inverse, verify_dual_expansion, verify_expansion, SynthesisOp};

fn main() -> frechet_frames::Result<()> {
    let (n, r, k) = (32, 2usize, 4);
    let frame = FrameSystem::alternating_power(r as u32, n)?;
    let setting = GradedSetting::new(WeightGrading::power(k + r, n)?, WeightGrading::power(k + r, n)?);
    let plan = IndexPlan::shifted(k, r, 1.0, 1.0)?;
    let op = SynthesisOp::from_matrix(canonical_left_inverse(&frame)?, &setting, &plan)?;

    let f = GradedVector::from_real(&[3.0, 0.0, -1.0, 0.5, 2.0, 0.0, 1.0])?;
    let report = verify_expansion(&frame, &op, &setting, &[f], None)?;
    for rec in &report.records {
        println!("k={} support={} bound_holds={} exact_after_support={}", rec.k, rec.support, rec.bound_holds, rec.exact_after_support);
        for p in &rec.profile {
            println!("  n={:>2}  residual {:>12.5e}  bound {:>12.5e}", p.n, p.residual, p.bound);
        }
    }

    let g = GradedVector::from_real(&[1.0, -1.0, 0.0, 2.0])?;
    let dual = verify_dual_expansion(&frame, op.dual(), &setting, &plan, &[g], None)?;
    println!("dual expansion: {}", if dual.passed() { "within bound" } else { "bound violated" });
    Ok(())
}

//! Checking a multi-level plan: a shifted plan passes, the strict plan on the
//! same frame is violated by an even canonical vector.

use frechet_frames::frame::{FrameSystem, GradedSetting};
use frechet_frames::graded::{GradedVector, WeightGrading};
use frechet_frames::multilevel::{verify_pre_f_frame, IndexPlan};

fn main() -> frechet_frames::Result<()> {
    let n = 128;
    let frame = FrameSystem::alternating_power(1, n)?;
    let setting = GradedSetting::new(WeightGrading::power(8, n)?, WeightGrading::power(8, n)?);
    let samples: Vec<GradedVector> = (1..=n).map(GradedVector::canonical).collect();
    for (name, shift) in [("shifted", 1), ("strict", 0)] {
        let plan = IndexPlan::shifted(6, shift, 1.0, 1.0)?;
        let report = verify_pre_f_frame(&frame, &setting, &plan, &samples)?;
        print!("{name}: passed={} constants_hold={}", report.passed(), report.constants_hold());
        match report.first_violation() {
            Some(v) => println!("; first violation k={} sample ψ_{} {:?}: {} > {}", v.k, v.sample + 1, v.side, v.lhs, v.rhs),
            None => println!(),
        }
    }
    Ok(())
}

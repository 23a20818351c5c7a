//! Re-indexing a general pre-frame along a subsequence chosen from the
//! continuity data of the graded space.

use frechet_frames::frame::{FrameSystem, GradedSetting};
use frechet_frames::graded::{GradedVector, WeightGrading};
use frechet_frames::multilevel::{select_subsequence, verify_selection, ContinuityData, IndexPlan};

fn main() -> frechet_frames::Result<()> {
    let n = 64;
    let plan = IndexPlan::shifted(12, 2, 1.0, 1.0)?;
    let cont = ContinuityData::from_levels(&[0, 3, 3, 5, 8])?;
    let sel = select_subsequence(&plan, &cont)?;
    println!("n_k = {:?}", sel.n);
    println!("k_j = {:?}", sel.k);
    println!("w   = {:?}", sel.w);
    println!("r   = {:?}", sel.r);
    println!("w~  = {:?}", sel.w_tilde);

    let frame = FrameSystem::alternating_power(2, n)?;
    let setting = GradedSetting::new(WeightGrading::power(14, n)?, WeightGrading::power(14, n)?);
    let samples: Vec<GradedVector> = (1..=n).map(GradedVector::canonical).collect();
    let check = verify_selection(&frame, &setting, &sel, &samples)?;
    println!("chain checked on {} samples: {}", check.checked, if check.passed() { "ok" } else { "violated" });
    Ok(())
}

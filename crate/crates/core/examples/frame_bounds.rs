//! Optimal frame bounds of the alternating-power frame, closed form against
//! the singular-value oracle.

use frechet_frames::frame::{frame_bounds_analytic, frame_bounds_numeric, BoundLevels, FrameSystem, GradedSetting};
use frechet_frames::graded::WeightGrading;

fn main() -> frechet_frames::Result<()> {
    let (n, r) = (512, 2u32);
    let frame = FrameSystem::alternating_power(r, n)?;
    let setting = GradedSetting::new(WeightGrading::power(10, n)?, WeightGrading::power(10, n)?);
    println!("{:>2} {:>4} {:>4} {:>10} {:>10} {:>10} {:>10}", "k", "s", "s~", "A", "B", "A num", "B num");
    for k in 0..=6 {
        for (lo, hi) in [(k, k + r as usize), (k, k)] {
            let bl = BoundLevels::new(k, lo, hi);
            let a = frame_bounds_analytic(&frame, &setting, bl)?;
            let m = frame_bounds_numeric(&frame, &setting, bl)?;
            println!(
                "{k:>2} {lo:>4} {hi:>4} {:>10.4e} {:>10.4e} {:>10.4e} {:>10.4e}  upper tail {:?}",
                a.lower, a.upper, m.lower, m.upper, a.upper_tail
            );
        }
    }
    Ok(())
}

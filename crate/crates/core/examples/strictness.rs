//! Strictness classification: the alternating frame is not strict, the
//! uniform `b_j = j^r` frame is strict with `n_s = s + r`.

use frechet_frames::frame::{FrameSystem, GradedSetting};
use frechet_frames::graded::WeightGrading;
use frechet_frames::multilevel::{classify_strictness, LevelCertificate};

fn main() -> frechet_frames::Result<()> {
    let (n, r, levels) = (256, 1u32, 4);
    let setting = GradedSetting::new(WeightGrading::power(8, n)?, WeightGrading::power(8, n)?);
    for (name, frame) in [
        ("alternating", FrameSystem::alternating_power(r, n)?),
        ("uniform", FrameSystem::uniform_power(r, n)?),
    ] {
        let v = classify_strictness(&frame, &setting, levels, 8)?;
        println!("{name}: {:?}", v.verdict);
        for level in &v.levels {
            match &level.certificate {
                LevelCertificate::Admissible { n, lower, upper, .. } => {
                    println!("  s={}: n_s={n}, A={lower}, B={upper}", level.s)
                }
                LevelCertificate::Failing { rejected, beyond_bound } => {
                    for c in rejected.iter().take(3) {
                        let ws: Vec<String> = c
                            .witnesses
                            .iter()
                            .map(|w| format!("{:?} on j≡{} mod {} (exp {})", w.side, w.residue + 1, w.period, w.exponent))
                            .collect();
                        println!("  s={} n={}: {}", level.s, c.n, ws.join(", "));
                    }
                    println!("  s={}: ... all larger n fail: {beyond_bound}", level.s);
                }
                LevelCertificate::Undetermined { n, .. } => println!("  s={}: undetermined at n={n}", level.s),
            }
        }
    }
    Ok(())
}

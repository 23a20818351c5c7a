//! Coordinate functionals between `ℓ^q`, `ℓ²` and `ℓ^p`: the norm chain and a
//! family bounded in `ℓ²` whose `ℓ^p` norms keep growing.

use frechet_frames::frame::lp_chain_demo;
use frechet_frames::graded::GradedVector;

fn main() -> frechet_frames::Result<()> {
    let samples = [GradedVector::from_real(&[1.0, 1.0])?, GradedVector::from_real(&[3.0, -1.0, 0.5])?];
    let demo = lp_chain_demo(1.5, 3.0, &samples, 0.05, &[10, 100, 1_000, 10_000, 100_000])?;
    for c in &demo.chains {
        println!("‖c‖_3 = {:.12}  ‖c‖_2 = {:.12}  ‖c‖_1.5 = {:.12}  holds: {}", c.q_norm, c.l2_norm, c.p_norm, c.holds);
    }
    println!("{:>8} {:>10} {:>10} {:>8} {:>8}", "n", "ℓ²", "ℓ^1.5", "ratio", "Hölder");
    for g in &demo.growth {
        println!("{:>8} {:>10.5} {:>10.5} {:>8.4} {:>8.4}", g.prefix, g.l2_norm, g.p_norm, g.ratio, g.holder_ceiling);
    }
    println!("ℓ² norms stay below {:.5}: {}", demo.l2_limit_bound, demo.l2_bounded);
    Ok(())
}

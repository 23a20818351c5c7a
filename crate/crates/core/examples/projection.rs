//! The paired frame: projection onto the range of the analysis operator,
//! recovery of the synthesis operator from it, and the full equivalence
//! round trip.

use std::f64::consts::SQRT_2;

use frechet_frames::frame::{FrameSystem, GradedSetting};
use frechet_frames::graded::{graded_norm, GradedVector, WeightGrading};
use frechet_frames::multilevel::IndexPlan;
use frechet_frames::reconstruction::{range_residuals, verify_equivalences, EquivalenceSource, ProjectionOp};

fn main() -> frechet_frames::Result<()> {
    let (pairs, levels) = (64, 4);
    let frame = FrameSystem::paired_alternating_power(1, pairs)?;
    let setting = GradedSetting::new(
        WeightGrading::shifted_power(2, levels + 1, pairs)?,
        WeightGrading::power(levels + 1, 2 * pairs)?,
    );
    let plan = IndexPlan::shifted(levels, 1, 1.0, SQRT_2)?;
    let p = ProjectionOp::even_selection(pairs);
    println!("P² − P defect: {}", p.idempotence_defect());
    for s in 0..levels {
        println!("|||P|||_{s} = {:.12}", p.norm(&setting.theta, s)?);
    }

    let d = GradedVector::from_real(&[1.0, -2.0, 0.5, 4.0, 3.0])?;
    let pd = p.apply(&d)?;
    println!("d = {:?}", d.to_dense(6).iter().map(|z| z.re).collect::<Vec<_>>());
    println!("Pd = {:?}", pd.to_dense(6).iter().map(|z| z.re).collect::<Vec<_>>());
    println!("|||d|||_1 = {:.6}, |||Pd|||_1 = {:.6}", graded_norm(&d, &setting.theta, 1)?, graded_norm(&pd, &setting.theta, 1)?);
    println!("range residual of Pd: {:e}", range_residuals(&frame, &p, &[d])?[0]);

    let eq = verify_equivalences(&frame, &setting, &plan, EquivalenceSource::Projection(p))?;
    for leg in &eq.legs {
        println!("{:<24} {} ({:e})", leg.name, leg.passed, leg.measure);
    }
    for b in &eq.bounds {
        println!("C_{} direct {:.12} bessel {:.12} recovered {:.12}", b.k, b.direct, b.bessel, b.recovered);
    }
    Ok(())
}

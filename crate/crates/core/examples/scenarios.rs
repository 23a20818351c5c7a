//! Runs the three built-in scenarios at small truncation and summarizes
//! their rows.

use frechet_frames::scenario::{run, ScenarioConfig, ScenarioKind};

fn main() -> frechet_frames::Result<()> {
    for kind in [ScenarioKind::Exf1, ScenarioKind::Exf2, ScenarioKind::Runo] {
        let mut config = ScenarioConfig::new(kind);
        config.truncation = 256;
        config.levels = 4;
        let report = run(&config)?;
        println!("{} ({}…): {} rows, all passed: {}", kind.id(), &report.config_hash[..12], report.rows.len(), report.passed());
        for row in &report.rows {
            let k = row.k.map(|k| format!(" k={k}")).unwrap_or_default();
            println!("  {:?} {}{}: {}", row.kind, row.label, k, row.detail);
        }
    }
    Ok(())
}

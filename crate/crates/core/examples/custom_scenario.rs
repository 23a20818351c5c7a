//! A custom scenario from inline TOML: a dense frame, its report as CSV, and
//! parsing the report back.

use frechet_frames::scenario::{parse_report, render, run, Format, ScenarioConfig};

const CONFIG: &str = r#"
scenario = "custom"
levels = 3

[custom]
source = "least_squares"

[custom.frame]
form = "dense"
matrix = [
  [1.0, 0.0, 0.0],
  [0.0, 1.0, 0.0],
  [0.0, 0.0, 1.0],
  [1.0, 1.0, 1.0],
]

[custom.plan]
shift = 0
a = 0.5
b = 20.0
"#;

fn main() -> anyhow::Result<()> {
    let config = ScenarioConfig::from_toml(CONFIG)?;
    let report = run(&config)?;
    let csv = render(&report, Format::Csv)?;
    print!("{}", String::from_utf8(csv.clone())?);
    let back = parse_report(std::str::from_utf8(&csv)?)?;
    println!("parsed {} rows, hash mismatches: {}", back.rows.len(), back.hash_mismatches().len());
    Ok(())
}

//! Full benchmark run from a TOML config, with every report format.

use qtransfer::bench::{emit_report, run_experiment, ExperimentConfig, ReportFormat};

const CONFIG: &str = r#"
seed = 7
tasks = ["sa_sb", "sb_sa"]
methods = ["na", "tca", "jda", "bda", "vqtf", "qblas_tf"]

[vqtf]
iterations = 3
"#;

fn main() -> qtransfer::Result<()> {
    let cfg = ExperimentConfig::from_text(CONFIG)?;
    let report = run_experiment(&cfg)?;
    let dir = std::env::temp_dir().join("qtransfer-report-example");
    let files = emit_report(
        &report,
        &[ReportFormat::Csv, ReportFormat::Json, ReportFormat::Md],
        &dir,
    )?;
    for f in &files {
        println!("wrote {}", f.display());
    }
    print!(
        "{}",
        std::fs::read_to_string(dir.join("report.md")).expect("just written")
    );
    println!("total {} ms", report.total_ms);
    Ok(())
}

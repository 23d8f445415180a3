//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use graphex::suite::{run_suite, SuiteConfig};

fn main() {
    let cfg = SuiteConfig::default();
    println!("acceptance suite, seed {}", cfg.seed);
    let report = run_suite(&cfg, |r| println!("{}", r.line()));
    let failed = report.criteria.iter().filter(|c| !c.passed).count();
    println!(
        "{} of {} criteria passed in {:.1}s",
        report.criteria.len() - failed,
        report.criteria.len(),
        report.total_runtime_secs
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

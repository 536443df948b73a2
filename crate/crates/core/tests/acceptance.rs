//! The twelve acceptance criteria. `THINOBS_LEVEL=full` runs them at the fine level.

use thinobs::geometry::{beta_number, BetaStats, DiscreteMeasure};
use thinobs::verify::{run_beta_criterion_with, run_criterion, Level, CRITERIA};
use thinobs::{Point, Result};

fn level() -> Level {
    std::env::var("THINOBS_LEVEL").map_or(Level::Fast, |v| v.parse().expect("THINOBS_LEVEL is fast or full"))
}

#[test]
fn acceptance_criteria() {
    let level = level();
    let mut failed = Vec::new();
    for id in 1..=CRITERIA {
        let start = std::time::Instant::now();
        let result = run_criterion(id, level);
        println!("{} [{:.1} s]", result.line(), start.elapsed().as_secs_f64());
        for m in &result.metrics {
            let v = m.value.map_or_else(|| if m.passed { "yes".into() } else { "no".into() }, |v| format!("{v:.6e}"));
            println!("      {}: {} ({})", m.name, v, m.bound);
        }
        if !result.passed {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failing criteria at level {level}: {failed:?}");
}

/// Drops the `r^{k+2}` normalisation.
fn unscaled_beta(mu: &DiscreteMeasure, x0: &Point, r: f64, k: usize) -> Result<BetaStats> {
    let mut b = beta_number(mu, x0, r, k)?;
    b.beta *= r.powf(0.5 * (k as f64 + 2.0));
    Ok(b)
}

/// Uses the largest eigenvalue instead of the trailing ones.
fn leading_beta(mu: &DiscreteMeasure, x0: &Point, r: f64, k: usize) -> Result<BetaStats> {
    let mut b = beta_number(mu, x0, r, k)?;
    b.beta = (b.eigenvalues[0] / r.powi(k as i32 + 2)).sqrt();
    Ok(b)
}

#[test]
fn corrupted_beta_fails_the_beta_criterion() {
    assert!(run_beta_criterion_with(beta_number).passed);
    for corrupted in [unscaled_beta as thinobs::verify::BetaFn, leading_beta] {
        let result = run_beta_criterion_with(corrupted);
        println!("{}", result.line());
        assert!(!result.passed);
    }
}

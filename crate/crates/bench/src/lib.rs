//! Shared inputs for the benchmarks.

use polariphase::{simulate_scan, BeamlineConfig, CoilSpec, CountingPlan, ScanPlan, ScanRecord, Su2Params};

pub fn set_a() -> BeamlineConfig {
    BeamlineConfig::new(0.976, CoilSpec::Params(Su2Params::new(1.71, 0.38, -1.46)))
}

pub fn plan_for(cfg: &BeamlineConfig, seed: u64) -> CountingPlan {
    CountingPlan::new(ScanPlan::default_for(cfg), seed)
}

/// A sampled set A scan with its counting plan.
pub fn sampled_set_a(seed: u64) -> (BeamlineConfig, CountingPlan, Vec<ScanRecord>) {
    let cfg = set_a();
    let plan = plan_for(&cfg, seed);
    let records = simulate_scan(&cfg, &plan).expect("valid setup");
    (cfg, plan, records)
}

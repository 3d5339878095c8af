use scramble_core::builder::{build, BuilderConfig, EnumPolicy};
use scramble_core::MetricSystem;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let id = args.get(1).map(|s| s.as_str()).unwrap_or("doubling");
    let stages: u32 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(2);
    let sys = MetricSystem::parse(id).unwrap();
    let mut cfg = BuilderConfig::defaults(&sys, stages);
    cfg.enum_policy = EnumPolicy::Sampled { tuples: None };
    let t0 = std::time::Instant::now();
    let trace = build(&sys, &cfg).unwrap();
    println!(
        "{id} L={stages}: {:?}; last time {}, json {} KB",
        t0.elapsed(),
        trace.last_time(),
        trace.to_json().len() / 1024
    );
    for st in &trace.stages {
        let times: Vec<u64> = st.steps.iter().map(|s| s.time).collect();
        println!("  stage {}: n={} times {:?}...{:?}", st.ell, st.n_ell, times.first(), times.last());
    }
}

//! Experiment orchestration: configuration, execution, persistence and reports.

pub mod config;
pub mod experiments;
pub mod presets;
pub mod report;
pub mod store;
pub mod verify;

pub use config::{parse_config, parse_config_str, DataSpec, ExperimentConfig, ExperimentKind};
pub use experiments::{execute, Check, RunRecord};
pub use report::{emit_csv, emit_svg};
pub use store::{append, read_store};

/// Worker count: available parallelism, capped by `HH_THREADS` when set.
pub fn worker_count() -> usize {
    let avail = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("HH_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(k) if k > 0 => k,
        _ => avail,
    }
}

/// Run `f` on a pool sized by [`worker_count`].
pub fn in_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(worker_count()).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

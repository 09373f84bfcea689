//! Target execution: corpus replay, fresh random inputs on a worker pool,
//! minimization and storage of failures, and line-delimited JSON reporting.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, RngCore, SeedableRng};
use serde::Serialize;

use crate::corpus::{hash_hex, load_cases, save_case, stored_targets};
use crate::minimize::minimize_case;
use crate::stats::{compute_stats, StatsReport};
use crate::targets::{find_target, Target, Verdict};

/// How long a run lasts: a fixed iteration count or a wall-clock budget.
#[derive(Debug, Clone, Copy)]
pub enum Budget {
    Iterations(u64),
    Seconds(u64),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub budget: Budget,
    pub corpus_dir: Option<PathBuf>,
    pub jobs: usize,
    pub seed: u64,
    pub max_input_len: usize,
    pub stats_samples: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            budget: Budget::Iterations(10_000),
            corpus_dir: None,
            jobs: 1,
            seed: 0,
            max_input_len: 256,
            stats_samples: 1_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub target: String,
    pub iterations: u64,
    pub failures: Vec<String>,
    pub stats: StatsReport,
    pub wall_seconds: f64,
}

impl RunReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Runs a check, treating a panic as a failure rather than aborting.
fn checked(target: &Target, bytes: &[u8]) -> Verdict {
    let check = target.check;
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| check(bytes))) {
        Ok(verdict) => verdict,
        Err(_) => Verdict::Fail("check panicked".to_string()),
    }
}

/// Runs a target: replays its stored corpus first, then draws fresh random
/// inputs until the budget is spent. Failures are minimized and stored in
/// the corpus directory, and their hashes reported.
pub fn run_target(target: &Target, config: &RunConfig) -> std::io::Result<RunReport> {
    let started = Instant::now();
    let mut failures: Vec<String> = Vec::new();
    let mut iterations: u64 = 0;

    if let Some(corpus_dir) = &config.corpus_dir {
        for (name, bytes) in load_cases(corpus_dir, target.name)? {
            iterations += 1;
            if checked(target, &bytes).is_fail() {
                failures.push(name);
            }
        }
    }

    let remaining = AtomicU64::new(match config.budget {
        Budget::Iterations(n) => n.saturating_sub(iterations),
        Budget::Seconds(_) => u64::MAX,
    });
    let deadline = match config.budget {
        Budget::Seconds(s) => Some(started + std::time::Duration::from_secs(s)),
        Budget::Iterations(_) => None,
    };
    let executed = AtomicU64::new(0);
    let found = Mutex::new(Vec::<Vec<u8>>::new());

    let jobs = config.jobs.max(1);
    std::thread::scope(|scope| {
        for worker in 0..jobs {
            let remaining = &remaining;
            let executed = &executed;
            let found = &found;
            let seed = config
                .seed
                .wrapping_add((worker as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let max_len = config.max_input_len;
            scope.spawn(move || {
                let mut rng = StdRng::seed_from_u64(seed);
                loop {
                    if let Some(deadline) = deadline {
                        if Instant::now() >= deadline {
                            break;
                        }
                    }
                    if remaining.fetch_update(Ordering::Relaxed, Ordering::Relaxed, |n| {
                        n.checked_sub(1)
                    }) == Err(0)
                    {
                        break;
                    }
                    let len = rng.gen_range(0..=max_len);
                    let mut bytes = vec![0u8; len];
                    rng.fill_bytes(&mut bytes);
                    executed.fetch_add(1, Ordering::Relaxed);
                    if checked(target, &bytes).is_fail() {
                        let mut found = found.lock().expect("worker poisoned the failure list");
                        // Cap stored failures per run; keep counting instead.
                        if found.len() < 32 {
                            found.push(bytes);
                        }
                    }
                }
            });
        }
    });
    iterations += executed.load(Ordering::Relaxed);

    for bytes in found.into_inner().expect("scope joined all workers") {
        let minimized = minimize_case(target, &bytes);
        let hash = match &config.corpus_dir {
            Some(dir) => save_case(dir, target.name, &minimized)?,
            None => hash_hex(&minimized),
        };
        if !failures.contains(&hash) {
            failures.push(hash);
        }
    }

    Ok(RunReport {
        target: target.name.to_string(),
        iterations,
        failures,
        stats: compute_stats(target.name, config.stats_samples, config.seed),
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Replays every stored case for one target without mutation or storage.
pub fn replay_target(target: &Target, corpus_dir: &Path) -> std::io::Result<RunReport> {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut iterations = 0u64;
    for (name, bytes) in load_cases(corpus_dir, target.name)? {
        iterations += 1;
        if checked(target, &bytes).is_fail() {
            failures.push(name);
        }
    }
    Ok(RunReport {
        target: target.name.to_string(),
        iterations,
        failures,
        stats: compute_stats(target.name, 0, 0),
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Error from [`replay_all`]: the corpus contains a directory that does not
/// name a registered target.
#[derive(Debug)]
pub struct UnknownTarget(pub String);

impl std::fmt::Display for UnknownTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "corpus directory names unknown target `{}`", self.0)
    }
}

impl std::error::Error for UnknownTarget {}

/// Replays the whole corpus, one report per stored target.
pub fn replay_all(
    corpus_dir: &Path,
) -> Result<Vec<RunReport>, Box<dyn std::error::Error + Send + Sync>> {
    let mut reports = Vec::new();
    for name in stored_targets(corpus_dir)? {
        let target = find_target(&name).ok_or_else(|| UnknownTarget(name.clone()))?;
        reports.push(replay_target(&target, corpus_dir)?);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::all_targets;

    #[test]
    fn iteration_budget_is_respected() {
        let target = find_target("parser-safety").unwrap();
        let config = RunConfig {
            budget: Budget::Iterations(500),
            ..RunConfig::default()
        };
        let report = run_target(&target, &config).unwrap();
        assert_eq!(report.iterations, 500);
        assert!(report.failures.is_empty());
    }

    #[test]
    fn corpus_failures_replay_and_rerun_deterministically() {
        // A synthetic always-failing target exercises storage and replay.
        fn always_fail(bytes: &[u8]) -> Verdict {
            if bytes.len() > 2 {
                Verdict::Fail("too long".to_string())
            } else {
                Verdict::Pass
            }
        }
        let target = Target {
            name: "synthetic",
            check: always_fail,
        };
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            budget: Budget::Iterations(50),
            corpus_dir: Some(dir.path().to_path_buf()),
            ..RunConfig::default()
        };
        let report = run_target(&target, &config).unwrap();
        assert!(!report.failures.is_empty());
        // Minimization drove every stored failure to the 3-byte floor.
        for (_, bytes) in load_cases(dir.path(), "synthetic").unwrap() {
            assert_eq!(bytes.len(), 3);
        }
        let replay = replay_target(&target, dir.path()).unwrap();
        assert_eq!(replay.failures.len(), replay.iterations as usize);
    }

    #[test]
    fn multi_worker_run_matches_budget() {
        let target = find_target("authorizer-parity-rbac").unwrap();
        let config = RunConfig {
            budget: Budget::Iterations(300),
            jobs: 3,
            stats_samples: 10,
            ..RunConfig::default()
        };
        let report = run_target(&target, &config).unwrap();
        assert_eq!(report.iterations, 300);
        assert!(report.failures.is_empty());
    }

    #[test]
    fn report_serializes_to_json_line() {
        let target = find_target("parser-safety").unwrap();
        let config = RunConfig {
            budget: Budget::Iterations(10),
            stats_samples: 5,
            ..RunConfig::default()
        };
        let report = run_target(&target, &config).unwrap();
        let line = report.to_json_line();
        let parsed: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(parsed["target"], "parser-safety");
        assert_eq!(parsed["iterations"], 10);
        assert!(parsed["failures"].as_array().unwrap().is_empty());
        assert!(parsed["stats"].is_object());
    }

    #[test]
    fn every_registered_target_survives_a_short_run() {
        for target in all_targets() {
            let config = RunConfig {
                budget: Budget::Iterations(200),
                stats_samples: 20,
                seed: 99,
                ..RunConfig::default()
            };
            let report = run_target(&target, &config).unwrap();
            assert!(
                report.failures.is_empty(),
                "target {} produced failures",
                target.name
            );
        }
    }
}

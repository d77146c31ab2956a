//! Random-direction surveys of shellability and sinkability, and the
//! flip-family experiment built on them.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use longsink::generators::ugly_flip_family;
use longsink::shelling::is_shellable;
use longsink::sinking::{is_sinkable, SinkOutcome};
use longsink::sphere::random_direction;
use longsink::{Error, SphereTriangulation, Tolerance};

use crate::sub_seed;

/// Verdicts at one sampled direction.
#[derive(Debug, Clone, Serialize)]
pub struct DirectionRecord {
    pub direction: [f64; 3],
    pub shellable: bool,
    /// `"sinkable"`, `"unsinkable"`, or `"singular"`.
    pub verdict: &'static str,
}

/// Aggregated survey: the three sink verdicts partition the directions, and
/// the shellable ones are always a subset of the sinkable ones.
#[derive(Debug, Clone, Serialize)]
pub struct SurveyReport {
    pub version: u32,
    pub seed: u64,
    pub vertex_count: usize,
    pub directions: usize,
    /// Degenerate directions hit while sampling; each was resampled from the
    /// same per-index stream and is not part of the fractions.
    pub degenerate_resampled: usize,
    pub shellable_frac: f64,
    pub sinkable_frac: f64,
    pub unsinkable_frac: f64,
    pub singular_frac: f64,
    pub elapsed_ms: u64,
    pub records: Vec<DirectionRecord>,
}

/// Tests `k` seeded random directions in parallel. Deterministic per seed:
/// direction `i` comes from its own sub-stream, so thread scheduling cannot
/// change the report.
pub fn direction_survey(
    t: &SphereTriangulation,
    k: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<SurveyReport, Error> {
    let started = Instant::now();
    let outcomes: Vec<(DirectionRecord, usize)> = (0..k)
        .into_par_iter()
        .map(|i| -> Result<(DirectionRecord, usize), Error> {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, i as u64));
            let mut resampled = 0;
            loop {
                let dir = random_direction(&mut rng);
                let shellable = match is_shellable(t, &dir, tol) {
                    Ok(b) => b,
                    Err(Error::DegenerateDirection(_)) => {
                        resampled += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let sink = match is_sinkable(t, &dir, tol) {
                    Ok(r) => r,
                    Err(Error::DegenerateDirection(_)) => {
                        resampled += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let verdict = match sink.outcome {
                    SinkOutcome::Sinkable(_) => "sinkable",
                    SinkOutcome::Unsinkable => "unsinkable",
                    SinkOutcome::Singular { .. } => "singular",
                };
                debug_assert!(!shellable || verdict == "sinkable");
                let record = DirectionRecord {
                    direction: [dir.x, dir.y, dir.z],
                    shellable,
                    verdict,
                };
                return Ok((record, resampled));
            }
        })
        .collect::<Result<_, _>>()?;

    let denom = k.max(1) as f64;
    let frac = |pred: &dyn Fn(&DirectionRecord) -> bool| {
        outcomes.iter().filter(|(r, _)| pred(r)).count() as f64 / denom
    };
    Ok(SurveyReport {
        version: 1,
        seed,
        vertex_count: t.n(),
        directions: k,
        degenerate_resampled: outcomes.iter().map(|(_, n)| n).sum(),
        shellable_frac: frac(&|r| r.shellable),
        sinkable_frac: frac(&|r| r.verdict == "sinkable"),
        unsinkable_frac: frac(&|r| r.verdict == "unsinkable"),
        singular_frac: frac(&|r| r.verdict == "singular"),
        elapsed_ms: started.elapsed().as_millis() as u64,
        records: outcomes.into_iter().map(|(r, _)| r).collect(),
    })
}

/// Surveys `instances` flip-family triangulations of `n` vertices, each over
/// `directions` random directions. Returns CSV with columns
/// `seed,n,shellable_frac,sinkable_frac,singular_frac`; the per-row seed
/// regenerates that row's triangulation. Header-only when `instances` is 0.
pub fn family_experiment(
    instances: usize,
    n: usize,
    directions: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<String, Error> {
    let rows: Vec<String> = (0..instances)
        .into_par_iter()
        .map(|i| -> Result<String, Error> {
            let instance_seed = sub_seed(seed, i as u64);
            let t = ugly_flip_family(n, instance_seed)?;
            let report = direction_survey(&t, directions, sub_seed(instance_seed, 1), tol)?;
            Ok(format!(
                "{},{},{},{},{}",
                instance_seed,
                n,
                report.shellable_frac,
                report.sinkable_frac,
                report.singular_frac
            ))
        })
        .collect::<Result<_, _>>()?;
    let mut csv = String::from("seed,n,shellable_frac,sinkable_frac,singular_frac\n");
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    Ok(csv)
}

//! Optional on-disk memo of exact count sequences, enabled by pointing
//! `GUREVICH_LAB_CACHE` at a directory. Entries are keyed by a SHA-256
//! of the system, group, labels, `n_max` and counting method.

use std::path::PathBuf;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::extension::{
    estimate_from_counts, estimate_gurevich_with, radial_shape, CountMethod, CountOptions, CountSequence,
    GrowthEstimate, SkewSystem,
};

pub const CACHE_ENV: &str = "GUREVICH_LAB_CACHE";

#[derive(Serialize, Deserialize)]
struct Entry {
    counts: Vec<String>,
    frontier: Vec<usize>,
    method: CountMethod,
}

/// Content hash identifying a count sequence.
pub fn cache_key(skew: &SkewSystem, n_max: usize, method: CountMethod) -> String {
    let sft = skew.base();
    let labels: Vec<_> = sft
        .edges()
        .into_iter()
        .map(|(i, j)| json!([i, j, skew.label(i, j)]))
        .collect();
    let doc = json!({
        "alphabet": sft.alphabet_size(),
        "edges": sft.edges(),
        "group": skew.group().kind(),
        "generators": skew.group().generators(),
        "labels": labels,
        "n_max": n_max,
        "method": method,
    });
    hex::encode(Sha256::digest(doc.to_string().as_bytes()))
}

fn resolved(skew: &SkewSystem, method: CountMethod) -> CountMethod {
    match method {
        CountMethod::Auto if radial_shape(skew).is_ok() => CountMethod::Radial,
        CountMethod::Auto => CountMethod::BallDp,
        m => m,
    }
}

/// Unweighted estimate, reading and filling the cache when enabled.
pub fn estimate_cached(skew: &SkewSystem, n_max: usize, options: CountOptions) -> Result<GrowthEstimate> {
    let Some(dir) = std::env::var_os(CACHE_ENV).map(PathBuf::from) else {
        return estimate_gurevich_with(skew, n_max, None, options);
    };
    let method = resolved(skew, options.method);
    let path = dir.join(format!("{}.json", cache_key(skew, n_max, method)));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(entry) = serde_json::from_str::<Entry>(&text) {
            let counts: Option<Vec<BigUint>> = entry.counts.iter().map(|s| s.parse().ok()).collect();
            if let Some(counts) = counts.filter(|c| c.len() == n_max) {
                return estimate_from_counts(CountSequence::Exact(counts), entry.frontier, entry.method);
            }
        }
    }
    let est = estimate_gurevich_with(skew, n_max, None, CountOptions { method, ..options })?;
    if let CountSequence::Exact(c) = &est.counts {
        let entry = Entry {
            counts: c.iter().map(|z| z.to_string()).collect(),
            frontier: est.frontier.clone(),
            method: est.method,
        };
        std::fs::create_dir_all(&dir)?;
        std::fs::write(&path, serde_json::to_string(&entry).expect("entry serializes"))?;
    }
    Ok(est)
}

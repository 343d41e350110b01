use std::collections::BTreeMap;

use rand::Rng;

use crate::{par, rng, Error, Result};

/// Linear-interpolation quantile of an ascending slice, `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty slice");
    let h = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub(crate) fn percentile_interval(mut values: Vec<f64>, confidence: f64) -> Result<(f64, f64)> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidQuery(format!(
            "confidence {confidence} not in (0, 1)"
        )));
    }
    values.retain(|v| v.is_finite());
    if values.is_empty() {
        return Err(Error::UndefinedEstimate(
            "no finite bootstrap replicates".into(),
        ));
    }
    values.sort_by(f64::total_cmp);
    let alpha = 1.0 - confidence;
    Ok((
        percentile(&values, alpha / 2.0),
        percentile(&values, 1.0 - alpha / 2.0),
    ))
}

/// Stratified percentile bootstrap.
///
/// Every resample draws, within each stratum, as many records as the
/// stratum holds, with replacement. Resample `r` uses
/// `rng::stream(seed, r)`.
pub fn bootstrap_ci<T, S, F>(
    records: &[T],
    stratum: S,
    statistic: F,
    n_resamples: usize,
    confidence: f64,
    seed: u64,
) -> Result<(f64, f64)>
where
    T: Copy + Send + Sync,
    S: Fn(&T) -> u64,
    F: Fn(&[T]) -> f64 + Sync + Send,
{
    if n_resamples < 100 {
        return Err(Error::InvalidQuery(format!(
            "n_resamples = {n_resamples} < 100"
        )));
    }
    let mut strata: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        strata.entry(stratum(r)).or_default().push(i);
    }
    if strata.is_empty() {
        return Err(Error::DegenerateStratum("no records".into()));
    }
    if let Some((key, idx)) = strata.iter().find(|(_, v)| v.len() < 2) {
        return Err(Error::DegenerateStratum(format!(
            "stratum {key} has {} record(s); at least 2 are required",
            idx.len()
        )));
    }
    let groups: Vec<Vec<usize>> = strata.into_values().collect();
    let stats = par::map_range(n_resamples, |r| {
        let mut rng = rng::stream(seed, r as u64);
        let mut sample = Vec::with_capacity(records.len());
        for idx in &groups {
            for _ in 0..idx.len() {
                sample.push(records[idx[rng.random_range(0..idx.len())]]);
            }
        }
        statistic(&sample)
    });
    percentile_interval(stats, confidence)
}

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::simcore::{CountsTable, OutcomeTable};
use crate::{par, rng, Error, Result};

/// Finite distribution over outcome tuples (written as bitstrings).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    support: Vec<String>,
    probabilities: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(support: Vec<String>, probabilities: Vec<f64>) -> Result<Self> {
        if support.len() != probabilities.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} outcomes but {} probabilities",
                support.len(),
                probabilities.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &support {
            if !seen.insert(s) {
                return Err(Error::InvalidDistribution(format!(
                    "duplicate outcome {s:?}"
                )));
            }
        }
        if probabilities.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidDistribution(
                "negative or NaN probability".into(),
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self {
            support,
            probabilities,
        })
    }

    /// Uniform distribution over `support`.
    pub fn uniform(support: Vec<String>) -> Result<Self> {
        let n = support.len();
        Self::new(support, vec![1.0 / n as f64; n])
    }

    pub fn from_table(table: &impl OutcomeTable) -> Result<Self> {
        let total = table.total_weight();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("zero total weight".into()));
        }
        let (support, probabilities) = table
            .weighted()
            .into_iter()
            .map(|(k, w)| (k.to_string(), w / total))
            .unzip();
        let mut d = Self {
            support,
            probabilities,
        };
        // renormalize away the last ulp of rounding
        let s: f64 = d.probabilities.iter().sum();
        d.probabilities.iter_mut().for_each(|p| *p /= s);
        Ok(d)
    }

    pub fn support(&self) -> &[String] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }
}

/// Shannon entropy in bits, with 0·log 0 = 0.
pub fn plugin_entropy(dist: &DiscreteDistribution) -> f64 {
    -dist
        .probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Plug-in entropy (bits) of the marginal of `table` over `labels`.
pub fn plugin_entropy_of(table: &impl OutcomeTable, labels: &[&str]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::InvalidQuery("empty variable set".into()));
    }
    let marginal = table.marginal_probabilities(labels)?;
    Ok(entropy_of_weights(marginal.values().copied()))
}

pub(crate) fn entropy_of_weights(weights: impl Iterator<Item = f64> + Clone) -> f64 {
    let total: f64 = weights.clone().sum();
    if total <= 0.0 {
        return 0.0;
    }
    // H = log2 N - (1/N) sum w log2 w
    let acc: f64 = weights.filter(|&w| w > 0.0).map(|w| w * w.log2()).sum();
    (total.log2() - acc / total).max(0.0)
}

/// Plug-in and Miller–Madow entropy estimates for one variable set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub plugin_bits: f64,
    pub miller_madow_bits: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_samples: u64,
}

/// Miller–Madow corrected entropy of a counts table.
///
/// Adds `(K - 1) / (2 N ln 2)` bits to the plug-in value, `K` being the
/// number of outcomes with a nonzero count. The corrected value is capped
/// at the alphabet bound `bits` = width of the bit order, which keeps it in
/// `[plugin, log2 |alphabet|]`. The interval fields are set to the point
/// estimate; see [`entropy_with_ci`] for a bootstrap interval.
pub fn miller_madow_entropy(counts: &CountsTable) -> EntropyEstimate {
    let plugin = entropy_of_weights(counts.counts().values().map(|&c| c as f64));
    let mm = miller_madow_from(plugin, counts);
    EntropyEstimate {
        plugin_bits: plugin,
        miller_madow_bits: mm,
        ci_low: mm,
        ci_high: mm,
        n_samples: counts.total_shots(),
    }
}

fn miller_madow_from(plugin: f64, counts: &CountsTable) -> f64 {
    miller_madow_bits(
        plugin,
        counts.observed_outcomes(),
        counts.total_shots(),
        counts.bit_order().len(),
    )
}

/// Plug-in value plus `(observed - 1) / (2 n ln 2)`, capped at `width` bits.
pub(crate) fn miller_madow_bits(plugin: f64, observed: usize, n: u64, width: usize) -> f64 {
    if n == 0 {
        return plugin;
    }
    let k = observed as f64;
    (plugin + (k - 1.0).max(0.0) / (2.0 * n as f64 * LN_2)).min((width as f64).max(plugin))
}

/// Entropy of a histogram over a `width`-bit alphabet.
pub(crate) fn histogram_entropy(hist: &[u64], width: usize, corrected: bool) -> f64 {
    let plugin = entropy_of_weights(hist.iter().map(|&c| c as f64));
    if !corrected {
        return plugin;
    }
    let observed = hist.iter().filter(|&&c| c > 0).count();
    miller_madow_bits(plugin, observed, hist.iter().sum(), width)
}

/// Miller–Madow estimate with a multinomial percentile bootstrap interval.
pub fn entropy_with_ci(
    counts: &CountsTable,
    n_resamples: usize,
    confidence: f64,
    seed: u64,
) -> Result<EntropyEstimate> {
    if n_resamples < 100 {
        return Err(Error::InvalidQuery(format!(
            "n_resamples = {n_resamples} < 100"
        )));
    }
    let mut est = miller_madow_entropy(counts);
    let n = counts.total_shots();
    if n == 0 {
        return Err(Error::UndefinedEstimate("no shots".into()));
    }
    let keys: Vec<&String> = counts.counts().keys().collect();
    let cdf: Vec<u64> = counts
        .counts()
        .values()
        .scan(0u64, |acc, &c| {
            *acc += c;
            Some(*acc)
        })
        .collect();
    let bit_order = counts.bit_order().to_vec();
    let stats = par::map_range(n_resamples, |r| {
        let mut rng = rng::stream(seed, r as u64);
        let mut hist = vec![0u64; keys.len()];
        for _ in 0..n {
            let u = rng.random_range(0..n);
            hist[cdf.partition_point(|&c| c <= u)] += 1;
        }
        let resampled: BTreeMap<String, u64> = keys
            .iter()
            .zip(&hist)
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| ((*k).clone(), c))
            .collect();
        let t = CountsTable::new(bit_order.clone(), resampled).expect("same keys");
        miller_madow_entropy(&t).miller_madow_bits
    });
    let (lo, hi) = super::bootstrap::percentile_interval(stats, confidence)?;
    est.ci_low = lo.min(est.miller_madow_bits);
    est.ci_high = hi.max(est.miller_madow_bits);
    Ok(est)
}

/// Mutual information between two disjoint variable sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutualInformation {
    /// H(A) + H(B) − H(AB) as computed; may be negative after correction.
    pub raw_bits: f64,
    /// `raw_bits` clipped at zero, for reporting.
    pub bits: f64,
    pub corrected: bool,
}

impl MutualInformation {
    fn from_raw(raw: f64, corrected: bool) -> Self {
        Self {
            raw_bits: raw,
            bits: raw.max(0.0),
            corrected,
        }
    }
}

/// I(A;B) from counts, each entropy plug-in or Miller–Madow per `corrected`.
pub fn mutual_information(
    counts: &CountsTable,
    vars_a: &[&str],
    vars_b: &[&str],
    corrected: bool,
) -> Result<MutualInformation> {
    check_disjoint(vars_a, vars_b)?;
    let joint: Vec<&str> = vars_a.iter().chain(vars_b).copied().collect();
    let h = |vars: &[&str]| -> Result<f64> {
        let m = counts.marginal(vars)?;
        let e = miller_madow_entropy(&m);
        Ok(if corrected {
            e.miller_madow_bits
        } else {
            e.plugin_bits
        })
    };
    let raw = h(vars_a)? + h(vars_b)? - h(&joint)?;
    Ok(MutualInformation::from_raw(raw, corrected))
}

/// Plug-in I(A;B) on any outcome table (exact distributions included).
pub fn plugin_mutual_information(
    table: &impl OutcomeTable,
    vars_a: &[&str],
    vars_b: &[&str],
) -> Result<MutualInformation> {
    check_disjoint(vars_a, vars_b)?;
    let joint: Vec<&str> = vars_a.iter().chain(vars_b).copied().collect();
    let raw = plugin_entropy_of(table, vars_a)? + plugin_entropy_of(table, vars_b)?
        - plugin_entropy_of(table, &joint)?;
    Ok(MutualInformation::from_raw(raw, false))
}

fn check_disjoint(a: &[&str], b: &[&str]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidQuery("empty variable set".into()));
    }
    if let Some(x) = a.iter().find(|x| b.contains(x)) {
        return Err(Error::InvalidQuery(format!(
            "variable {x:?} appears on both sides"
        )));
    }
    Ok(())
}

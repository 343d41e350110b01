use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Read access shared by sampled counts and exact outcome distributions.
pub trait OutcomeTable {
    fn bit_order(&self) -> &[String];

    /// Outcome strings with nonnegative weights (counts or probabilities).
    fn weighted(&self) -> Vec<(&str, f64)>;

    fn total_weight(&self) -> f64 {
        self.weighted().iter().map(|(_, w)| w).sum()
    }

    fn position(&self, label: &str) -> Result<usize> {
        self.bit_order()
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| {
                Error::InvalidQuery(format!(
                    "label {label:?} not in bit order {:?}",
                    self.bit_order()
                ))
            })
    }

    /// Sign expectation `E[(-1)^(sum of the selected bits)]`.
    ///
    /// For one bit measured after a terminal basis rotation this is
    /// `p(0) - p(1)`, the expectation of the rotated Pauli.
    fn parity_expectation(&self, labels: &[&str]) -> Result<f64> {
        let pos: Vec<usize> = labels
            .iter()
            .map(|l| self.position(l))
            .collect::<Result<_>>()?;
        let total = self.total_weight();
        if total <= 0.0 {
            return Err(Error::UndefinedEstimate(
                "table has zero total weight".into(),
            ));
        }
        let mut acc = 0.0;
        for (outcome, w) in self.weighted() {
            let bytes = outcome.as_bytes();
            let ones = pos.iter().filter(|&&p| bytes[p] == b'1').count();
            acc += if ones % 2 == 0 { w } else { -w };
        }
        Ok(acc / total)
    }

    /// Normalized marginal distribution over `labels`, keyed by outcome string.
    fn marginal_probabilities(&self, labels: &[&str]) -> Result<BTreeMap<String, f64>> {
        let pos: Vec<usize> = labels
            .iter()
            .map(|l| self.position(l))
            .collect::<Result<_>>()?;
        let total = self.total_weight();
        if total <= 0.0 {
            return Err(Error::UndefinedEstimate(
                "table has zero total weight".into(),
            ));
        }
        let mut out = BTreeMap::new();
        for (outcome, w) in self.weighted() {
            let key = project(outcome, &pos);
            *out.entry(key).or_insert(0.0) += w / total;
        }
        Ok(out)
    }
}

fn project(outcome: &str, positions: &[usize]) -> String {
    let bytes = outcome.as_bytes();
    positions.iter().map(|&p| bytes[p] as char).collect()
}

fn check_key(key: &str, width: usize) -> Result<()> {
    if key.len() != width || !key.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::InvalidCounts(format!(
            "outcome {key:?} is not a {width}-bit string"
        )));
    }
    Ok(())
}

fn check_bit_order(bit_order: &[String]) -> Result<()> {
    if bit_order.is_empty() {
        return Err(Error::InvalidCounts("empty bit_order".into()));
    }
    for (i, l) in bit_order.iter().enumerate() {
        if bit_order[i + 1..].contains(l) {
            return Err(Error::InvalidCounts(format!(
                "duplicate label {l:?} in bit_order"
            )));
        }
        if l.contains(',') || l.is_empty() {
            return Err(Error::InvalidCounts(format!(
                "label {l:?} is empty or contains a comma"
            )));
        }
    }
    Ok(())
}

/// Shot counts per outcome bitstring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCounts")]
pub struct CountsTable {
    bit_order: Vec<String>,
    counts: BTreeMap<String, u64>,
    total_shots: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCounts {
    bit_order: Vec<String>,
    counts: BTreeMap<String, u64>,
    total_shots: u64,
}

impl TryFrom<RawCounts> for CountsTable {
    type Error = Error;

    fn try_from(raw: RawCounts) -> Result<Self> {
        let table = CountsTable::new(raw.bit_order, raw.counts)?;
        if table.total_shots != raw.total_shots {
            return Err(Error::InvalidCounts(format!(
                "total_shots {} does not match the sum of counts {}",
                raw.total_shots, table.total_shots
            )));
        }
        Ok(table)
    }
}

impl CountsTable {
    pub fn new<S: Into<String>>(
        bit_order: impl IntoIterator<Item = S>,
        counts: BTreeMap<String, u64>,
    ) -> Result<Self> {
        let bit_order: Vec<String> = bit_order.into_iter().map(Into::into).collect();
        check_bit_order(&bit_order)?;
        for key in counts.keys() {
            check_key(key, bit_order.len())?;
        }
        let total_shots = counts.values().sum();
        Ok(Self {
            bit_order,
            counts,
            total_shots,
        })
    }

    /// Builds a table from `(outcome, count)` pairs; repeated outcomes add up.
    pub fn from_pairs<S: Into<String>, K: AsRef<str>>(
        bit_order: impl IntoIterator<Item = S>,
        pairs: impl IntoIterator<Item = (K, u64)>,
    ) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for (k, c) in pairs {
            *counts.entry(k.as_ref().to_string()).or_insert(0) += c;
        }
        Self::new(bit_order, counts)
    }

    /// Histogram over outcome indices where bit `j` of the index is
    /// `bit_order[j]`. Zero bins are omitted.
    pub fn from_histogram(bit_order: Vec<String>, histogram: &[u64]) -> Result<Self> {
        let width = bit_order.len();
        if histogram.len() != 1 << width {
            return Err(Error::InvalidCounts(format!(
                "histogram has {} bins, expected {}",
                histogram.len(),
                1usize << width
            )));
        }
        let counts = histogram
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(idx, &c)| (index_to_string(idx, width), c))
            .collect();
        Self::new(bit_order, counts)
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn total_shots(&self) -> u64 {
        self.total_shots
    }

    pub fn get(&self, outcome: &str) -> u64 {
        self.counts.get(outcome).copied().unwrap_or(0)
    }

    /// Number of outcomes with a nonzero count.
    pub fn observed_outcomes(&self) -> usize {
        self.counts.values().filter(|&&c| c > 0).count()
    }

    /// Counts summed over every label not in `labels`, in the order given.
    pub fn marginal(&self, labels: &[&str]) -> Result<CountsTable> {
        if labels.is_empty() {
            return Err(Error::InvalidQuery("empty variable set".into()));
        }
        let pos: Vec<usize> = labels
            .iter()
            .map(|l| self.position(l))
            .collect::<Result<_>>()?;
        let mut counts = BTreeMap::new();
        for (outcome, &c) in &self.counts {
            *counts.entry(project(outcome, &pos)).or_insert(0) += c;
        }
        CountsTable::new(labels.iter().copied(), counts)
    }

    /// Sums two tables with the same bit order.
    pub fn merged(&self, other: &CountsTable) -> Result<CountsTable> {
        if self.bit_order != other.bit_order {
            return Err(Error::InvalidCounts(format!(
                "cannot merge bit orders {:?} and {:?}",
                self.bit_order, other.bit_order
            )));
        }
        let mut counts = self.counts.clone();
        for (k, &c) in &other.counts {
            *counts.entry(k.clone()).or_insert(0) += c;
        }
        CountsTable::new(self.bit_order.clone(), counts)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("counts table serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// CSV with a `# bit_order=...` comment line, then `outcome,count` rows.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# bit_order={}\n", self.bit_order.join(","));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["outcome", "count"])
            .expect("in-memory write");
        for (k, c) in &self.counts {
            w.write_record([k.as_str(), &c.to_string()])
                .expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf8"));
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
        let bit_order = first
            .trim_end_matches('\r')
            .strip_prefix("# bit_order=")
            .ok_or_else(|| Error::InvalidCounts("missing '# bit_order=' header line".into()))?;
        let bit_order: Vec<String> = bit_order.split(',').map(str::to_string).collect();
        let mut reader = csv::Reader::from_reader(rest.as_bytes());
        let headers = reader.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["outcome", "count"] {
            return Err(Error::InvalidCounts(format!(
                "expected header outcome,count, found {headers:?}"
            )));
        }
        let mut counts = BTreeMap::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec?;
            let count: u64 = rec[1].parse().map_err(|e| {
                Error::InvalidCounts(format!("row {}: bad count {:?}: {e}", line + 1, &rec[1]))
            })?;
            if counts.insert(rec[0].to_string(), count).is_some() {
                return Err(Error::InvalidCounts(format!(
                    "duplicate outcome {:?}",
                    &rec[0]
                )));
            }
        }
        Self::new(bit_order, counts)
    }
}

impl OutcomeTable for CountsTable {
    fn bit_order(&self) -> &[String] {
        &self.bit_order
    }

    fn weighted(&self) -> Vec<(&str, f64)> {
        self.counts
            .iter()
            .map(|(k, &c)| (k.as_str(), c as f64))
            .collect()
    }

    fn total_weight(&self) -> f64 {
        self.total_shots as f64
    }
}

/// Exact outcome distribution; the expectation-mode counterpart of
/// [`CountsTable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbabilityTable {
    bit_order: Vec<String>,
    probabilities: BTreeMap<String, f64>,
}

impl ProbabilityTable {
    pub fn new<S: Into<String>>(
        bit_order: impl IntoIterator<Item = S>,
        probabilities: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let bit_order: Vec<String> = bit_order.into_iter().map(Into::into).collect();
        check_bit_order(&bit_order)?;
        let mut total = 0.0;
        for (k, &p) in &probabilities {
            check_key(k, bit_order.len())?;
            if !(p >= 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "negative probability for {k}"
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self {
            bit_order,
            probabilities,
        })
    }

    pub fn from_vector(bit_order: Vec<String>, probs: &[f64]) -> Result<Self> {
        let width = bit_order.len();
        let probabilities = probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (index_to_string(i, width), p))
            .collect();
        Self::new(bit_order, probabilities)
    }

    pub fn probabilities(&self) -> &BTreeMap<String, f64> {
        &self.probabilities
    }

    pub fn get(&self, outcome: &str) -> f64 {
        self.probabilities.get(outcome).copied().unwrap_or(0.0)
    }
}

impl OutcomeTable for ProbabilityTable {
    fn bit_order(&self) -> &[String] {
        &self.bit_order
    }

    fn weighted(&self) -> Vec<(&str, f64)> {
        self.probabilities
            .iter()
            .map(|(k, &p)| (k.as_str(), p))
            .collect()
    }
}

/// Character `j` of the result is bit `j` of `index`.
pub(crate) fn index_to_string(index: usize, width: usize) -> String {
    (0..width)
        .map(|j| if (index >> j) & 1 == 1 { '1' } else { '0' })
        .collect()
}

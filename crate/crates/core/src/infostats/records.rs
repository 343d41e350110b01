use serde::{Deserialize, Serialize};

use super::entropy::histogram_entropy;
use super::permutation::Labeled;
use crate::simcore::{CountsTable, OutcomeTable};
use crate::{Error, Result};

/// One shot: where it ran, its context label and its outcome bits.
///
/// `outcome` bit `j` is `bit_order[j]` of the owning [`RecordSet`];
/// `circuit` indexes the set's circuit names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotRecord {
    pub lane: u32,
    pub circuit: u32,
    pub label: u8,
    pub outcome: u32,
}

impl Labeled for ShotRecord {
    fn label(&self) -> u8 {
        self.label
    }

    fn with_label(mut self, label: u8) -> Self {
        self.label = label;
        self
    }

    fn stratum(&self) -> u64 {
        u64::from(self.lane)
    }
}

impl ShotRecord {
    /// Bootstrap stratum: one per (lane, circuit).
    pub fn lane_circuit(&self) -> u64 {
        (u64::from(self.lane) << 32) | u64::from(self.circuit)
    }
}

/// Per-shot records sharing one bit order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecordSet {
    pub bit_order: Vec<String>,
    pub circuits: Vec<String>,
    pub records: Vec<ShotRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    lane: u32,
    circuit: String,
    label: u8,
    outcome: String,
}

impl RecordSet {
    pub fn new(bit_order: Vec<String>) -> Self {
        Self {
            bit_order,
            ..Self::default()
        }
    }

    fn circuit_index(&mut self, name: &str) -> u32 {
        match self.circuits.iter().position(|c| c == name) {
            Some(i) => i as u32,
            None => {
                self.circuits.push(name.to_string());
                (self.circuits.len() - 1) as u32
            }
        }
    }

    /// Expands a counts table into one record per shot, in outcome order.
    pub fn push_counts(
        &mut self,
        lane: u32,
        circuit: &str,
        label: u8,
        counts: &CountsTable,
    ) -> Result<()> {
        if counts.bit_order() != self.bit_order.as_slice() {
            return Err(Error::InvalidCounts(format!(
                "bit order {:?} does not match record set {:?}",
                counts.bit_order(),
                self.bit_order
            )));
        }
        let c = self.circuit_index(circuit);
        for (outcome, &n) in counts.counts() {
            let bits = parse_outcome(outcome)?;
            self.records.extend(std::iter::repeat_n(
                ShotRecord {
                    lane,
                    circuit: c,
                    label,
                    outcome: bits,
                },
                n as usize,
            ));
        }
        Ok(())
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.bit_order
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::InvalidQuery(format!("label {label:?} not in record bit order")))
    }

    pub fn outcome_string(&self, outcome: u32) -> String {
        (0..self.bit_order.len())
            .map(|j| if (outcome >> j) & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Counts over `label_name` followed by the record bit order.
    pub fn joint_counts(&self, label_name: &str) -> Result<CountsTable> {
        let mut order = vec![label_name.to_string()];
        order.extend(self.bit_order.iter().cloned());
        let mut hist = vec![0u64; 1 << order.len()];
        for r in &self.records {
            hist[(r.outcome as usize) << 1 | usize::from(r.label & 1)] += 1;
        }
        CountsTable::from_histogram(order, &hist)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(CsvRow {
                lane: r.lane,
                circuit: self.circuits[r.circuit as usize].clone(),
                label: r.label,
                outcome: self.outcome_string(r.outcome),
            })?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(format!(
            "# bit_order={}\n{}",
            self.bit_order.join(","),
            String::from_utf8(bytes).expect("utf8")
        ))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
        let order = first
            .trim_end_matches('\r')
            .strip_prefix("# bit_order=")
            .ok_or_else(|| Error::InvalidCounts("missing '# bit_order=' header line".into()))?;
        let mut set = RecordSet::new(order.split(',').map(str::to_string).collect());
        let width = set.bit_order.len();
        for (i, row) in csv::Reader::from_reader(rest.as_bytes())
            .deserialize()
            .enumerate()
        {
            let row: CsvRow = row?;
            if row.outcome.len() != width {
                return Err(Error::InvalidCounts(format!(
                    "record {}: outcome {:?} is not {width} bits",
                    i + 1,
                    row.outcome
                )));
            }
            let outcome = parse_outcome(&row.outcome)?;
            let circuit = set.circuit_index(&row.circuit);
            set.records.push(ShotRecord {
                lane: row.lane,
                circuit,
                label: row.label,
                outcome,
            });
        }
        Ok(set)
    }
}

fn parse_outcome(s: &str) -> Result<u32> {
    let mut v = 0u32;
    for (j, b) in s.bytes().enumerate() {
        match b {
            b'0' => {}
            b'1' => v |= 1 << j,
            _ => {
                return Err(Error::InvalidCounts(format!(
                    "outcome {s:?} is not a bitstring"
                )))
            }
        }
    }
    Ok(v)
}

/// Named statistics over labeled shot records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "statistic", rename_all = "snake_case")]
pub enum RecordStatistic {
    /// Lane-averaged `E(label 0) − E(label 1)` of the witness
    /// `½(s_a + s_b)`, `s = +1` for bit 0 and `−1` for bit 1.
    LaneBalancedDelta { probe: [String; 2] },
    /// I(label; vars) from the pooled records.
    MutualInformation { vars: Vec<String>, corrected: bool },
}

impl RecordStatistic {
    pub fn name(&self) -> String {
        match self {
            RecordStatistic::LaneBalancedDelta { .. } => "lane_balanced_delta".into(),
            RecordStatistic::MutualInformation { vars, .. } => {
                format!("mutual_information(Y;{})", vars.join(""))
            }
        }
    }

    /// Resolves bit positions against `set` and returns the evaluator.
    pub fn bind(&self, set: &RecordSet) -> Result<impl Fn(&[ShotRecord]) -> f64 + Sync + Send> {
        let kind = match self {
            RecordStatistic::LaneBalancedDelta { probe } => {
                Bound::Delta(set.position(&probe[0])?, set.position(&probe[1])?)
            }
            RecordStatistic::MutualInformation { vars, corrected } => {
                if vars.is_empty() {
                    return Err(Error::InvalidQuery("empty variable set".into()));
                }
                let pos = vars
                    .iter()
                    .map(|v| set.position(v))
                    .collect::<Result<Vec<_>>>()?;
                Bound::Mi(pos, *corrected)
            }
        };
        Ok(move |records: &[ShotRecord]| kind.evaluate(records))
    }
}

enum Bound {
    Delta(usize, usize),
    Mi(Vec<usize>, bool),
}

impl Bound {
    fn evaluate(&self, records: &[ShotRecord]) -> f64 {
        match self {
            Bound::Delta(a, b) => lane_balanced_delta(records, *a, *b),
            Bound::Mi(pos, corrected) => label_mutual_information(records, pos, *corrected),
        }
    }
}

fn lane_balanced_delta(records: &[ShotRecord], a: usize, b: usize) -> f64 {
    use std::collections::BTreeMap;
    // lane -> [sum0, n0, sum1, n1]
    let mut acc: BTreeMap<u32, [f64; 4]> = BTreeMap::new();
    for r in records {
        let sa = if (r.outcome >> a) & 1 == 1 { -1.0 } else { 1.0 };
        let sb = if (r.outcome >> b) & 1 == 1 { -1.0 } else { 1.0 };
        let e = acc.entry(r.lane).or_insert([0.0; 4]);
        let k = if r.label == 0 { 0 } else { 2 };
        e[k] += 0.5 * (sa + sb);
        e[k + 1] += 1.0;
    }
    let diffs: Vec<f64> = acc
        .values()
        .filter(|e| e[1] > 0.0 && e[3] > 0.0)
        .map(|e| e[0] / e[1] - e[2] / e[3])
        .collect();
    if diffs.is_empty() {
        return f64::NAN;
    }
    diffs.iter().sum::<f64>() / diffs.len() as f64
}

fn label_mutual_information(records: &[ShotRecord], pos: &[usize], corrected: bool) -> f64 {
    let width = pos.len();
    let mut joint = vec![0u64; 1 << (width + 1)];
    for r in records {
        let mut v = 0usize;
        for (j, &p) in pos.iter().enumerate() {
            v |= (((r.outcome >> p) & 1) as usize) << j;
        }
        joint[v << 1 | usize::from(r.label & 1)] += 1;
    }
    let mut y = vec![0u64; 2];
    let mut x = vec![0u64; 1 << width];
    for (idx, &c) in joint.iter().enumerate() {
        y[idx & 1] += c;
        x[idx >> 1] += c;
    }
    histogram_entropy(&y, 1, corrected) + histogram_entropy(&x, width, corrected)
        - histogram_entropy(&joint, width + 1, corrected)
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::simcore::ProbabilityTable;
use crate::{Error, Result};

/// Context bits (C0, C1, C2); bit `j` of the inner value is `C_j`.
///
/// Written as a string in C0 C1 C2 order, so `"011"` has C0 = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Triple(u8);

impl Triple {
    pub const ALL: [Triple; 8] = [
        Triple(0),
        Triple(1),
        Triple(2),
        Triple(3),
        Triple(4),
        Triple(5),
        Triple(6),
        Triple(7),
    ];

    pub fn new(c0: u8, c1: u8, c2: u8) -> Result<Self> {
        if c0 > 1 || c1 > 1 || c2 > 1 {
            return Err(Error::InvalidPlan(format!(
                "context bits ({c0},{c1},{c2}) are not binary"
            )));
        }
        Ok(Triple(c0 | c1 << 1 | c2 << 2))
    }

    pub fn from_index(index: usize) -> Self {
        Triple((index % 8) as u8)
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }

    pub fn bit(self, j: usize) -> u8 {
        (self.0 >> j) & 1
    }

    pub fn bits(self) -> [u8; 3] {
        [self.bit(0), self.bit(1), self.bit(2)]
    }

    /// Parity label Y = C0 ⊕ C1 ⊕ C2.
    pub fn label(self) -> u8 {
        self.bit(0) ^ self.bit(1) ^ self.bit(2)
    }

    /// Same C0, C1 with C2 flipped: the opposite parity class.
    pub fn flip_c2(self) -> Self {
        Triple(self.0 ^ 0b100)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.bit(0), self.bit(1), self.bit(2))
    }
}

impl FromStr for Triple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let b = s.as_bytes();
        if b.len() != 3 || !b.iter().all(|&c| c == b'0' || c == b'1') {
            return Err(Error::InvalidPlan(format!(
                "{s:?} is not a 3-bit context triple"
            )));
        }
        Triple::new(b[0] - b'0', b[1] - b'0', b[2] - b'0')
    }
}

impl From<Triple> for String {
    fn from(t: Triple) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for Triple {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// The eight context triples split by parity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextEnsemble {
    pub even_class: [Triple; 4],
    pub odd_class: [Triple; 4],
}

impl Default for ContextEnsemble {
    fn default() -> Self {
        Self::parity()
    }
}

impl ContextEnsemble {
    /// Even class {000, 011, 101, 110}, odd class {001, 010, 100, 111}.
    pub fn parity() -> Self {
        let pick = |y: u8| {
            let v: Vec<Triple> = Triple::ALL.into_iter().filter(|t| t.label() == y).collect();
            [v[0], v[1], v[2], v[3]]
        };
        Self {
            even_class: pick(0),
            odd_class: pick(1),
        }
    }

    pub fn label(&self, triple: Triple) -> u8 {
        triple.label()
    }

    pub fn class(&self, label: u8) -> &[Triple; 4] {
        if label == 0 {
            &self.even_class
        } else {
            &self.odd_class
        }
    }

    /// Equiprobable joint distribution over (Y, C0, C1, C2).
    pub fn joint_distribution(&self) -> ProbabilityTable {
        let mut probs = std::collections::BTreeMap::new();
        for t in self.even_class.iter().chain(&self.odd_class) {
            probs.insert(format!("{}{t}", t.label()), 0.125);
        }
        ProbabilityTable::new(["Y", "C0", "C1", "C2"], probs).expect("valid ensemble table")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::OutcomeTable;

    #[test]
    fn classes_match_parity() {
        let e = ContextEnsemble::parity();
        let even: Vec<String> = e.even_class.iter().map(|t| t.to_string()).collect();
        let odd: Vec<String> = e.odd_class.iter().map(|t| t.to_string()).collect();
        let mut even_sorted = even.clone();
        even_sorted.sort();
        let mut odd_sorted = odd.clone();
        odd_sorted.sort();
        assert_eq!(even_sorted, ["000", "011", "101", "110"]);
        assert_eq!(odd_sorted, ["001", "010", "100", "111"]);
    }

    #[test]
    fn class_marginals_are_uniform() {
        let e = ContextEnsemble::parity();
        for y in 0..2 {
            let class = e.class(y);
            for i in 0..3 {
                let ones = class.iter().filter(|t| t.bit(i) == 1).count();
                assert_eq!(ones, 2);
                for j in i + 1..3 {
                    for pattern in 0..4u8 {
                        let n = class
                            .iter()
                            .filter(|t| t.bit(i) == pattern & 1 && t.bit(j) == pattern >> 1)
                            .count();
                        assert_eq!(n, 1, "class {y}, pair ({i},{j}), pattern {pattern}");
                    }
                }
            }
        }
    }

    #[test]
    fn string_round_trip_and_flip() {
        let t: Triple = "011".parse().unwrap();
        assert_eq!(t.bits(), [0, 1, 1]);
        assert_eq!(t.label(), 0);
        assert_eq!(t.flip_c2().to_string(), "010");
        assert_eq!(t.flip_c2().label(), 1);
        assert!("01".parse::<Triple>().is_err());
        assert!("012".parse::<Triple>().is_err());
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, "\"011\"");
        assert_eq!(serde_json::from_str::<Triple>(&json).unwrap(), t);
    }

    #[test]
    fn joint_distribution_is_normalized() {
        let p = ContextEnsemble::parity().joint_distribution();
        assert!((p.total_weight() - 1.0).abs() < 1e-15);
        assert_eq!(p.parity_expectation(&["Y", "C0", "C1", "C2"]).unwrap(), 1.0);
    }
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::entropy::entropy_of_weights;
use crate::simcore::OutcomeTable;
use crate::{Error, Result};

/// Möbius decomposition of I(Y; C) over the subset lattice of the context
/// variables, evaluated on classical outcome statistics (plug-in).
///
/// Subsets are keyed by concatenating their variable names in context
/// order, e.g. `"C0C2"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobiusAtoms {
    pub label: String,
    pub context: Vec<String>,
    /// g(S) = I(Y; C_S) in bits.
    pub mutual_information: BTreeMap<String, f64>,
    /// f(S) = Σ_{T⊆S} (−1)^{|S|−|T|} g(T), negatives retained.
    pub subset_values: BTreeMap<String, f64>,
    /// Positive part of `subset_values`, normalized to sum to 1 (all zero
    /// when no atom is positive).
    pub normalized_positive: BTreeMap<String, f64>,
    /// Top atom recomputed from entropies,
    /// Σ_T (−1)^{k−|T|} [H(C_T) − H(C_T|Y)], with H(·|Y) averaged over the
    /// label-conditioned distributions.
    pub top_atom_entropy_form: f64,
    /// Only the conditional part, −Σ_T (−1)^{k−|T|} H(C_T|Y). Equal to the
    /// top atom whenever the unconditioned context co-information vanishes
    /// (for example a uniformly distributed context register).
    pub top_atom_conditional_form: f64,
    pub warnings: Vec<String>,
}

impl MobiusAtoms {
    pub fn subset_key(&self, members: &[&str]) -> String {
        self.context
            .iter()
            .filter(|c| members.contains(&c.as_str()))
            .cloned()
            .collect()
    }

    pub fn top_key(&self) -> String {
        self.context.concat()
    }

    pub fn atom(&self, members: &[&str]) -> Option<f64> {
        self.subset_values.get(&self.subset_key(members)).copied()
    }

    /// The top atom via the mutual-information route.
    pub fn top_atom(&self) -> f64 {
        self.subset_values[&self.top_key()]
    }

    pub fn normalized_top(&self) -> f64 {
        self.normalized_positive[&self.top_key()]
    }

    /// Sum of atoms over all subsets of the given size.
    pub fn order_total(&self, size: usize) -> f64 {
        self.subset_values
            .iter()
            .filter(|(k, _)| self.members_of(k) == size)
            .map(|(_, v)| v)
            .sum()
    }

    fn members_of(&self, key: &str) -> usize {
        // keys are concatenations in context order; walk greedily
        let mut rest = key;
        let mut n = 0;
        for c in &self.context {
            if let Some(r) = rest.strip_prefix(c.as_str()) {
                rest = r;
                n += 1;
            }
        }
        n
    }
}

/// Möbius atoms for a three-variable context.
pub fn mobius_triplet_atom(
    table: &impl OutcomeTable,
    label: &str,
    context: [&str; 3],
) -> Result<MobiusAtoms> {
    mobius_atoms(table, label, &context)
}

/// Möbius atoms for a context of 1..=8 variables.
pub fn mobius_atoms(
    table: &impl OutcomeTable,
    label: &str,
    context: &[&str],
) -> Result<MobiusAtoms> {
    let k = context.len();
    if k == 0 || k > 8 {
        return Err(Error::InvalidQuery(format!(
            "context of {k} variables; need 1..=8"
        )));
    }
    if context.contains(&label) {
        return Err(Error::InvalidQuery(format!(
            "label {label:?} is also a context variable"
        )));
    }
    let y_pos = table.position(label)?;
    let c_pos: Vec<usize> = context
        .iter()
        .map(|c| table.position(c))
        .collect::<Result<_>>()?;
    let total = table.total_weight();
    if total <= 0.0 {
        return Err(Error::UndefinedEstimate(
            "table has zero total weight".into(),
        ));
    }
    let weighted = table.weighted();

    // per-label weights and per-(mask, label) marginal histograms
    let n_masks = 1usize << k;
    let mut label_weight = [0.0f64; 2];
    let mut cond_hist: Vec<[BTreeMap<usize, f64>; 2]> = (0..n_masks)
        .map(|_| [BTreeMap::new(), BTreeMap::new()])
        .collect();
    for (outcome, w) in &weighted {
        let bytes = outcome.as_bytes();
        let y = usize::from(bytes[y_pos] == b'1');
        label_weight[y] += w;
        let cbits: usize = c_pos
            .iter()
            .enumerate()
            .map(|(j, &p)| usize::from(bytes[p] == b'1') << j)
            .sum();
        for (mask, hist) in cond_hist.iter_mut().enumerate().skip(1) {
            *hist[y].entry(cbits & mask).or_insert(0.0) += w;
        }
    }

    let h_y = entropy_of_weights(label_weight.iter().copied());
    let mut g = vec![0.0f64; n_masks];
    let mut h_c = vec![0.0f64; n_masks];
    let mut h_c_given_y = vec![0.0f64; n_masks];
    for mask in 1..n_masks {
        let [h0, h1] = &cond_hist[mask];
        let mut merged: BTreeMap<usize, f64> = h0.clone();
        for (key, w) in h1 {
            *merged.entry(*key).or_insert(0.0) += w;
        }
        h_c[mask] = entropy_of_weights(merged.values().copied());
        // H(C_T | Y) = Σ_y p(y) H(C_T | Y = y)
        h_c_given_y[mask] = (0..2)
            .filter(|&y| label_weight[y] > 0.0)
            .map(|y| {
                label_weight[y] / total * entropy_of_weights(cond_hist[mask][y].values().copied())
            })
            .sum();
        // I(Y; C_T) = H(Y) + H(C_T) − H(Y, C_T)
        let joint = entropy_of_weights(h0.values().chain(h1.values()).copied());
        g[mask] = h_y + h_c[mask] - joint;
    }

    let key = |mask: usize| -> String {
        (0..k)
            .filter(|j| (mask >> j) & 1 == 1)
            .map(|j| context[j])
            .collect()
    };
    let sign = |outer: usize, inner: usize| -> f64 {
        if (outer.count_ones() - inner.count_ones()).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    };
    let mut subset_values = BTreeMap::new();
    let mut mutual_information = BTreeMap::new();
    for s in 1..n_masks {
        let mut f = 0.0;
        let mut t = s;
        // enumerate nonempty submasks of s
        while t > 0 {
            f += sign(s, t) * g[t];
            t = (t - 1) & s;
        }
        subset_values.insert(key(s), f);
        mutual_information.insert(key(s), g[s]);
    }

    let full = n_masks - 1;
    let mut unconditional = 0.0;
    let mut conditional = 0.0;
    for t in 1..n_masks {
        unconditional += sign(full, t) * h_c[t];
        conditional += sign(full, t) * h_c_given_y[t];
    }

    let positive: f64 = subset_values.values().filter(|&&v| v > 0.0).sum();
    let normalized_positive = subset_values
        .iter()
        .map(|(k, &v)| {
            (
                k.clone(),
                if positive > 0.0 && v > 0.0 {
                    v / positive
                } else {
                    0.0
                },
            )
        })
        .collect();

    let mut warnings = Vec::new();
    if h_y == 0.0 {
        warnings.push(format!("label {label} is constant"));
    }
    for (j, c) in context.iter().enumerate() {
        if h_c[1 << j] == 0.0 {
            warnings.push(format!("context variable {c} is constant"));
        }
    }

    Ok(MobiusAtoms {
        label: label.to_string(),
        context: context.iter().map(|c| c.to_string()).collect(),
        mutual_information,
        subset_values,
        normalized_positive,
        top_atom_entropy_form: unconditional - conditional,
        top_atom_conditional_form: -conditional,
        warnings,
    })
}

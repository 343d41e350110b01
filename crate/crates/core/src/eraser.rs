//! Visibility, distinguishability and complementarity analysis of the
//! eraser sweep.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::harness::{A62Plan, A62Run, Branch, REGISTER};
use crate::simcore::OutcomeTable;
use crate::{Error, Result};

/// Marker outcome label in the eraser circuits.
pub const MARKER: &str = "m";
/// Register qubit whose Z outcome labels the which-path branch.
pub const PATH_QUBIT: &str = "q1";

/// One analysis phase of a fringe scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub phi: f64,
    pub value: f64,
    pub sem: f64,
}

/// Fringe values across analysis phases at one marker strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeScan {
    pub lambda: f64,
    pub branch: Branch,
    /// The fringe is fitted as V cos(h φ − φ₀) + c with h = `harmonic`.
    pub harmonic: u32,
    pub phase_points: Vec<PhasePoint>,
    /// Marker outcome the scan is conditioned on, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditioning: Option<u8>,
}

/// Least-squares fringe parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    /// Fitted amplitude |V|, clamped to [0, 1 + 1e-9].
    pub visibility: f64,
    /// φ₀ in (−π, π].
    pub phase_offset: f64,
    pub offset: f64,
    /// Standard error of the amplitude propagated from the point sems.
    pub visibility_sem: f64,
}

/// Parity of `labels` over outcomes whose marker bit equals `condition`.
///
/// Returns (expectation, stratum weight, stratum fraction); the
/// expectation is `None` for an empty stratum, including one holding less
/// than 1e-12 of the total weight.
fn conditional_parity(
    table: &impl OutcomeTable,
    labels: &[&str],
    condition: Option<(&str, u8)>,
) -> Result<(Option<f64>, f64, f64)> {
    let pos: Vec<usize> = labels
        .iter()
        .map(|l| table.position(l))
        .collect::<Result<_>>()?;
    let cond = condition
        .map(|(l, m)| table.position(l).map(|p| (p, m)))
        .transpose()?;
    let total = table.total_weight();
    if total <= 0.0 {
        return Err(Error::UndefinedEstimate(
            "table has zero total weight".into(),
        ));
    }
    let (mut acc, mut weight) = (0.0, 0.0);
    for (outcome, w) in table.weighted() {
        let b = outcome.as_bytes();
        if let Some((p, m)) = cond {
            if b[p] - b'0' != m {
                continue;
            }
        }
        weight += w;
        let ones = pos.iter().filter(|&&p| b[p] == b'1').count();
        acc += if ones % 2 == 0 { w } else { -w };
    }
    // exact tables can leave roundoff-sized weight in an unreachable stratum
    let value = if weight > 1e-12 * total {
        Some(acc / weight)
    } else {
        None
    };
    Ok((value, weight, weight / total))
}

/// Builds a scan from per-phase tables. Points whose stratum is empty are
/// skipped. `sampled` selects binomial point sems (zero otherwise).
pub fn scan_from_tables<T: OutcomeTable>(
    branch: Branch,
    lambda: f64,
    tables: &[(f64, &T)],
    conditioning: Option<u8>,
    sampled: bool,
) -> Result<FringeScan> {
    let mut phase_points = Vec::with_capacity(tables.len());
    for (phi, table) in tables {
        let (value, weight, _) =
            conditional_parity(*table, &REGISTER, conditioning.map(|m| (MARKER, m)))?;
        if let Some(v) = value {
            let sem = if sampled {
                ((1.0 - v * v).max(0.0) / weight).sqrt()
            } else {
                0.0
            };
            phase_points.push(PhasePoint {
                phi: *phi,
                value: v,
                sem,
            });
        }
    }
    Ok(FringeScan {
        lambda,
        branch,
        harmonic: A62Plan::HARMONIC,
        phase_points,
        conditioning,
    })
}

fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Option<[f64; 3]> {
    let scale = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() <= 1e-10 * scale {
            return None;
        }
        m.swap(col, pivot);
        v.swap(col, pivot);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                let pivot_row = m[col];
                for (x, p) in m[row].iter_mut().zip(pivot_row).skip(col) {
                    *x -= f * p;
                }
                v[row] -= f * v[col];
            }
        }
    }
    Some([v[0] / m[0][0], v[1] / m[1][1], v[2] / m[2][2]])
}

fn invert3(m: [[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let mut inv = [[0.0; 3]; 3];
    for (j, e) in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        .into_iter()
        .enumerate()
    {
        let col = solve3(m, e)?;
        for i in 0..3 {
            inv[i][j] = col[i];
        }
    }
    Some(inv)
}

/// Fits V cos(h φ − φ₀) + c by ordinary least squares on
/// (cos hφ, sin hφ, 1).
pub fn fit_fringe(scan: &FringeScan) -> Result<FringeFit> {
    let h = f64::from(scan.harmonic.max(1));
    let period = TAU / h;
    let mut reduced: Vec<f64> = scan
        .phase_points
        .iter()
        .map(|p| p.phi.rem_euclid(period))
        .collect();
    reduced.sort_by(f64::total_cmp);
    reduced.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if reduced.len() < 4 {
        return Err(Error::RankDeficient(format!(
            "{} distinct phases per period; the fringe fit needs at least 4",
            reduced.len()
        )));
    }
    let rows: Vec<[f64; 3]> = scan
        .phase_points
        .iter()
        .map(|p| [(h * p.phi).cos(), (h * p.phi).sin(), 1.0])
        .collect();
    let mut xtx = [[0.0; 3]; 3];
    let mut xty = [0.0; 3];
    for (r, p) in rows.iter().zip(&scan.phase_points) {
        for i in 0..3 {
            xty[i] += r[i] * p.value;
            for j in 0..3 {
                xtx[i][j] += r[i] * r[j];
            }
        }
    }
    let inv = invert3(xtx).ok_or_else(|| Error::RankDeficient("singular fringe design".into()))?;
    let c: Vec<f64> = (0..3)
        .map(|i| (0..3).map(|j| inv[i][j] * xty[j]).sum())
        .collect();
    let amplitude = c[0].hypot(c[1]);
    let psi = c[1].atan2(c[0]);
    // Cov(c) = inv Xᵀ diag(sem²) X inv, projected on the amplitude direction
    let mut meat = [[0.0; 3]; 3];
    for (r, p) in rows.iter().zip(&scan.phase_points) {
        for i in 0..3 {
            for j in 0..3 {
                meat[i][j] += r[i] * r[j] * p.sem * p.sem;
            }
        }
    }
    let mut cov = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            cov[i][j] = (0..3)
                .flat_map(|k| (0..3).map(move |l| (k, l)))
                .map(|(k, l)| inv[i][k] * meat[k][l] * inv[l][j])
                .sum();
        }
    }
    let (u0, u1) = (psi.cos(), psi.sin());
    let var_v = u0 * u0 * cov[0][0] + 2.0 * u0 * u1 * cov[0][1] + u1 * u1 * cov[1][1];
    Ok(FringeFit {
        visibility: amplitude.clamp(0.0, 1.0 + 1e-9),
        phase_offset: psi,
        offset: c[2],
        visibility_sem: var_v.max(0.0).sqrt(),
    })
}

/// Fringe amplitude of a scan.
pub fn visibility_from_scan(scan: &FringeScan) -> Result<f64> {
    fit_fringe(scan).map(|f| f.visibility)
}

/// Per-outcome conditional visibilities and their weighted mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalVisibility {
    /// Indexed by marker outcome; `None` for a missing stratum.
    pub by_outcome: [Option<f64>; 2],
    pub phase_offsets: [Option<f64>; 2],
    pub weights: [f64; 2],
    /// Weighted mean over populated strata (weights renormalized).
    pub weighted_mean: f64,
    pub missing_strata: Vec<u8>,
}

/// Combines marker-conditioned scans. A stratum is missing when its scan
/// is absent, its weight is zero or its phases cannot support a fit.
pub fn conditional_visibility(
    scans: [Option<&FringeScan>; 2],
    weights: [f64; 2],
) -> Result<ConditionalVisibility> {
    let mut by_outcome = [None, None];
    let mut phase_offsets = [None, None];
    let mut missing = Vec::new();
    for m in 0..2 {
        let fit = match scans[m] {
            Some(scan) if weights[m] > 0.0 => fit_fringe(scan).ok(),
            _ => None,
        };
        match fit {
            Some(f) => {
                by_outcome[m] = Some(f.visibility);
                phase_offsets[m] = Some(f.phase_offset);
            }
            None => missing.push(m as u8),
        }
    }
    let norm: f64 = (0..2)
        .filter(|&m| by_outcome[m].is_some())
        .map(|m| weights[m])
        .sum();
    if norm <= 0.0 {
        return Err(Error::UndefinedEstimate(
            "no populated marker stratum".into(),
        ));
    }
    let weighted_mean = (0..2)
        .filter_map(|m| by_outcome[m].map(|v| v * weights[m] / norm))
        .sum();
    Ok(ConditionalVisibility {
        by_outcome,
        phase_offsets,
        weights,
        weighted_mean,
        missing_strata: missing,
    })
}

/// D = ½ Σ_m |p(m | branch 0) − p(m | branch 1)|, with the branch read from
/// `branch_label` and the marker from `marker_label`, both in Z.
pub fn distinguishability(
    counts: &impl OutcomeTable,
    branch_label: &str,
    marker_label: &str,
) -> Result<f64> {
    Ok(distinguishability_with_sem(counts, branch_label, marker_label, false)?.0)
}

fn distinguishability_with_sem(
    counts: &impl OutcomeTable,
    branch_label: &str,
    marker_label: &str,
    sampled: bool,
) -> Result<(f64, f64)> {
    let b = counts.position(branch_label)?;
    let m = counts.position(marker_label)?;
    // [branch][marker]
    let mut w = [[0.0f64; 2]; 2];
    for (outcome, weight) in counts.weighted() {
        let bytes = outcome.as_bytes();
        w[usize::from(bytes[b] == b'1')][usize::from(bytes[m] == b'1')] += weight;
    }
    let n = [w[0][0] + w[0][1], w[1][0] + w[1][1]];
    if n[0] <= 0.0 || n[1] <= 0.0 {
        return Err(Error::UndefinedDistinguishability(format!(
            "branch {branch_label} = {} never observed",
            if n[0] <= 0.0 { 0 } else { 1 }
        )));
    }
    let p0 = w[0][0] / n[0];
    let p1 = w[1][0] / n[1];
    // binary marker: ½(|Δp(0)| + |Δp(1)|) = |Δp(0)|
    let d = (p0 - p1).abs();
    let sem = if sampled {
        (p0 * (1.0 - p0) / n[0] + p1 * (1.0 - p1) / n[1]).sqrt()
    } else {
        0.0
    };
    Ok((d.min(1.0), sem))
}

/// Visibility–distinguishability pair against V² + D² ≤ 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplementarityRecord {
    pub v: f64,
    pub d: f64,
    pub sum_sq: f64,
    pub tol: f64,
    pub bound_ok: bool,
}

pub fn complementarity_check(v: f64, d: f64, tol: f64) -> ComplementarityRecord {
    let sum_sq = v * v + d * d;
    ComplementarityRecord {
        v,
        d,
        sum_sq,
        tol,
        bound_ok: sum_sq <= 1.0 + tol,
    }
}

/// ⟨XXX⟩ on the register from X-basis counts.
pub fn tag_observable_c3(counts: &impl OutcomeTable) -> Result<f64> {
    counts.parity_expectation(&REGISTER)
}

/// Analysis of one marker strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EraserRecord {
    pub lambda: f64,
    /// |cos(λ/2)|, the marker overlap.
    pub eta: f64,
    #[serde(rename = "V_uncond")]
    pub v_uncond: Option<f64>,
    #[serde(rename = "V_uncond_sem")]
    pub v_uncond_sem: Option<f64>,
    #[serde(rename = "V_cond_by_outcome")]
    pub v_cond_by_outcome: Option<ConditionalVisibility>,
    #[serde(rename = "V_local")]
    pub v_local: Option<f64>,
    #[serde(rename = "D")]
    pub d: Option<f64>,
    #[serde(rename = "D_sem")]
    pub d_sem: Option<f64>,
    #[serde(rename = "V2_plus_D2")]
    pub v2_plus_d2: Option<f64>,
    /// Propagated standard error of V² + D².
    pub sum_sq_sem: Option<f64>,
    pub bound_ok: Option<bool>,
    #[serde(rename = "C3")]
    pub c3: Option<f64>,
    /// ⟨XXX⟩ at φ = 0 on the ERASE_X branch, conditioned on m = 0 and m = 1;
    /// opposite signs mark the two conditioned fringes.
    pub erase_x_conditioned: Option<[Option<f64>; 2]>,
}

/// Per-λ eraser report over a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EraserReport {
    pub tol: f64,
    pub fringe_observable: String,
    pub local_reference: String,
    pub records: Vec<EraserRecord>,
    pub all_bounds_ok: bool,
}

/// Analyzes an executed sweep: visibilities from the MARK (unconditional),
/// ERASE (marker-conditioned) and LOCAL scans, D from WHICH_Z, C₃ from MARK
/// at the phase nearest 0, and the ERASE_X sign diagnostic.
pub fn analyze_eraser(run: &A62Run, tol: f64) -> Result<EraserReport> {
    let sampled = run.mode == crate::harness::RunMode::Sampled;
    // (branch, λ index) -> [(φ, table)]
    let mut groups: BTreeMap<(Branch, usize), Vec<(f64, &crate::harness::RunTable)>> =
        BTreeMap::new();
    for c in &run.circuits {
        groups
            .entry((c.branch, c.lambda_index))
            .or_default()
            .push((c.phi, &c.table));
    }
    let mut records = Vec::with_capacity(run.plan.lambda_values.len());
    for (li, &lambda) in run.plan.lambda_values.iter().enumerate() {
        let get = |b: Branch| groups.get(&(b, li));
        let mut rec = EraserRecord {
            lambda,
            eta: (lambda / 2.0).cos().abs(),
            v_uncond: None,
            v_uncond_sem: None,
            v_cond_by_outcome: None,
            v_local: None,
            d: None,
            d_sem: None,
            v2_plus_d2: None,
            sum_sq_sem: None,
            bound_ok: None,
            c3: None,
            erase_x_conditioned: None,
        };
        if let Some(tables) = get(Branch::Mark) {
            let fit = fit_fringe(&scan_from_tables(
                Branch::Mark,
                lambda,
                tables,
                None,
                sampled,
            )?)?;
            rec.v_uncond = Some(fit.visibility);
            rec.v_uncond_sem = Some(fit.visibility_sem);
            let nearest = tables
                .iter()
                .min_by(|a, b| {
                    let da = a.0.rem_euclid(A62Plan::FRINGE_PERIOD);
                    let db = b.0.rem_euclid(A62Plan::FRINGE_PERIOD);
                    let da = da.min(A62Plan::FRINGE_PERIOD - da);
                    let db = db.min(A62Plan::FRINGE_PERIOD - db);
                    da.total_cmp(&db)
                })
                .expect("nonempty group");
            if nearest
                .0
                .rem_euclid(A62Plan::FRINGE_PERIOD)
                .min(A62Plan::FRINGE_PERIOD - nearest.0.rem_euclid(A62Plan::FRINGE_PERIOD))
                < 1e-9
            {
                rec.c3 = Some(tag_observable_c3(nearest.1)?);
            }
        }
        if let Some(tables) = get(Branch::Erase) {
            let mut weights = [0.0; 2];
            let mut scans = Vec::with_capacity(2);
            for m in 0..2u8 {
                let mut frac = 0.0;
                for (_, t) in tables {
                    frac += conditional_parity(*t, &REGISTER, Some((MARKER, m)))?.2;
                }
                weights[usize::from(m)] = frac / tables.len() as f64;
                scans.push(scan_from_tables(
                    Branch::Erase,
                    lambda,
                    tables,
                    Some(m),
                    sampled,
                )?);
            }
            rec.v_cond_by_outcome = Some(conditional_visibility(
                [Some(&scans[0]), Some(&scans[1])],
                weights,
            )?);
        }
        if let Some(tables) = get(Branch::Local) {
            rec.v_local = Some(visibility_from_scan(&scan_from_tables(
                Branch::Local,
                lambda,
                tables,
                None,
                sampled,
            )?)?);
        }
        if let Some(tables) = get(Branch::WhichZ) {
            let (d, sem) = distinguishability_with_sem(tables[0].1, PATH_QUBIT, MARKER, sampled)?;
            rec.d = Some(d);
            rec.d_sem = Some(sem);
        }
        if let Some(tables) = get(Branch::EraseX) {
            let t = tables[0].1;
            rec.erase_x_conditioned = Some([
                conditional_parity(t, &REGISTER, Some((MARKER, 0)))?.0,
                conditional_parity(t, &REGISTER, Some((MARKER, 1)))?.0,
            ]);
        }
        if let (Some(v), Some(d)) = (rec.v_uncond, rec.d) {
            let c = complementarity_check(v, d, tol);
            rec.v2_plus_d2 = Some(c.sum_sq);
            rec.bound_ok = Some(c.bound_ok);
            let (sv, sd) = (rec.v_uncond_sem.unwrap_or(0.0), rec.d_sem.unwrap_or(0.0));
            rec.sum_sq_sem = Some(((2.0 * v * sv).powi(2) + (2.0 * d * sd).powi(2)).sqrt());
        }
        records.push(rec);
    }
    let all_bounds_ok = records.iter().all(|r| r.bound_ok != Some(false));
    Ok(EraserReport {
        tol,
        fringe_observable: "register parity <XXX>(phi), fitted as V cos(3 phi - phi0) + c".into(),
        local_reference:
            "LOCAL applies a stochastic Z on q1 matched to the marker-induced dephasing, \
                          a stronger null than an unmatched hardware reference"
                .into(),
        records,
        all_bounds_ok,
    })
}

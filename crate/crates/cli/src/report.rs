//! Analysis artifacts written next to a run's counts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ctxkernel::eraser::{analyze_eraser, EraserRecord, EraserReport};
use ctxkernel::harness::{Family, RunMode};
use ctxkernel::kernelfit::{DcVerdict, ScreenResult};
use ctxkernel::pipeline::{analyze_a6, records_for, A6Analysis};

use crate::error::CliError;
use crate::io::{write_file, write_json, LoadedRun};
use crate::plan::PlanDocument;
use crate::svg::{self, Panel, Series};

pub const ANALYSIS_FILE: &str = "analysis.json";
pub const KERNEL_FILE: &str = "kernel_report.json";
pub const ERASER_FILE: &str = "eraser_report.json";

/// Fit summary with short field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub a: f64,
    pub b: f64,
    pub r2: f64,
    pub chi2_red: f64,
}

/// Compact kernel summary of a parity-context run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSummary {
    pub gamma_loc: Option<f64>,
    pub gamma_proxy: Option<f64>,
    pub gamma_rel_by_class: BTreeMap<String, f64>,
    #[serde(rename = "D")]
    pub d: BTreeMap<String, f64>,
    pub fit: Option<FitSummary>,
    pub dc_verdict: Option<DcVerdict>,
    pub screens: Vec<ScreenResult>,
}

impl KernelSummary {
    pub fn from_analysis(a: &A6Analysis) -> Self {
        let kernel = a.kernel.as_ref();
        Self {
            gamma_loc: kernel.map(|k| k.estimate.gamma_loc),
            gamma_proxy: kernel.map(|k| k.estimate.gamma_proxy),
            gamma_rel_by_class: kernel
                .map(|k| k.gamma_rel_by_class.clone())
                .unwrap_or_default(),
            d: kernel
                .map(|k| k.suppression_by_class.clone())
                .unwrap_or_default(),
            fit: kernel.and_then(|k| k.fit.as_ref()).map(|f| FitSummary {
                a: f.a,
                b: f.b,
                r2: f.r_squared,
                chi2_red: f.reduced_chi_squared,
            }),
            dc_verdict: a.dc_verdict.clone(),
            screens: a
                .dc_verdict
                .as_ref()
                .map(|v| v.screens.clone())
                .unwrap_or_default(),
        }
    }
}

/// Files produced by [`write_reports`].
#[derive(Debug, Clone, Default)]
pub struct Written {
    pub files: Vec<PathBuf>,
}

impl Written {
    fn push(&mut self, path: PathBuf) {
        self.files.push(path);
    }
}

fn csv_text<R: Serialize>(rows: &[R]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(CliError::analysis)?;
    }
    let bytes = w.into_inner().map_err(CliError::analysis)?;
    Ok(String::from_utf8(bytes).expect("csv is utf8"))
}

fn read_back<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct WitnessCsvRow {
    family: Family,
    theta: Option<f64>,
    e_even: f64,
    e_odd: f64,
    delta_e: f64,
    sem: f64,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
}

#[derive(Serialize)]
struct InformationCsvRow<'a> {
    vars: &'a str,
    plugin_bits: f64,
    miller_madow_raw_bits: Option<f64>,
    miller_madow_bits: Option<f64>,
}

#[derive(Serialize)]
struct EraserCsvRow {
    lambda: f64,
    eta: f64,
    v_uncond: Option<f64>,
    v_cond: Option<f64>,
    v_local: Option<f64>,
    d: Option<f64>,
    v2_plus_d2: Option<f64>,
    bound_ok: Option<bool>,
    c3: Option<f64>,
}

/// Analyzes a loaded run and writes every artifact into `out`.
pub fn write_reports(
    plan: &PlanDocument,
    run: &LoadedRun,
    out: &Path,
) -> Result<Written, CliError> {
    let mut written = Written::default();
    match (plan, run) {
        (PlanDocument::A6(doc), LoadedRun::A6(run)) => {
            let analysis = analyze_a6(run, &doc.analysis).map_err(CliError::analysis)?;
            let path = out.join(ANALYSIS_FILE);
            write_json(&path, &analysis)?;
            written.push(path.clone());
            // everything below is rendered from the persisted analysis
            let analysis: A6Analysis = read_back(&path)?;

            let path = out.join(KERNEL_FILE);
            write_json(&path, &KernelSummary::from_analysis(&analysis))?;
            written.push(path);

            let rows: Vec<WitnessCsvRow> = analysis
                .witnesses
                .iter()
                .map(|w| WitnessCsvRow {
                    family: w.family,
                    theta: w.theta,
                    e_even: w.witness.e_even,
                    e_odd: w.witness.e_odd,
                    delta_e: w.witness.delta_e,
                    sem: w.witness.sem,
                    ci_low: w.witness.ci.map(|c| c[0]),
                    ci_high: w.witness.ci.map(|c| c[1]),
                })
                .collect();
            let path = out.join("witnesses.csv");
            write_file(&path, csv_text(&rows)?)?;
            written.push(path);

            let rows: Vec<InformationCsvRow> = analysis
                .information
                .iter()
                .map(|(k, v)| InformationCsvRow {
                    vars: k,
                    plugin_bits: v.plugin_bits,
                    miller_madow_raw_bits: v.miller_madow_raw_bits,
                    miller_madow_bits: v.miller_madow_bits,
                })
                .collect();
            let path = out.join("information.csv");
            write_file(&path, csv_text(&rows)?)?;
            written.push(path);

            if run.mode == RunMode::Sampled {
                if let Some(theta) = analysis.reference_theta {
                    let records = records_for(run, Family::Active, Some(theta))
                        .map_err(CliError::analysis)?;
                    let path = out.join("records_active_reference.csv");
                    write_file(&path, records.to_csv().map_err(CliError::analysis)?)?;
                    written.push(path);
                }
            }

            let path = out.join("delta_e.svg");
            write_file(&path, delta_e_figure(&analysis))?;
            written.push(path);
        }
        (PlanDocument::A62(doc), LoadedRun::A62(run)) => {
            let tol = doc.tol.unwrap_or(match run.mode {
                RunMode::Sampled => 0.02,
                RunMode::Exact => 1e-9,
            });
            let report = analyze_eraser(run, tol).map_err(CliError::analysis)?;
            let path = out.join(ANALYSIS_FILE);
            write_json(&path, &report)?;
            written.push(path);
            let path = out.join(ERASER_FILE);
            write_json(&path, &report)?;
            written.push(path.clone());
            let report: EraserReport = read_back(&path)?;

            let rows: Vec<EraserCsvRow> = report
                .records
                .iter()
                .map(|r| EraserCsvRow {
                    lambda: r.lambda,
                    eta: r.eta,
                    v_uncond: r.v_uncond,
                    v_cond: r.v_cond_by_outcome.as_ref().map(|c| c.weighted_mean),
                    v_local: r.v_local,
                    d: r.d,
                    v2_plus_d2: r.v2_plus_d2,
                    bound_ok: r.bound_ok,
                    c3: r.c3,
                })
                .collect();
            let path = out.join("eraser.csv");
            write_file(&path, csv_text(&rows)?)?;
            written.push(path);

            let path = out.join("eraser.svg");
            write_file(&path, eraser_figure(&report))?;
            written.push(path);
        }
        _ => {
            return Err(CliError::Analysis(
                "plan and run disagree on the experiment".into(),
            ))
        }
    }
    Ok(written)
}

fn smooth(x0: f64, x1: f64, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    (0..=100)
        .map(|i| x0 + (x1 - x0) * i as f64 / 100.0)
        .map(|x| (x, f(x)))
        .collect()
}

/// ΔE(θ) of every family with the fitted curve.
pub fn delta_e_figure(a: &A6Analysis) -> String {
    let active: Vec<_> = a
        .witnesses
        .iter()
        .filter(|w| w.family == Family::Active)
        .filter_map(|w| w.theta.map(|t| (t, w.witness.delta_e, Some(w.witness.sem))))
        .collect();
    let theta_max = active
        .iter()
        .map(|p| p.0)
        .fold(std::f64::consts::PI, f64::max);
    let mut series = vec![Series::markers("ACTIVE", active)];
    for w in a.witnesses.iter().filter(|w| w.family != Family::Active) {
        series.push(Series::dashed(
            &format!("{} (θ-independent)", w.family),
            vec![(0.0, w.witness.delta_e), (theta_max, w.witness.delta_e)],
        ));
    }
    if let Some(fit) = a.kernel.as_ref().and_then(|k| k.fit.as_ref()) {
        series.push(Series::line(
            &format!("fit a={:.4} b={:.4} R²={:.4}", fit.a, fit.b, fit.r_squared),
            smooth(0.0, theta_max, |t| fit.predict(t)),
        ));
    }
    let panel = Panel {
        title: "Parity-class witness contrast".into(),
        x_label: "θ (rad)".into(),
        y_label: "ΔE".into(),
        series,
    };
    svg::render(&[panel], 1)
}

type ValueWithError = (Option<f64>, Option<f64>);

/// Four panels: visibility, distinguishability, V² + D², eraser recovery.
pub fn eraser_figure(r: &EraserReport) -> String {
    let lambda_max = r
        .records
        .iter()
        .map(|x| x.lambda)
        .fold(0.0, f64::max)
        .max(1e-9);
    let pick = |f: &dyn Fn(&EraserRecord) -> ValueWithError| -> Vec<(f64, f64, Option<f64>)> {
        r.records
            .iter()
            .filter_map(|x| {
                let (v, e) = f(x);
                v.map(|v| (x.lambda, v, e))
            })
            .collect()
    };
    let panels = vec![
        Panel {
            title: "Unconditional visibility".into(),
            x_label: "λ (rad)".into(),
            y_label: "V".into(),
            series: vec![
                Series::markers("V (MARK)", pick(&|x| (x.v_uncond, x.v_uncond_sem))),
                Series::dashed(
                    "|cos(λ/2)|",
                    smooth(0.0, lambda_max, |l| (l / 2.0).cos().abs()),
                ),
            ],
        },
        Panel {
            title: "Which-path distinguishability".into(),
            x_label: "λ (rad)".into(),
            y_label: "D".into(),
            series: vec![
                Series::markers("D (WHICH_Z)", pick(&|x| (x.d, x.d_sem))),
                Series::dashed(
                    "|sin(λ/2)|",
                    smooth(0.0, lambda_max, |l| (l / 2.0).sin().abs()),
                ),
            ],
        },
        Panel {
            title: format!("Complementarity (tol {})", r.tol),
            x_label: "λ (rad)".into(),
            y_label: "V² + D²".into(),
            series: vec![
                Series::markers("V² + D²", pick(&|x| (x.v2_plus_d2, x.sum_sq_sem))),
                Series::dashed(
                    "bound 1 + tol",
                    vec![(0.0, 1.0 + r.tol), (lambda_max, 1.0 + r.tol)],
                ),
            ],
        },
        Panel {
            title: "Eraser recovery".into(),
            x_label: "λ (rad)".into(),
            y_label: "visibility".into(),
            series: vec![
                Series::markers(
                    "V conditioned on marker (ERASE)",
                    pick(&|x| (x.v_cond_by_outcome.as_ref().map(|c| c.weighted_mean), None)),
                ),
                Series::markers("V local dephasing (LOCAL)", pick(&|x| (x.v_local, None))),
            ],
        },
    ];
    svg::render(&panels, 2)
}

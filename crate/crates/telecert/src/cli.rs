//! Dataset emission for the figure-reproduction scans and the end-to-end
//! certification pipeline behind the `telecert` binary.
//!
//! Angles cross the CLI boundary in degrees and are converted to radians
//! here. CSV output uses a header row, '.' decimals and 17-significant-digit
//! floats so values round-trip losslessly; JSON output carries a
//! `schema_version` field.

use rayon::prelude::*;
use serde::Serialize;

use crate::benchmarks::{
    average_fidelity, classical_bound, gamma_entanglement_threshold, CorrectionScheme,
};
use crate::error::TelecertError;
use crate::fit::{fit_noise_params, model_w_min, FitInput, FitResult};
use crate::montecarlo::{
    estimate_fidelity, estimate_witness, records_to_csv, simulate_counts, CountRecord, ShotConfig,
};
use crate::noise_optics::{gamma_from_alpha, noisy_channel_state, NoiseParams};
use crate::states::input_states;
use crate::teleport::{assemblage, partial_bsm_three_outcome, partial_bsm_two_outcome, Assemblage};
use crate::witness::{
    evaluate_witness, minimize_witness_numeric, theta_min_noisy, witness_noisy_closed_form,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Output format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Parses a grid spec: either a comma list `0,0.5,1` or a linspace
/// `start:stop:count`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, TelecertError> {
    let bad = |msg: String| TelecertError::InvalidInput(msg);
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("grid '{spec}' must be start:stop:count")));
        }
        let start: f64 = parts[0]
            .parse()
            .map_err(|_| bad(format!("bad grid start '{}'", parts[0])))?;
        let stop: f64 = parts[1]
            .parse()
            .map_err(|_| bad(format!("bad grid stop '{}'", parts[1])))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| bad(format!("bad grid count '{}'", parts[2])))?;
        if count == 0 {
            return Err(bad("grid count must be positive".into()));
        }
        if count == 1 {
            vec![start]
        } else {
            (0..count)
                .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                .collect()
        }
    } else {
        spec.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("bad grid value '{s}'")))
            })
            .collect::<Result<Vec<f64>, _>>()?
    };
    if values.is_empty() {
        return Err(bad("empty grid".into()));
    }
    Ok(values)
}

fn fmt(x: f64) -> String {
    format!("{:.16e}", x)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessScanRow {
    pub gamma: f64,
    pub theta_rad: f64,
    pub w_exact: f64,
    pub w_noisy_model: f64,
    pub w_min_ideal: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_mc_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_mc_std: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessScanDataset {
    pub schema_version: u32,
    pub rows: Vec<WitnessScanRow>,
}

fn ideal_witness_assemblage(gamma: f64) -> Result<Assemblage, TelecertError> {
    let rho = crate::states::channel_state_ideal(gamma)?;
    assemblage(&rho, &input_states(), &partial_bsm_two_outcome())
}

fn noisy_witness_assemblage(gamma: f64, params: NoiseParams) -> Result<Assemblage, TelecertError> {
    let rho = noisy_channel_state(gamma, params)?;
    assemblage(&rho, &input_states(), &partial_bsm_two_outcome())
}

/// Witness scan over a (γ, θ) grid: exact pipeline value, noisy-model value
/// and optional Monte-Carlo estimates with error bars.
pub fn cmd_scan_witness(
    gamma_grid: &[f64],
    theta_grid: &[f64],
    params: NoiseParams,
    shots: Option<ShotConfig>,
) -> Result<WitnessScanDataset, TelecertError> {
    let rows: Vec<Vec<WitnessScanRow>> = gamma_grid
        .par_iter()
        .map(|&gamma| -> Result<Vec<WitnessScanRow>, TelecertError> {
            let ideal_asm = ideal_witness_assemblage(gamma)?;
            let w_min_ideal = minimize_witness_numeric(&ideal_asm)?.value;
            let mc = match &shots {
                Some(cfg) => {
                    let noisy_asm = noisy_witness_assemblage(gamma, params)?;
                    Some((simulate_counts(&noisy_asm, cfg), *cfg))
                }
                None => None,
            };
            theta_grid
                .iter()
                .map(|&theta| -> Result<WitnessScanRow, TelecertError> {
                    let w_exact = evaluate_witness(&ideal_asm, theta)?.value;
                    let w_noisy_model = witness_noisy_closed_form(gamma, theta, params);
                    let (w_mc_estimate, w_mc_std) = match &mc {
                        Some((records, cfg)) => {
                            let (v, s) = estimate_witness(records, theta, cfg)?;
                            (Some(v), Some(s))
                        }
                        None => (None, None),
                    };
                    Ok(WitnessScanRow {
                        gamma,
                        theta_rad: theta,
                        w_exact,
                        w_noisy_model,
                        w_min_ideal,
                        w_mc_estimate,
                        w_mc_std,
                    })
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    Ok(WitnessScanDataset {
        schema_version: SCHEMA_VERSION,
        rows: rows.into_iter().flatten().collect(),
    })
}

pub fn witness_scan_to_csv(ds: &WitnessScanDataset) -> String {
    let mut out =
        String::from("gamma,theta_rad,w_exact,w_noisy_model,w_min_ideal,w_mc_estimate,w_mc_std\n");
    for r in &ds.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt(r.gamma),
            fmt(r.theta_rad),
            fmt(r.w_exact),
            fmt(r.w_noisy_model),
            fmt(r.w_min_ideal),
            fmt_opt(r.w_mc_estimate),
            fmt_opt(r.w_mc_std)
        ));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct MinScanRow {
    pub gamma: f64,
    pub w_min_model: f64,
    pub theta_min_rad: f64,
    pub gamma_ent_threshold: f64,
    pub nonclassical: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinScanDataset {
    pub schema_version: u32,
    /// Witness values below this certify nonclassical teleportation.
    pub nonclassical_threshold: f64,
    pub rows: Vec<MinScanRow>,
}

/// θ-optimized witness per γ with the entanglement threshold of the noisy
/// family.
pub fn cmd_scan_min(
    gamma_grid: &[f64],
    params: NoiseParams,
) -> Result<MinScanDataset, TelecertError> {
    let gamma_ent = gamma_entanglement_threshold(params)?.as_f64();
    let rows: Vec<MinScanRow> = gamma_grid
        .par_iter()
        .map(|&gamma| -> Result<MinScanRow, TelecertError> {
            let theta_min = if gamma >= 1.0 {
                std::f64::consts::FRAC_PI_2
            } else {
                theta_min_noisy(gamma, params)?
            };
            let w_min_model = model_w_min(gamma, params.v, params.delta);
            Ok(MinScanRow {
                gamma,
                w_min_model,
                theta_min_rad: theta_min,
                gamma_ent_threshold: gamma_ent,
                nonclassical: w_min_model < -crate::witness::NONCLASSICAL_TOL,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(MinScanDataset {
        schema_version: SCHEMA_VERSION,
        nonclassical_threshold: 0.0,
        rows,
    })
}

pub fn min_scan_to_csv(ds: &MinScanDataset) -> String {
    let mut out = String::from("gamma,w_min_model,theta_min_rad,gamma_ent_threshold,nonclassical\n");
    for r in &ds.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt(r.gamma),
            fmt(r.w_min_model),
            fmt(r.theta_min_rad),
            fmt(r.gamma_ent_threshold),
            r.nonclassical
        ));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct FidelityScanRow {
    pub gamma: f64,
    pub f_model: f64,
    pub f_model_raw: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_mc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_mc_std: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FidelityScanDataset {
    pub schema_version: u32,
    pub classical_bound: f64,
    pub rows: Vec<FidelityScanRow>,
}

/// Average-fidelity scan for the noisy family under the standard ψ±
/// corrections, detection-normalized, with optional Monte-Carlo columns.
pub fn cmd_scan_fidelity(
    gamma_grid: &[f64],
    params: NoiseParams,
    shots: Option<ShotConfig>,
) -> Result<FidelityScanDataset, TelecertError> {
    let corrections = CorrectionScheme::standard();
    let ens = input_states();
    let rows: Vec<FidelityScanRow> = gamma_grid
        .par_iter()
        .map(|&gamma| -> Result<FidelityScanRow, TelecertError> {
            let rho = noisy_channel_state(gamma, params)?;
            let asm = assemblage(&rho, &ens, &partial_bsm_three_outcome())?;
            let report = average_fidelity(&asm, &ens, &corrections)?;
            let (f_mc, f_mc_std) = match &shots {
                Some(cfg) => {
                    let records = simulate_counts(&asm, cfg);
                    let (v, s) = estimate_fidelity(&records, &corrections, cfg)?;
                    (Some(v), Some(s))
                }
                None => (None, None),
            };
            Ok(FidelityScanRow {
                gamma,
                f_model: report.normalized,
                f_model_raw: report.raw,
                f_mc,
                f_mc_std,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(FidelityScanDataset {
        schema_version: SCHEMA_VERSION,
        classical_bound: classical_bound(),
        rows,
    })
}

pub fn fidelity_scan_to_csv(ds: &FidelityScanDataset) -> String {
    let mut out = String::from("gamma,f_model,f_model_raw,f_mc,f_mc_std\n");
    for r in &ds.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt(r.gamma),
            fmt(r.f_model),
            fmt(r.f_model_raw),
            fmt_opt(r.f_mc),
            fmt_opt(r.f_mc_std)
        ));
    }
    out
}

/// Fits noise parameters from `gamma,w_min[,sigma]` CSV text.
pub fn cmd_fit(csv_text: &str, seed: u64) -> Result<FitResult, TelecertError> {
    let data = FitInput::from_csv(csv_text)?;
    fit_noise_params(&data, seed)
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResultDocument {
    pub schema_version: u32,
    #[serde(flatten)]
    pub result: FitResult,
}

/// Simulates coincidence counts for one γ (possibly given through α) of
/// the noisy family.
pub fn cmd_simulate(
    gamma: f64,
    params: NoiseParams,
    cfg: &ShotConfig,
    three_outcome: bool,
) -> Result<Vec<CountRecord>, TelecertError> {
    let rho = noisy_channel_state(gamma, params)?;
    let m = if three_outcome {
        partial_bsm_three_outcome()
    } else {
        partial_bsm_two_outcome()
    };
    let asm = assemblage(&rho, &input_states(), &m)?;
    Ok(simulate_counts(&asm, cfg))
}

#[derive(Debug, Clone, Serialize)]
pub struct EntThresholdDocument {
    pub schema_version: u32,
    pub v: f64,
    pub delta: f64,
    pub gamma_ent_threshold: f64,
    pub always_entangled: bool,
    pub never_entangled: bool,
}

/// Entanglement threshold of the noisy family for one (V, δ).
pub fn cmd_ent_threshold(params: NoiseParams) -> Result<EntThresholdDocument, TelecertError> {
    use crate::benchmarks::GammaThreshold;
    let t = gamma_entanglement_threshold(params)?;
    Ok(EntThresholdDocument {
        schema_version: SCHEMA_VERSION,
        v: params.v,
        delta: params.delta,
        gamma_ent_threshold: t.as_f64(),
        always_entangled: t == GammaThreshold::AlwaysEntangled,
        never_entangled: t == GammaThreshold::NeverEntangled,
    })
}

/// Converts a CLI angle in degrees to radians.
pub fn degrees_to_radians(deg: f64) -> f64 {
    deg * std::f64::consts::PI / 180.0
}

/// Resolves the γ for single-state commands: an explicit α (degrees) wins
/// over a γ grid, which must then hold exactly one value.
pub fn resolve_single_gamma(
    gamma_grid: Option<&[f64]>,
    alpha_deg: Option<f64>,
) -> Result<f64, TelecertError> {
    match (alpha_deg, gamma_grid) {
        (Some(deg), _) => gamma_from_alpha(degrees_to_radians(deg)),
        (None, Some([gamma])) => Ok(*gamma),
        (None, Some(grid)) => Err(TelecertError::InvalidInput(format!(
            "this command needs a single gamma, got a {}-point grid",
            grid.len()
        ))),
        (None, None) => Err(TelecertError::InvalidInput(
            "provide --gamma-grid with one value or --alpha-deg".into(),
        )),
    }
}

pub fn records_csv(records: &[CountRecord]) -> String {
    records_to_csv(records)
}

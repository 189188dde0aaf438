//! Finite-statistics simulation of coincidence counting: per-setting totals
//! are Poissonian, distributed multinomially over (BSM outcome, Bob ±1)
//! categories, with witness/fidelity estimators and parametric-bootstrap
//! error bars.
//!
//! Bob measures σ_i whenever the input was a σ_i eigenvector, so each of
//! the six inputs defines exactly one measurement setting.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};

use crate::benchmarks::CorrectionScheme;
use crate::error::TelecertError;
use crate::linalg::ComplexMatrix;
use crate::states::{input_states, pauli, InputLabel, PauliAxis};
use crate::teleport::{Assemblage, OutcomeLabel};
use crate::witness::witness_operators;

/// Shot budget and reproducibility knobs for one simulation.
#[derive(Debug, Clone, Copy)]
pub struct ShotConfig {
    /// Mean coincidence count per (input, basis) setting.
    pub shots_per_setting: u64,
    pub seed: u64,
    /// Parametric-bootstrap repetitions for error bars.
    pub replicas: usize,
}

impl ShotConfig {
    pub fn new(shots_per_setting: u64, seed: u64, replicas: usize) -> Result<Self, TelecertError> {
        if shots_per_setting == 0 || replicas == 0 {
            return Err(TelecertError::InvalidInput(
                "shots and replicas must be at least 1".into(),
            ));
        }
        Ok(Self {
            shots_per_setting,
            seed,
            replicas,
        })
    }
}

/// One counted coincidence bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountRecord {
    pub input: InputLabel,
    pub outcome: OutcomeLabel,
    pub basis: PauliAxis,
    /// Bob's ±1 measurement result.
    pub result: i8,
    pub count: u64,
}

/// splitmix64-style index mixing; sub-seeds depend only on (seed, indices),
/// never on draw order, so settings and replicas can run in parallel.
fn subseed(seed: u64, setting: u64, replica: u64) -> u64 {
    let mut z = seed
        .wrapping_add(setting.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(replica.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn basis_projector(axis: PauliAxis, sign: i8) -> ComplexMatrix {
    let s = Complex64::new(0.5 * sign as f64, 0.0);
    ComplexMatrix::identity(2)
        .scale(Complex64::new(0.5, 0.0))
        .add(&pauli(axis).scale(s))
}

/// Exact probabilities p(a, ±|x) = tr[Π± σ_{a|x}] for one input setting.
fn setting_probabilities(asm: &Assemblage, input: InputLabel) -> Vec<(OutcomeLabel, i8, f64)> {
    let axis = input.axis();
    let mut probs = Vec::new();
    for outcome in asm.outcomes() {
        let member = asm.get(*outcome, input).expect("assemblage is complete");
        for sign in [1i8, -1i8] {
            let p = basis_projector(axis, sign)
                .matmul(&member.unnormalized)
                .trace()
                .re
                .max(0.0);
            probs.push((*outcome, sign, p));
        }
    }
    probs
}

fn draw_poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u64
}

/// Splits `total` into category counts by sequential binomial conditioning.
fn draw_multinomial(rng: &mut ChaCha8Rng, total: u64, probs: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = total;
    let mut mass: f64 = probs.iter().sum();
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i == probs.len() - 1 || mass <= p {
            counts[i] = remaining;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let c = Binomial::new(remaining, q).expect("valid ratio").sample(rng);
        counts[i] = c;
        remaining -= c;
        mass -= p;
    }
    counts
}

/// Simulates coincidence counts for every (input, basis) setting:
/// Poissonian total with mean `shots_per_setting`, multinomially split over
/// (outcome, ±1) with the exact assemblage probabilities. Deterministic
/// given the seed.
pub fn simulate_counts(asm: &Assemblage, cfg: &ShotConfig) -> Vec<CountRecord> {
    let mut records = Vec::new();
    for (setting_idx, input) in InputLabel::ALL.into_iter().enumerate() {
        let probs = setting_probabilities(asm, input);
        let mut rng = ChaCha8Rng::seed_from_u64(subseed(cfg.seed, setting_idx as u64, 0));
        let total = draw_poisson(&mut rng, cfg.shots_per_setting as f64);
        let raw: Vec<f64> = probs.iter().map(|&(_, _, p)| p).collect();
        let counts = draw_multinomial(&mut rng, total, &raw);
        for ((outcome, sign, _), count) in probs.into_iter().zip(counts) {
            records.push(CountRecord {
                input,
                outcome,
                basis: input.axis(),
                result: sign,
                count,
            });
        }
    }
    records
}

/// Per-input frequency table extracted from count records.
struct SettingCounts {
    /// (outcome, sign) -> count, plus the setting total.
    bins: Vec<(OutcomeLabel, i8, u64)>,
    total: u64,
}

fn group_by_input(records: &[CountRecord]) -> Result<Vec<(InputLabel, SettingCounts)>, TelecertError> {
    let mut grouped = Vec::new();
    for input in InputLabel::ALL {
        let bins: Vec<(OutcomeLabel, i8, u64)> = records
            .iter()
            .filter(|r| r.input == input)
            .map(|r| (r.outcome, r.result, r.count))
            .collect();
        if bins.is_empty() {
            return Err(TelecertError::MissingSetting(input.name().into()));
        }
        let total = bins.iter().map(|b| b.2).sum();
        grouped.push((input, SettingCounts { bins, total }));
    }
    Ok(grouped)
}

/// Decomposes a Hermitian 2x2 operator as f0·𝟙 + f1·σ_axis; errors if a
/// component outside that span remains (it would be unobservable in the
/// recorded basis).
fn span_coefficients(op: &ComplexMatrix, axis: PauliAxis) -> Result<(f64, f64), TelecertError> {
    let f0 = op.trace().re / 2.0;
    let sigma = pauli(axis);
    let f1 = op.matmul(&sigma).trace().re / 2.0;
    let reconstructed = ComplexMatrix::identity(2)
        .scale(Complex64::new(f0, 0.0))
        .add(&sigma.scale(Complex64::new(f1, 0.0)));
    if reconstructed.max_abs_diff(op) > 1e-10 {
        return Err(TelecertError::InvalidInput(
            "operator not measurable in the recorded basis".into(),
        ));
    }
    Ok((f0, f1))
}

fn witness_from_grouped(
    grouped: &[(InputLabel, SettingCounts)],
    theta: f64,
) -> Result<f64, TelecertError> {
    let family = witness_operators(theta)?;
    let mut value = 0.0;
    for (input, counts) in grouped {
        if counts.total == 0 {
            continue;
        }
        let f = family.singlet_operator(*input);
        let (f0, f1) = span_coefficients(f, input.axis())?;
        let total = counts.total as f64;
        for &(outcome, sign, count) in &counts.bins {
            if outcome != OutcomeLabel::PsiMinus {
                continue; // a != 0 operators vanish
            }
            let freq = count as f64 / total;
            value += (f0 + f1 * sign as f64) * freq;
        }
    }
    Ok(value)
}

fn resample(grouped: &[(InputLabel, SettingCounts)], rng: &mut ChaCha8Rng) -> Vec<(InputLabel, SettingCounts)> {
    grouped
        .iter()
        .map(|(input, counts)| {
            let bins: Vec<(OutcomeLabel, i8, u64)> = counts
                .bins
                .iter()
                .map(|&(o, s, c)| (o, s, draw_poisson(rng, c as f64)))
                .collect();
            let total = bins.iter().map(|b| b.2).sum();
            (*input, SettingCounts { bins, total })
        })
        .collect()
}

fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Plug-in frequency estimate of W(θ) with a parametric-bootstrap standard
/// deviation (Poisson resampling of every count bin).
pub fn estimate_witness(
    records: &[CountRecord],
    theta: f64,
    cfg: &ShotConfig,
) -> Result<(f64, f64), TelecertError> {
    let grouped = group_by_input(records)?;
    let value = witness_from_grouped(&grouped, theta)?;
    let replica_values: Vec<f64> = (0..cfg.replicas)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(subseed(cfg.seed, u64::MAX, r as u64 + 1));
            witness_from_grouped(&resample(&grouped, &mut rng), theta)
        })
        .collect::<Result<_, _>>()?;
    Ok((value, sample_std(&replica_values)))
}

fn fidelity_from_grouped(
    grouped: &[(InputLabel, SettingCounts)],
    corrections: &CorrectionScheme,
) -> Result<f64, TelecertError> {
    let ens = input_states();
    let mut fid_sum = 0.0;
    let mut prob_sum = 0.0;
    for (input, counts) in grouped {
        if counts.total == 0 {
            continue;
        }
        let total = counts.total as f64;
        let psi = ens.get(*input);
        for outcome in corrections.outcomes() {
            let u = corrections
                .get(outcome)
                .ok_or_else(|| TelecertError::MissingCorrection(outcome.name().into()))?;
            let target = psi.projector().conjugate_by(&u.conjugate_transpose());
            let (g0, g1) = span_coefficients(&target, input.axis())?;
            for &(rec_outcome, sign, count) in &counts.bins {
                if rec_outcome != outcome {
                    continue;
                }
                let freq = count as f64 / total;
                prob_sum += freq;
                fid_sum += (g0 + g1 * sign as f64) * freq;
            }
        }
    }
    if prob_sum <= 0.0 {
        return Ok(0.0);
    }
    Ok(fid_sum / prob_sum)
}

/// Detection-normalized average-fidelity estimate with bootstrap error bar.
pub fn estimate_fidelity(
    records: &[CountRecord],
    corrections: &CorrectionScheme,
    cfg: &ShotConfig,
) -> Result<(f64, f64), TelecertError> {
    let grouped = group_by_input(records)?;
    let value = fidelity_from_grouped(&grouped, corrections)?;
    let replica_values: Vec<f64> = (0..cfg.replicas)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(subseed(cfg.seed, u64::MAX - 1, r as u64 + 1));
            fidelity_from_grouped(&resample(&grouped, &mut rng), corrections)
        })
        .collect::<Result<_, _>>()?;
    Ok((value, sample_std(&replica_values)))
}

/// Writes records as CSV with header `input,bsm_outcome,basis,result,count`.
pub fn records_to_csv(records: &[CountRecord]) -> String {
    let mut out = String::from("input,bsm_outcome,basis,result,count\n");
    for r in records {
        let basis = match r.basis {
            PauliAxis::X => "x",
            PauliAxis::Y => "y",
            PauliAxis::Z => "z",
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.input.name(),
            r.outcome.name(),
            basis,
            r.result,
            r.count
        ));
    }
    out
}

/// Parses the CSV format produced by [`records_to_csv`].
pub fn records_from_csv(text: &str) -> Result<Vec<CountRecord>, TelecertError> {
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(TelecertError::InvalidInput(format!(
                "line {}: expected 5 columns",
                lineno + 1
            )));
        }
        let input = InputLabel::from_name(parts[0])
            .ok_or_else(|| TelecertError::InvalidInput(format!("bad input label {}", parts[0])))?;
        let outcome = OutcomeLabel::from_name(parts[1])
            .ok_or_else(|| TelecertError::InvalidInput(format!("bad outcome {}", parts[1])))?;
        let basis = match parts[2] {
            "x" => PauliAxis::X,
            "y" => PauliAxis::Y,
            "z" => PauliAxis::Z,
            other => {
                return Err(TelecertError::InvalidInput(format!("bad basis {}", other)));
            }
        };
        let result: i8 = parts[3]
            .parse()
            .map_err(|_| TelecertError::InvalidInput(format!("bad result {}", parts[3])))?;
        let count: u64 = parts[4]
            .parse()
            .map_err(|_| TelecertError::InvalidInput(format!("bad count {}", parts[4])))?;
        records.push(CountRecord {
            input,
            outcome,
            basis,
            result,
            count,
        });
    }
    Ok(records)
}

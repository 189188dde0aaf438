//! Noise-parameter recovery: nonlinear least squares of witness-minimum
//! data against the noisy closed form W(γ, θ_min(γ,V,δ), V, δ) over
//! (V, δ) ∈ [0,1]², by Nelder-Mead with grid restarts and parametric
//! bootstrap uncertainties.
//!
//! The model depends on δ only through (1-2δ)², so (V, δ) and (V, 1-δ)
//! are equivalent optima; results are canonicalized to δ ≥ 1/2 and the
//! mirror solution is reported alongside.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::TelecertError;
use crate::noise_optics::NoiseParams;
use crate::witness::{theta_min_noisy, witness_noisy_closed_form};

const SIMPLEX_DIAMETER_TOL: f64 = 1e-10;
const MAX_ITERS: usize = 4000;
/// Restarts launched from the best coarse-grid points.
const RESTARTS: usize = 5;
const BOOTSTRAP_REPLICAS: usize = 200;
/// |δ - 1/2| below which δ is weakly identified (the sinθ term vanishes).
const DELTA_DEGENERACY_BAND: f64 = 0.05;

/// One observed witness minimum.
#[derive(Debug, Clone, Copy)]
pub struct FitPoint {
    pub gamma: f64,
    pub w_min: f64,
    pub sigma: Option<f64>,
}

/// Validated fit dataset.
#[derive(Debug, Clone)]
pub struct FitInput {
    points: Vec<FitPoint>,
}

impl FitInput {
    pub fn new(points: Vec<FitPoint>) -> Result<Self, TelecertError> {
        if points.len() < 2 {
            return Err(TelecertError::InvalidInput(
                "fit needs at least 2 points".into(),
            ));
        }
        for p in &points {
            if !(0.0..=1.0).contains(&p.gamma) || !p.w_min.is_finite() {
                return Err(TelecertError::InvalidInput(format!(
                    "bad fit point (gamma={}, w_min={})",
                    p.gamma, p.w_min
                )));
            }
            if let Some(s) = p.sigma {
                if s.is_nan() || s <= 0.0 {
                    return Err(TelecertError::InvalidInput(format!(
                        "sigma must be positive, got {s}"
                    )));
                }
            }
        }
        for (i, a) in points.iter().enumerate() {
            if points[i + 1..].iter().any(|b| b.gamma == a.gamma) {
                return Err(TelecertError::InvalidInput(format!(
                    "duplicate gamma value {}",
                    a.gamma
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[FitPoint] {
        &self.points
    }

    /// Parses CSV rows `gamma,w_min[,sigma]`, header optional.
    pub fn from_csv(text: &str) -> Result<Self, TelecertError> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            if lineno == 0 && parts[0].parse::<f64>().is_err() {
                continue; // header row
            }
            if parts.len() < 2 || parts.len() > 3 {
                return Err(TelecertError::InvalidInput(format!(
                    "line {}: expected gamma,w_min[,sigma]",
                    lineno + 1
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| TelecertError::InvalidInput(format!("bad number '{s}'")))
            };
            points.push(FitPoint {
                gamma: parse(parts[0])?,
                w_min: parse(parts[1])?,
                sigma: if parts.len() == 3 {
                    Some(parse(parts[2])?)
                } else {
                    None
                },
            });
        }
        Self::new(points)
    }
}

/// Recovered noise parameters with bootstrap uncertainties.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    /// Singlet weight V.
    pub v_hat: f64,
    /// Dephasing parameter, canonicalized to δ ≥ 1/2.
    pub delta_hat: f64,
    pub sigma_v: f64,
    pub sigma_delta: f64,
    /// Amplitude interpretation √V, with its propagated uncertainty.
    pub v_amplitude_hat: f64,
    pub sigma_v_amplitude: f64,
    /// The mirror optimum 1 - δ (the model cannot tell them apart).
    pub delta_mirror: f64,
    pub residual_sum_of_squares: f64,
    pub converged: bool,
    /// Ratio of Hessian eigenvalues at the optimum; large values mean a
    /// badly conditioned (nearly degenerate) fit.
    pub hessian_condition: f64,
    /// δ within 0.05 of 1/2, where the coherence term vanishes and δ is
    /// weakly identified.
    pub delta_weakly_identified: bool,
}

/// Model value at one data point: W_noisy evaluated at its minimizing θ.
pub fn model_w_min(gamma: f64, v: f64, delta: f64) -> f64 {
    let params = NoiseParams {
        v: v.clamp(0.0, 1.0),
        delta: delta.clamp(0.0, 1.0),
    };
    let theta = if gamma >= 1.0 {
        std::f64::consts::FRAC_PI_2
    } else {
        theta_min_noisy(gamma, params).expect("gamma < 1 checked")
    };
    // the witness family lives on theta in (0, pi/2]; the closed form's
    // minimizer can sit at the theta -> 0 boundary, where W -> 1+V-2gV-(1-g)(1+V)
    witness_noisy_closed_form(gamma, theta.max(0.0), params)
}

fn objective(data: &FitInput, v: f64, delta: f64) -> f64 {
    data.points()
        .iter()
        .map(|p| {
            let w = p.sigma.map_or(1.0, |s| 1.0 / (s * s));
            let r = p.w_min - model_w_min(p.gamma, v, delta);
            w * r * r
        })
        .sum()
}

fn clamp_unit(p: [f64; 2]) -> [f64; 2] {
    [p[0].clamp(0.0, 1.0), p[1].clamp(0.0, 1.0)]
}

/// 2D Nelder-Mead on the unit square. Returns (point, value, converged).
fn nelder_mead(
    f: &dyn Fn([f64; 2]) -> f64,
    start: [f64; 2],
    scale: f64,
) -> ([f64; 2], f64, bool) {
    let mut simplex: Vec<[f64; 2]> = vec![
        clamp_unit(start),
        clamp_unit([start[0] + scale, start[1]]),
        clamp_unit([start[0], start[1] + scale]),
    ];
    // degenerate starting simplex near a corner: push inward
    if (simplex[0][0] - simplex[1][0]).abs() < 1e-6 {
        simplex[1] = clamp_unit([start[0] - scale, start[1]]);
    }
    if (simplex[0][1] - simplex[2][1]).abs() < 1e-6 {
        simplex[2] = clamp_unit([start[0], start[1] - scale]);
    }
    let mut values: Vec<f64> = simplex.iter().map(|&p| f(p)).collect();
    let mut converged = false;
    for _ in 0..MAX_ITERS {
        // order best -> worst
        let mut idx = [0, 1, 2];
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let (b, m, w) = (idx[0], idx[1], idx[2]);

        let diameter = (0..2)
            .map(|d| {
                let lo = simplex.iter().map(|p| p[d]).fold(f64::INFINITY, f64::min);
                let hi = simplex.iter().map(|p| p[d]).fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            })
            .fold(0.0, f64::max);
        if diameter < SIMPLEX_DIAMETER_TOL {
            converged = true;
            break;
        }

        let centroid = [
            0.5 * (simplex[b][0] + simplex[m][0]),
            0.5 * (simplex[b][1] + simplex[m][1]),
        ];
        let reflect = clamp_unit([
            centroid[0] + (centroid[0] - simplex[w][0]),
            centroid[1] + (centroid[1] - simplex[w][1]),
        ]);
        let fr = f(reflect);
        if fr < values[b] {
            let expand = clamp_unit([
                centroid[0] + 2.0 * (centroid[0] - simplex[w][0]),
                centroid[1] + 2.0 * (centroid[1] - simplex[w][1]),
            ]);
            let fe = f(expand);
            if fe < fr {
                simplex[w] = expand;
                values[w] = fe;
            } else {
                simplex[w] = reflect;
                values[w] = fr;
            }
        } else if fr < values[m] {
            simplex[w] = reflect;
            values[w] = fr;
        } else {
            let contract = clamp_unit([
                centroid[0] + 0.5 * (simplex[w][0] - centroid[0]),
                centroid[1] + 0.5 * (simplex[w][1] - centroid[1]),
            ]);
            let fc = f(contract);
            if fc < values[w] {
                simplex[w] = contract;
                values[w] = fc;
            } else {
                // shrink toward the best vertex
                for i in 0..3 {
                    if i != b {
                        simplex[i] = clamp_unit([
                            simplex[b][0] + 0.5 * (simplex[i][0] - simplex[b][0]),
                            simplex[b][1] + 0.5 * (simplex[i][1] - simplex[b][1]),
                        ]);
                        values[i] = f(simplex[i]);
                    }
                }
            }
        }
    }
    let best = (0..3)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap())
        .unwrap();
    (simplex[best], values[best], converged)
}

/// Minimizes the weighted objective with Nelder-Mead launched from the best
/// points of a coarse 5x5 grid.
fn fit_point_estimate(data: &FitInput) -> Result<([f64; 2], f64, bool), TelecertError> {
    let f = |p: [f64; 2]| objective(data, p[0], p[1]);
    let grid: Vec<f64> = (0..5).map(|i| 0.1 + 0.2 * i as f64).collect();
    let mut starts: Vec<([f64; 2], f64)> = grid
        .iter()
        .flat_map(|&v| grid.iter().map(move |&d| [v, d]))
        .map(|p| (p, f(p)))
        .collect();
    starts.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let worst_grid_start = starts.last().unwrap().1;

    let mut best: Option<([f64; 2], f64)> = None;
    let mut any_converged = false;
    for (start, _) in starts.iter().take(RESTARTS) {
        let (p, val, conv) = nelder_mead(&f, *start, 0.15);
        any_converged |= conv;
        if best.is_none_or(|(_, bv)| val < bv) {
            best = Some((p, val));
        }
    }
    let (p, val) = best.expect("restarts > 0");
    if !any_converged {
        return Err(TelecertError::FitDidNotConverge {
            restarts: RESTARTS,
            objective: val,
        });
    }
    debug_assert!(val <= worst_grid_start + 1e-12);
    Ok((p, val, any_converged))
}

fn canonical_delta(delta: f64) -> f64 {
    if delta < 0.5 {
        1.0 - delta
    } else {
        delta
    }
}

/// Finite-difference Hessian condition number of the objective at the fit.
fn hessian_condition(data: &FitInput, p: [f64; 2]) -> f64 {
    let f = |q: [f64; 2]| objective(data, q[0].clamp(0.0, 1.0), q[1].clamp(0.0, 1.0));
    let h = 1e-4;
    let fxx = (f([p[0] + h, p[1]]) - 2.0 * f(p) + f([p[0] - h, p[1]])) / (h * h);
    let fyy = (f([p[0], p[1] + h]) - 2.0 * f(p) + f([p[0], p[1] - h])) / (h * h);
    let fxy = (f([p[0] + h, p[1] + h]) - f([p[0] + h, p[1] - h]) - f([p[0] - h, p[1] + h])
        + f([p[0] - h, p[1] - h]))
        / (4.0 * h * h);
    // eigenvalues of [[fxx, fxy], [fxy, fyy]]
    let mean = 0.5 * (fxx + fyy);
    let disc = (0.25 * (fxx - fyy).powi(2) + fxy * fxy).sqrt();
    let (l1, l2) = (mean + disc, mean - disc);
    if l2.abs() < 1e-300 {
        f64::INFINITY
    } else {
        (l1 / l2).abs()
    }
}

/// Fits (V, δ), reporting canonicalized estimates, bootstrap uncertainties
/// (Gaussian perturbation with the per-point σ, or the residual-based σ
/// when absent) and diagnostics. Deterministic under `seed`.
pub fn fit_noise_params(data: &FitInput, seed: u64) -> Result<FitResult, TelecertError> {
    let (p, rss, converged) = fit_point_estimate(data)?;
    let v_hat = p[0];
    let delta_raw = p[1];
    let delta_hat = canonical_delta(delta_raw);

    let n = data.points().len();
    let residual_sigma = if n > 2 {
        (rss / (n - 2) as f64).sqrt()
    } else {
        rss.sqrt()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v_reps = Vec::with_capacity(BOOTSTRAP_REPLICAS);
    let mut d_reps = Vec::with_capacity(BOOTSTRAP_REPLICAS);
    for _ in 0..BOOTSTRAP_REPLICAS {
        let points: Vec<FitPoint> = data
            .points()
            .iter()
            .map(|pt| {
                let s = pt.sigma.unwrap_or(residual_sigma).max(1e-12);
                let noise = Normal::new(0.0, s).expect("positive sigma").sample(&mut rng);
                FitPoint {
                    gamma: pt.gamma,
                    w_min: model_w_min(pt.gamma, v_hat, delta_raw) + noise,
                    sigma: pt.sigma,
                }
            })
            .collect();
        let replica = FitInput::new(points).expect("same gammas as input");
        // a single warm start is enough for replicas; skip on rare failures
        let f = |q: [f64; 2]| objective(&replica, q[0], q[1]);
        let (rp, _, _) = nelder_mead(&f, p, 0.05);
        v_reps.push(rp[0]);
        d_reps.push(canonical_delta(rp[1]));
    }
    let std_of = |xs: &[f64]| {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
    };
    let sigma_v = std_of(&v_reps);
    let sigma_delta = std_of(&d_reps);
    let v_amplitude_hat = v_hat.sqrt();
    // first-order propagation d(sqrt(V))/dV = 1/(2 sqrt(V))
    let sigma_v_amplitude = if v_hat > 1e-12 {
        sigma_v / (2.0 * v_hat.sqrt())
    } else {
        sigma_v.sqrt()
    };

    Ok(FitResult {
        v_hat,
        delta_hat,
        sigma_v,
        sigma_delta,
        v_amplitude_hat,
        sigma_v_amplitude,
        delta_mirror: 1.0 - delta_hat,
        residual_sum_of_squares: rss,
        converged,
        hessian_condition: hessian_condition(data, p),
        delta_weakly_identified: (delta_hat - 0.5).abs() < DELTA_DEGENERACY_BAND,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{estimate_witness, simulate_counts, ShotConfig};
    use crate::noise_optics::noisy_channel_state;
    use crate::states::input_states;
    use crate::teleport::{assemblage, partial_bsm_two_outcome};
    use crate::witness::minimize_witness_numeric;

    fn synthetic_noiseless(v: f64, delta: f64, n: usize) -> FitInput {
        let points: Vec<FitPoint> = (0..n)
            .map(|i| {
                let gamma = i as f64 / n as f64; // stay below gamma = 1
                FitPoint {
                    gamma,
                    w_min: model_w_min(gamma, v, delta),
                    sigma: None,
                }
            })
            .collect();
        FitInput::new(points).unwrap()
    }

    #[test]
    fn recovers_noiseless_parameters() {
        let data = synthetic_noiseless(0.925, 0.872, 11);
        let result = fit_noise_params(&data, 7).unwrap();
        assert!(result.converged);
        assert!((result.v_hat - 0.925).abs() < 1e-6, "V {}", result.v_hat);
        assert!(
            (result.delta_hat - 0.872).abs() < 1e-6,
            "delta {}",
            result.delta_hat
        );
        assert!((result.v_amplitude_hat - 0.925f64.sqrt()).abs() < 1e-6);
        assert!(result.residual_sum_of_squares < 1e-12);
        assert!(!result.delta_weakly_identified);
    }

    #[test]
    fn canonicalizes_mirror_solution() {
        // generate data from the delta < 1/2 branch; fit must report delta >= 1/2
        let data = synthetic_noiseless(0.9, 0.2, 9);
        let result = fit_noise_params(&data, 3).unwrap();
        assert!(result.delta_hat >= 0.5);
        assert!((result.delta_hat - 0.8).abs() < 1e-5);
        assert!((result.delta_mirror - 0.2).abs() < 1e-5);
    }

    #[test]
    fn flags_weakly_identified_delta() {
        let data = synthetic_noiseless(0.8, 0.51, 9);
        let result = fit_noise_params(&data, 5).unwrap();
        assert!(result.delta_weakly_identified);
        assert!(result.hessian_condition > 1.0);
    }

    #[test]
    fn objective_beats_every_grid_start() {
        let data = synthetic_noiseless(0.7, 0.9, 9);
        let result = fit_noise_params(&data, 11).unwrap();
        let best = objective(&data, result.v_hat, result.delta_hat);
        for i in 0..5 {
            for j in 0..5 {
                let v = 0.1 + 0.2 * i as f64;
                let d = 0.1 + 0.2 * j as f64;
                assert!(best <= objective(&data, v, d) + 1e-12);
            }
        }
    }

    #[test]
    fn bootstrap_covers_truth_on_poisson_data() {
        // calibration study: noisy synthetic minima at 1e4 shots/setting
        let truth = NoiseParams::new(0.9, 0.85).unwrap();
        let gammas: Vec<f64> = (0..8).map(|i| 0.1 + 0.8 * i as f64 / 7.0).collect();
        let mut v_hits = 0;
        let mut d_hits = 0;
        let trials = 60;
        for trial in 0..trials {
            let points: Vec<FitPoint> = gammas
                .iter()
                .enumerate()
                .map(|(i, &gamma)| {
                    // independent seed per point: a shared seed would correlate
                    // the sampling errors across gammas, which the bootstrap
                    // (assuming independent noise) cannot capture
                    let rho = noisy_channel_state(gamma, truth).unwrap();
                    let asm =
                        assemblage(&rho, &input_states(), &partial_bsm_two_outcome()).unwrap();
                    let cfg = ShotConfig::new(10_000, 900 + trial * 64 + i as u64, 100).unwrap();
                    let records = simulate_counts(&asm, &cfg);
                    let theta = minimize_witness_numeric(&asm).unwrap().theta.max(1e-6);
                    let (w, s) = estimate_witness(&records, theta, &cfg).unwrap();
                    FitPoint {
                        gamma,
                        w_min: w,
                        sigma: Some(s.max(1e-6)),
                    }
                })
                .collect();
            let data = FitInput::new(points).unwrap();
            let result = fit_noise_params(&data, 123 + trial).unwrap();
            if (result.v_hat - truth.v).abs() <= result.sigma_v {
                v_hits += 1;
            }
            if (result.delta_hat - truth.delta).abs() <= result.sigma_delta {
                d_hits += 1;
            }
        }
        // per-parameter 1-sigma coverage (nominal 68%)
        assert!(
            v_hits as f64 / trials as f64 >= 0.6,
            "V coverage {v_hits}/{trials}"
        );
        assert!(
            d_hits as f64 / trials as f64 >= 0.6,
            "delta coverage {d_hits}/{trials}"
        );
    }

    #[test]
    fn input_validation() {
        assert!(FitInput::new(vec![FitPoint {
            gamma: 0.5,
            w_min: 0.0,
            sigma: None
        }])
        .is_err());
        assert!(FitInput::new(vec![
            FitPoint {
                gamma: 0.5,
                w_min: 0.0,
                sigma: None
            },
            FitPoint {
                gamma: 0.5,
                w_min: 0.1,
                sigma: None
            },
        ])
        .is_err());
        assert!(FitInput::new(vec![
            FitPoint {
                gamma: 1.2,
                w_min: 0.0,
                sigma: None
            },
            FitPoint {
                gamma: 0.5,
                w_min: 0.1,
                sigma: None
            },
        ])
        .is_err());
    }

    #[test]
    fn csv_parsing() {
        let data = FitInput::from_csv("gamma,w_min,sigma\n0.1,-0.01,0.02\n0.5,-0.4,0.03\n").unwrap();
        assert_eq!(data.points().len(), 2);
        assert_eq!(data.points()[1].sigma, Some(0.03));
        let data = FitInput::from_csv("0.1,-0.01\n0.5,-0.4\n").unwrap();
        assert_eq!(data.points()[0].sigma, None);
        assert!(FitInput::from_csv("0.1\n0.5\n").is_err());
        assert!(FitInput::from_csv("a,b\nc,d\n").is_err());
    }
}

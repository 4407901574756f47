//! Temperature sweeps of the full simulation loop and their derived products.
//!
//! Each grid point runs: Γ and the ideal complexities; the noisy circuit and
//! its conditional channels (analytic or via simulated tomography); the
//! fixed-point states `ρ^m`; and finite-shot runs of those states on the true
//! device, giving `Γ^s` and the statistics-derived complexity.

mod band;
mod consistency;
mod output;
mod svg;

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

pub use band::{theory_band, BandPoint, TheoryBand};
pub use consistency::{
    ambiguity_map, consistency, source_complexities, AmbiguityMap, ConsistencyCell, Source,
    UNDEFINED_TOL,
};
pub use output::{
    ambiguity_csv, emit_outputs, read_sweep_csv, write_ambiguity_csv, write_band_csv,
    write_manifest, write_sweep_csv, OutputPaths, SWEEP_COLUMNS,
};
pub use svg::render_svg;

use crate::circuit::{
    apply_noise, conditional_maps, run_shots, spectral_ensemble, CircuitSpec,
    ConditionalChannelPair, NoiseModel, Route,
};
use crate::error::{Error, Result};
use crate::fixedpoint::{solve_fixed_points_with, OptimizerConfig};
use crate::ising::{
    invert_parameters, stationary_distribution, transition_probabilities, IsingParams,
    StationaryDistribution, TransitionMatrix,
};
use crate::machine::{complexities, quantum_complexity};
use crate::par::{derive_seed, map_indexed, Exec};
use crate::qmath::{DensityMatrix, Qubit};
use crate::tomography::{generate_tomography_data, reconstruct_channels, MIN_SHOTS};

/// Target temperatures used for the default sweep.
pub const PAPER_T_GRID: [f64; 15] = [
    0.75, 1.0, 1.25, 1.5, 1.75, 2.25, 2.75, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 14.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ChannelSource {
    /// Conditional maps taken directly from the noisy circuit.
    Analytic,
    /// Conditional maps reconstructed from simulated tomography.
    #[default]
    Tomography,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub j: f64,
    pub b_nominal: f64,
    pub t_grid: Vec<f64>,
    pub noise: NoiseModel,
    /// Shots per causal state for `Γ^s`; `None` uses exact probabilities.
    pub shots: Option<u64>,
    /// Shots per tomography setting; `None` uses exact probabilities.
    pub tomography_shots: Option<u64>,
    pub channel_source: ChannelSource,
    pub route: Route,
    pub optimizer: OptimizerConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            j: 1.0,
            b_nominal: 0.3,
            t_grid: PAPER_T_GRID.to_vec(),
            noise: NoiseModel::default(),
            shots: Some(100_000),
            tomography_shots: Some(100_000),
            channel_source: ChannelSource::Tomography,
            route: Route::Decomposed,
            optimizer: OptimizerConfig::default(),
            seed: 0,
            out_dir: PathBuf::from("out"),
            svg: false,
        }
    }
}

impl RunConfig {
    /// Infinite-shot mode for both the statistics and the tomography.
    pub fn exact(mut self) -> Self {
        self.shots = None;
        self.tomography_shots = None;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j.is_finite() && self.j != 0.0) || !self.b_nominal.is_finite() {
            return Err(Error::InvalidParams(
                "J must be finite and non-zero, B finite".into(),
            ));
        }
        if self.t_grid.is_empty() {
            return Err(Error::InvalidParams("temperature grid is empty".into()));
        }
        if self.t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidParams(
                "temperatures must be positive and finite".into(),
            ));
        }
        if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams(
                "temperature grid must be strictly increasing without duplicates".into(),
            ));
        }
        self.noise.validate()?;
        self.optimizer.validate()?;
        if self.shots == Some(0) {
            return Err(Error::InvalidParams("shot count must be ≥ 1".into()));
        }
        if self.tomography_shots.is_some_and(|n| n < MIN_SHOTS) {
            return Err(Error::InvalidParams(format!(
                "tomography shots must be ≥ {MIN_SHOTS}"
            )));
        }
        Ok(())
    }
}

/// One grid point. Optional fields are empty when a stage failed or the
/// quantity does not exist (e.g. `Γ^m` outside the Ising family).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub t_nominal: f64,
    pub b_nominal: f64,
    pub j: f64,
    pub gamma: Option<TransitionMatrix>,
    pub c_c: Option<f64>,
    pub c_q: Option<f64>,
    pub t_m: Option<f64>,
    pub b_m: Option<f64>,
    pub c_q_m: Option<f64>,
    pub t_s: Option<f64>,
    pub b_s: Option<f64>,
    pub c_q_s: Option<f64>,
    pub gamma_s: Option<TransitionMatrix>,
    pub p_s: Option<StationaryDistribution>,
    /// Fixed-point objective at the solution.
    pub residual: Option<f64>,
    pub shots: Option<u64>,
    pub seed: u64,
    pub status: RecordStatus,
    /// Fixed-point states, kept for downstream statistics.
    #[serde(skip)]
    pub rho_m: Option<[Qubit; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RecordStatus {
    Ok,
    Failed(String),
}

impl RecordStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, RecordStatus::Ok)
    }

    pub fn label(&self) -> String {
        match self {
            RecordStatus::Ok => "ok".into(),
            RecordStatus::Failed(msg) => format!("failed: {msg}"),
        }
    }
}

impl SweepRecord {
    pub fn empty(j: f64, b: f64, t: f64, seed: u64) -> Self {
        SweepRecord {
            t_nominal: t,
            b_nominal: b,
            j,
            gamma: None,
            c_c: None,
            c_q: None,
            t_m: None,
            b_m: None,
            c_q_m: None,
            t_s: None,
            b_s: None,
            c_q_s: None,
            gamma_s: None,
            p_s: None,
            residual: None,
            shots: None,
            seed,
            status: RecordStatus::Ok,
            rho_m: None,
        }
    }
}

/// `Γ^s` from shots (or exact probabilities) of each `ρ^m_i` through `pair`.
pub fn statistical_gamma(
    rho_m: &[Qubit; 2],
    pair: &ConditionalChannelPair,
    shots: Option<u64>,
    seed: u64,
) -> Result<(TransitionMatrix, [[u64; 2]; 2])> {
    let mut rows = [0.0; 2];
    let mut counts = [[0u64; 2]; 2];
    for i in 0..2 {
        rows[i] = match shots {
            None => {
                let p = pair.outcome_probabilities(rho_m[i].matrix());
                p[0] / (p[0] + p[1])
            }
            Some(n) => {
                let c = run_shots(
                    &spectral_ensemble(&rho_m[i]),
                    pair,
                    n,
                    derive_seed(seed, i as u64),
                )?;
                counts[i] = c;
                c[0] as f64 / n as f64
            }
        };
    }
    Ok((
        TransitionMatrix::from_off_diagonal(1.0 - rows[0], rows[1])?,
        counts,
    ))
}

/// `C_q(ρ^s)` with `ρ^s = p^s₀ρ^m₀ + p^s₁ρ^m₁`.
pub fn statistical_complexity(
    rho_m: &[Qubit; 2],
    gamma_s: &TransitionMatrix,
) -> Result<(StationaryDistribution, f64)> {
    let p = stationary_distribution(gamma_s)?;
    let rho = DensityMatrix::new(rho_m[0].matrix().scale(p.p0) + rho_m[1].matrix().scale(p.p1))?;
    Ok((p, quantum_complexity(&rho)))
}

/// Parametric-bootstrap standard deviation of `C_q^s` at `shots` per state.
pub fn bootstrap_c_q_s(
    rho_m: &[Qubit; 2],
    gamma_s: &TransitionMatrix,
    shots: u64,
    resamples: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |p: f64, rng: &mut ChaCha8Rng| {
        Binomial::new(shots, p.clamp(0.0, 1.0))
            .expect("valid binomial")
            .sample(rng) as f64
            / shots as f64
    };
    let mut values = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let g00 = draw(gamma_s.get(0, 0), &mut rng);
        let g10 = draw(gamma_s.get(1, 0), &mut rng);
        let g = TransitionMatrix::from_off_diagonal(1.0 - g00, g10)?;
        if let Ok((_, c)) = statistical_complexity(rho_m, &g) {
            values.push(c);
        }
    }
    if values.len() < 2 {
        return Err(Error::InsufficientData(
            "bootstrap produced no usable resamples".into(),
        ));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Ok((values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

/// Device and model channels for one grid point: the shots always run on the
/// true device; the fixed points use the source chosen in `cfg`.
fn channels(
    cfg: &RunConfig,
    gamma: &TransitionMatrix,
    seed: u64,
) -> Result<(ConditionalChannelPair, ConditionalChannelPair)> {
    let spec = CircuitSpec::build(gamma, cfg.route)?;
    let device = conditional_maps(&apply_noise(&spec, &cfg.noise), cfg.noise.readout_flip);
    let model = match cfg.channel_source {
        ChannelSource::Analytic => device.clone(),
        ChannelSource::Tomography => {
            let data =
                generate_tomography_data(&device, cfg.tomography_shots, derive_seed(seed, 1))?;
            reconstruct_channels(&data)?.pair()
        }
    };
    Ok((device, model))
}

fn run_point(cfg: &RunConfig, t: f64, seed: u64, exec: Exec) -> Result<SweepRecord> {
    let mut rec = SweepRecord::empty(cfg.j, cfg.b_nominal, t, seed);
    rec.shots = cfg.shots;
    let params = IsingParams::new(cfg.j, cfg.b_nominal, t)?;
    let gamma = transition_probabilities(&params)?;
    let ideal = complexities(&gamma)?;
    rec.gamma = Some(gamma);
    rec.c_c = Some(ideal.c_c);
    rec.c_q = Some(ideal.c_q);

    let (device, model) = channels(cfg, &gamma, seed)?;
    let opt = OptimizerConfig {
        seed: derive_seed(seed, 2),
        ..cfg.optimizer
    };
    let sol = solve_fixed_points_with(&model, &opt, cfg.j, Some(&gamma), exec)?;
    rec.t_m = sol.t_m;
    rec.b_m = sol.b_m;
    rec.c_q_m = Some(quantum_complexity(&sol.rho_m));
    rec.residual = Some(sol.residual);
    let rho_m = [sol.rho0, sol.rho1];

    let (gamma_s, _) = statistical_gamma(&rho_m, &device, cfg.shots, derive_seed(seed, 3))?;
    rec.gamma_s = Some(gamma_s);
    if let Ok((p_s, c_q_s)) = statistical_complexity(&rho_m, &gamma_s) {
        rec.p_s = Some(p_s);
        rec.c_q_s = Some(c_q_s);
    }
    if let Ok(inv) = invert_parameters(&gamma_s, cfg.j, None) {
        rec.t_s = Some(inv.t);
        rec.b_s = Some(inv.b);
    }
    rec.rho_m = Some(rho_m);
    Ok(rec)
}

/// Runs every grid point; grid points are independent and seeded by
/// `(cfg.seed, index)`. A failing point is kept with its error as status.
pub fn complexity_sweep(cfg: &RunConfig) -> Result<Vec<SweepRecord>> {
    complexity_sweep_with(cfg, Exec::default())
}

pub fn complexity_sweep_with(cfg: &RunConfig, exec: Exec) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    Ok(map_indexed(exec, cfg.t_grid.len(), |k| {
        let t = cfg.t_grid[k];
        let seed = derive_seed(cfg.seed, k as u64);
        // grid points already run concurrently; the inner solve stays sequential
        run_point(cfg, t, seed, Exec::Sequential).unwrap_or_else(|e| {
            let mut rec = SweepRecord::empty(cfg.j, cfg.b_nominal, t, seed);
            rec.shots = cfg.shots;
            rec.status = RecordStatus::Failed(e.to_string());
            rec
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short_grid() -> Vec<f64> {
        vec![0.75, 1.5, 3.0, 8.0]
    }

    #[test]
    fn zero_noise_exact_collapse() {
        for source in [ChannelSource::Analytic, ChannelSource::Tomography] {
            let cfg = RunConfig {
                noise: NoiseModel::ideal(),
                channel_source: source,
                t_grid: short_grid(),
                ..RunConfig::default()
            }
            .exact();
            for r in complexity_sweep(&cfg).unwrap() {
                assert!(r.status.is_ok(), "{:?}", r.status);
                let c_q = r.c_q.unwrap();
                assert!(
                    (r.c_q_m.unwrap() - c_q).abs() < 1e-6,
                    "{source:?} T={}",
                    r.t_nominal
                );
                assert!((r.c_q_s.unwrap() - c_q).abs() < 1e-6);
                assert!((r.t_m.unwrap() - r.t_nominal).abs() < 1e-4);
                assert!((r.b_s.unwrap() - 0.3).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn finite_shot_c_q_s_within_bootstrap_band() {
        let cfg = RunConfig {
            t_grid: short_grid(),
            ..RunConfig::default()
        };
        let recs = complexity_sweep(&cfg).unwrap();
        let exact = complexity_sweep(&RunConfig {
            shots: None,
            ..cfg.clone()
        })
        .unwrap();
        for (r, e) in recs.iter().zip(&exact) {
            let rho = r.rho_m.as_ref().unwrap();
            assert_eq!(rho, e.rho_m.as_ref().unwrap());
            let sigma = bootstrap_c_q_s(rho, &r.gamma_s.unwrap(), 100_000, 200, 9).unwrap();
            let gap = (r.c_q_s.unwrap() - e.c_q_s.unwrap()).abs();
            assert!(
                gap <= 5.0 * sigma,
                "T={}: gap {gap} vs σ {sigma}",
                r.t_nominal
            );
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let cfg = RunConfig {
            t_grid: vec![1.0, 2.0, 5.0],
            optimizer: OptimizerConfig {
                starts: 4,
                ..Default::default()
            },
            ..RunConfig::default()
        };
        let a = complexity_sweep_with(&cfg, Exec::Sequential).unwrap();
        let b = complexity_sweep_with(&cfg, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        let bad = |f: fn(&mut RunConfig)| {
            let mut c = RunConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.t_grid = vec![1.0, 1.0]));
        assert!(bad(|c| c.t_grid = vec![2.0, 1.0]));
        assert!(bad(|c| c.t_grid = vec![0.0, 1.0]));
        assert!(bad(|c| c.t_grid.clear()));
        assert!(bad(|c| c.j = 0.0));
        assert!(bad(|c| c.tomography_shots = Some(10)));
        assert!(bad(|c| c.noise.readout_flip = 0.9));
        assert!(RunConfig::default().validate().is_ok());
    }

    #[test]
    fn config_json_round_trip_and_defaults() {
        let cfg = RunConfig::default().exact();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
        let partial: RunConfig = serde_json::from_str(r#"{"b_nominal": -0.5}"#).unwrap();
        assert_eq!(partial.b_nominal, -0.5);
        assert_eq!(partial.t_grid, PAPER_T_GRID.to_vec());
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn failing_point_is_marked() {
        // Γ is uniform to within the degeneracy threshold at this temperature
        let cfg = RunConfig {
            t_grid: vec![2.0, 1e12],
            optimizer: OptimizerConfig {
                starts: 2,
                ..Default::default()
            },
            ..RunConfig::default()
        };
        let recs = complexity_sweep(&cfg).unwrap();
        assert_eq!(recs.len(), 2);
        assert!(recs[0].status.is_ok());
        assert!(!recs[1].status.is_ok());
        assert_eq!(recs[1].t_nominal, 1e12);
        assert!(
            recs[1].status.label().contains("causal states coincide"),
            "{}",
            recs[1].status.label()
        );
    }
}

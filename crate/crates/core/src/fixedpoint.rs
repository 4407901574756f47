//! Approximate fixed points of an imperfect conditional channel pair: the
//! states `ρ₀, ρ₁` and transition matrix `Γ^m` minimising
//! `Σ_ij D(𝓔_j(ρ_i), Γ_ij ρ_j)` with `D` the trace distance.
//!
//! Labels follow the outcome index of the pair: `ρ_j` is the state emitted
//! with symbol `j`. Swapping the state labels without also swapping the
//! branches changes the objective, so no relabelling pass is applied.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::ConditionalChannelPair;
use crate::error::{Error, Result};
use crate::ising::{
    invert_parameters, stationary_distribution, StationaryDistribution, TransitionMatrix,
};
use crate::machine::quantum_causal_states;
use crate::optim::{multistart, SimplexOptions};
use crate::par::{derive_seed, Exec};
use crate::qmath::{trace_distance2, BlochVector, DensityMatrix, Mat2, Qubit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub max_evals: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            starts: 32,
            max_evals: 20_000,
            tolerance: 1e-8,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::InvalidParams(
                "at least one start is required".into(),
            ));
        }
        if !(self.tolerance > 0.0) || self.max_evals == 0 {
            return Err(Error::InvalidParams(
                "tolerance and budget must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Point evaluated by [`objective`].
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub rho0: Mat2,
    pub rho1: Mat2,
    pub gamma: TransitionMatrix,
}

impl Candidate {
    pub fn state(&self, i: usize) -> &Mat2 {
        if i == 0 {
            &self.rho0
        } else {
            &self.rho1
        }
    }

    /// Pure causal states of `gamma` with `gamma` itself.
    pub fn noiseless(gamma: &TransitionMatrix) -> Self {
        let s = quantum_causal_states(gamma);
        Candidate {
            rho0: Mat2::projector(&s.s0),
            rho1: Mat2::projector(&s.s1),
            gamma: *gamma,
        }
    }
}

/// `Σ_ij D(𝓔_j(ρ_i), Γ_ij ρ_j)`.
pub fn objective(c: &Candidate, pair: &ConditionalChannelPair) -> f64 {
    let mut total = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let out = pair.branch(j).apply_matrix(c.state(i));
            total += trace_distance2(&out, &c.state(j).scale(c.gamma.get(i, j)));
        }
    }
    total
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-15, 1.0 - 1e-15);
    (p / (1.0 - p)).ln()
}

/// `u ↦ sin|u| · u/|u|`; radius `|u| = π/2` is the surface of the ball.
fn squash(u: &[f64]) -> BlochVector {
    let r = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let k = if r < 1e-8 {
        1.0 - r * r / 6.0
    } else {
        r.sin() / r
    };
    BlochVector::clipped(k * u[0], k * u[1], k * u[2])
}

fn unsquash(b: &BlochVector) -> [f64; 3] {
    let n = b.norm().min(1.0);
    if n < 1e-12 {
        return [0.0; 3];
    }
    let k = n.asin() / n;
    [k * b.x, k * b.y, k * b.z]
}

fn decode(x: &[f64]) -> Candidate {
    let gamma = TransitionMatrix::from_off_diagonal(sigmoid(x[6]), sigmoid(x[7]))
        .expect("sigmoid stays in [0, 1]");
    Candidate {
        rho0: squash(&x[0..3]).to_matrix(),
        rho1: squash(&x[3..6]).to_matrix(),
        gamma,
    }
}

fn bloch_of(m: &Mat2) -> BlochVector {
    let off = m.data[0][1];
    BlochVector::clipped(
        2.0 * off.re,
        -2.0 * off.im,
        m.data[0][0].re - m.data[1][1].re,
    )
}

fn encode(c: &Candidate) -> Vec<f64> {
    let b0 = bloch_of(&c.rho0);
    let b1 = bloch_of(&c.rho1);
    let mut x = Vec::with_capacity(8);
    x.extend(unsquash(&b0));
    x.extend(unsquash(&b1));
    x.push(logit(c.gamma.get(0, 1)));
    x.push(logit(c.gamma.get(1, 0)));
    x
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointSolution {
    pub rho0: Qubit,
    pub rho1: Qubit,
    pub gamma_m: TransitionMatrix,
    pub residual: f64,
    pub p_m: StationaryDistribution,
    /// `None` when `gamma_m` lies outside the Ising family for this coupling.
    pub t_m: Option<f64>,
    pub b_m: Option<f64>,
    pub rho_m: Qubit,
    /// `residual ≤ tolerance`.
    pub converged: bool,
    /// Objective at the warm start, if one was given.
    pub warm_start_residual: Option<f64>,
}

impl FixedPointSolution {
    pub fn candidate(&self) -> Candidate {
        Candidate {
            rho0: *self.rho0.matrix(),
            rho1: *self.rho1.matrix(),
            gamma: self.gamma_m,
        }
    }

    pub fn to_json(&self) -> FixedPointJson {
        FixedPointJson {
            bloch0: self.rho0.bloch(),
            bloch1: self.rho1.bloch(),
            gamma: self.gamma_m.entries(),
            residual: self.residual,
            converged: self.converged,
            t_m: self.t_m,
            b_m: self.b_m,
            p_m: self.p_m.as_array(),
        }
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json()).expect("solution serialises");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Serialised form of a [`FixedPointSolution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointJson {
    pub bloch0: BlochVector,
    pub bloch1: BlochVector,
    pub gamma: [[f64; 2]; 2],
    pub residual: f64,
    pub converged: bool,
    pub t_m: Option<f64>,
    pub b_m: Option<f64>,
    pub p_m: [f64; 2],
}

pub fn solve_fixed_points(
    pair: &ConditionalChannelPair,
    cfg: &OptimizerConfig,
    j: f64,
    warm_start: Option<&TransitionMatrix>,
) -> Result<FixedPointSolution> {
    solve_fixed_points_with(pair, cfg, j, warm_start, Exec::default())
}

/// Multi-start simplex search. The first start is the noiseless candidate of
/// `warm_start` when given; the others are drawn from `cfg.seed`.
pub fn solve_fixed_points_with(
    pair: &ConditionalChannelPair,
    cfg: &OptimizerConfig,
    j: f64,
    warm_start: Option<&TransitionMatrix>,
    exec: Exec,
) -> Result<FixedPointSolution> {
    cfg.validate()?;
    let mut starts = Vec::with_capacity(cfg.starts);
    let warm = warm_start
        .filter(|g| !g.is_degenerate())
        .map(Candidate::noiseless);
    if let Some(c) = &warm {
        starts.push(encode(c));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0xF1));
    while starts.len() < cfg.starts {
        let mut x = Vec::with_capacity(8);
        for _ in 0..6 {
            x.push(rng.random_range(-FRAC_PI_2..FRAC_PI_2));
        }
        x.push(rng.random_range(-3.0..3.0));
        x.push(rng.random_range(-3.0..3.0));
        starts.push(x);
    }
    let f = |x: &[f64]| objective(&decode(x), pair);
    let opts = SimplexOptions {
        max_evals: cfg.max_evals,
        f_tol: cfg.tolerance,
        initial_step: 0.2,
        restarts: 3,
    };
    let best = multistart(&f, &starts, &opts, exec);
    let c = decode(&best.x);
    let residual = objective(&c, pair);
    let p_m = stationary_distribution(&c.gamma)?;
    let rho0 = DensityMatrix::new(c.rho0)?;
    let rho1 = DensityMatrix::new(c.rho1)?;
    let rho_m = DensityMatrix::new(c.rho0.scale(p_m.p0) + c.rho1.scale(p_m.p1))?;
    let (t_m, b_m) = match invert_parameters(&c.gamma, j, None) {
        Ok(inv) => (Some(inv.t), Some(inv.b)),
        Err(_) => (None, None),
    };
    Ok(FixedPointSolution {
        rho0,
        rho1,
        gamma_m: c.gamma,
        residual,
        p_m,
        t_m,
        b_m,
        rho_m,
        converged: residual <= cfg.tolerance,
        warm_start_residual: warm.map(|c| objective(&c, pair)),
    })
}

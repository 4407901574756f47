//! The controlled-unitary step of the quantum ε-machine, its CZ-core
//! decomposition, noise injection, conditional channels and shot sampling.
//!
//! Registers are ordered memory ⊗ ancilla on both sides of the step: the
//! memory qubit carries the causal state and the ancilla carries the emitted
//! symbol.
//!
//! In the CZ-core circuit the input memory qubit acts as the control and ends
//! up holding the symbol, while the ancilla wire ends up holding the next
//! causal state. The circuit therefore closes with a wire relabelling (a
//! noiseless swap of register names) so that its output uses the same
//! memory ⊗ ancilla convention as the direct construction.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{stationary_distribution, TransitionMatrix};
use crate::machine::quantum_causal_states;
use crate::optim::{multistart, Minimum, SimplexOptions};
use crate::par::Exec;
use crate::qmath::{
    inner, kron_ket, real_ket, Mat2, Mat4, QuantumChannel, Qubit, TwoQubitChannel, Vector, C64,
    ZERO,
};

pub const CU_TOL: f64 = 1e-10;
pub const DECOMPOSITION_TARGET: f64 = 1e-8;
pub const DECOMPOSITION_MAX_RESIDUAL: f64 = 1e-6;
const DECOMPOSITION_STARTS: usize = 32;
const DECOMPOSITION_EVALS: usize = 20_000;
const DECOMPOSITION_BATCH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Direct,
    #[default]
    Decomposed,
}

/// Physical wire of the CZ-core circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wire {
    /// Input memory qubit; controls the CZ and is read out as the symbol.
    Control,
    /// Input ancilla; leaves the circuit as the next memory state.
    Target,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Single {
        wire: Wire,
        label: &'static str,
        op: Mat2,
    },
    Cz,
}

impl Gate {
    /// Embedding on the two-qubit register, control wire first.
    pub fn matrix(&self) -> Mat4 {
        match self {
            Gate::Single {
                wire: Wire::Control,
                op,
                ..
            } => op.kron(&Mat2::identity()),
            Gate::Single {
                wire: Wire::Target,
                op,
                ..
            } => Mat2::identity().kron(op),
            Gate::Cz => Mat4::cz(),
        }
    }
}

/// A constructed controlled-unitary step.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub gamma: TransitionMatrix,
    pub route: Route,
    /// Time-ordered gates of the decomposed route; empty for the direct one.
    pub gates: Vec<Gate>,
    /// Rotation angles `(θ₀, θ₁)` of `V₀ = R_y(θ₀)` and `V₁ = R_y(θ₁)`.
    pub angles: Option<(f64, f64)>,
    /// Residual of the two defining equations for the decomposed route.
    pub residual: f64,
    /// Composed two-qubit operator in memory ⊗ ancilla convention.
    pub unitary: Mat4,
}

impl CircuitSpec {
    pub fn build(gamma: &TransitionMatrix, route: Route) -> Result<Self> {
        match route {
            Route::Direct => Ok(CircuitSpec {
                gamma: *gamma,
                route,
                gates: Vec::new(),
                angles: None,
                residual: cu_residual(&build_cu_direct(gamma)?, gamma),
                unitary: build_cu_direct(gamma)?,
            }),
            Route::Decomposed => build_cu_decomposed(gamma),
        }
    }
}

/// `(memory ⊗ ancilla)` targets `√Γ_i0 |S₀⟩|0⟩ + √Γ_i1 |S₁⟩|1⟩` for `i = 0, 1`.
pub fn cu_targets(gamma: &TransitionMatrix) -> [Vector<4>; 2] {
    let s = quantum_causal_states(gamma);
    let zero = real_ket([1.0, 0.0]);
    let one = real_ket([0.0, 1.0]);
    let a = kron_ket(&s.s0, &zero);
    let b = kron_ket(&s.s1, &one);
    [0, 1].map(|i| {
        let (w0, w1) = (gamma.get(i, 0).sqrt(), gamma.get(i, 1).sqrt());
        let mut v = [ZERO; 4];
        for k in 0..4 {
            v[k] = a[k] * w0 + b[k] * w1;
        }
        v
    })
}

/// `|S_i⟩ ⊗ |0⟩` for `i = 0, 1`.
pub fn cu_inputs(gamma: &TransitionMatrix) -> [Vector<4>; 2] {
    let s = quantum_causal_states(gamma);
    let zero = real_ket([1.0, 0.0]);
    [kron_ket(&s.s0, &zero), kron_ket(&s.s1, &zero)]
}

/// Largest deviation of `u` from the two defining equations.
pub fn cu_residual(u: &Mat4, gamma: &TransitionMatrix) -> f64 {
    let ins = cu_inputs(gamma);
    let outs = cu_targets(gamma);
    let mut sq = 0.0;
    for i in 0..2 {
        let got = u.apply(&ins[i]);
        sq += got
            .iter()
            .zip(&outs[i])
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>();
    }
    sq.sqrt()
}

/// Controlled unitary defined on the ancilla-|0⟩ subspace by its two
/// equations and completed by Gram–Schmidt over `|0⟩|1⟩, |1⟩|1⟩, …`.
pub fn build_cu_direct(gamma: &TransitionMatrix) -> Result<Mat4> {
    if gamma.is_degenerate() {
        return Err(Error::DegenerateStates);
    }
    let s = quantum_causal_states(gamma);
    // S has the causal states as columns; |a⟩ = Σ_i (S⁻¹)_ia |S_i⟩
    let (s00, s01, s10, s11) = (s.s0[0], s.s1[0], s.s0[1], s.s1[1]);
    let det = s00 * s11 - s01 * s10;
    if det.norm() < 1e-12 {
        return Err(Error::DegenerateStates);
    }
    let inv = [[s11 / det, -s01 / det], [-s10 / det, s00 / det]];
    let outs = cu_targets(gamma);
    let mut u = Mat4::zeros();
    for a in 0..2 {
        let mut col = [ZERO; 4];
        for (i, out) in outs.iter().enumerate() {
            for k in 0..4 {
                col[k] += inv[i][a] * out[k];
            }
        }
        u.set_column(2 * a, &col);
    }
    let mut basis: Vec<Vector<4>> = vec![u.column(0), u.column(2)];
    let candidates = [1usize, 3, 0, 2];
    let mut filled = Vec::new();
    for &c in &candidates {
        if filled.len() == 2 {
            break;
        }
        let mut v = [ZERO; 4];
        v[c] = C64::new(1.0, 0.0);
        for b in &basis {
            let ip = inner(b, &v);
            for k in 0..4 {
                v[k] -= b[k] * ip;
            }
        }
        let n: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            let v = v.map(|x| x / n);
            basis.push(v);
            filled.push(v);
        }
    }
    u.set_column(1, &filled[0]);
    u.set_column(3, &filled[1]);
    Ok(u)
}

/// Gate list `V₁†, H, CZ, H, V₁, V₀` on the target wire (time order).
fn decomposed_gates(theta0: f64, theta1: f64) -> Vec<Gate> {
    let v0 = Mat2::ry(theta0);
    let v1 = Mat2::ry(theta1);
    let t = Wire::Target;
    vec![
        Gate::Single {
            wire: t,
            label: "V1^-1",
            op: v1.adjoint(),
        },
        Gate::Single {
            wire: t,
            label: "H^-1",
            op: Mat2::hadamard(),
        },
        Gate::Cz,
        Gate::Single {
            wire: t,
            label: "H",
            op: Mat2::hadamard(),
        },
        Gate::Single {
            wire: t,
            label: "V1",
            op: v1,
        },
        Gate::Single {
            wire: t,
            label: "V0",
            op: v0,
        },
    ]
}

fn compose(gates: &[Gate]) -> Mat4 {
    let body = gates
        .iter()
        .fold(Mat4::identity(), |acc, g| g.matrix() * acc);
    Mat4::swap() * body
}

/// Solves for the angles of `V₀` and `V₁` so that the CZ-core sequence
/// satisfies the controlled-unitary equations.
pub fn build_cu_decomposed(gamma: &TransitionMatrix) -> Result<CircuitSpec> {
    build_cu_decomposed_with(gamma, Exec::default())
}

pub fn build_cu_decomposed_with(gamma: &TransitionMatrix, exec: Exec) -> Result<CircuitSpec> {
    if gamma.is_degenerate() {
        return Err(Error::DegenerateStates);
    }
    let objective = |x: &[f64]| {
        let r = cu_residual(&compose(&decomposed_gates(x[0], x[1])), gamma);
        r * r
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let starts: Vec<Vec<f64>> = (0..DECOMPOSITION_STARTS)
        .map(|_| vec![rng.random_range(-PI..PI), rng.random_range(-PI..PI)])
        .collect();
    let opts = SimplexOptions {
        max_evals: DECOMPOSITION_EVALS,
        f_tol: 1e-30,
        initial_step: 0.5,
        restarts: 4,
    };
    // starts run in fixed batches; later batches only run if no earlier one
    // reached the target, so the outcome is independent of scheduling
    let mut best: Option<Minimum> = None;
    for batch in starts.chunks(DECOMPOSITION_BATCH) {
        let m = multistart(&objective, batch, &opts, exec);
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
        if best
            .as_ref()
            .is_some_and(|b| b.value.sqrt() < DECOMPOSITION_TARGET * 1e-2)
        {
            break;
        }
    }
    let best = best.expect("at least one batch");
    let residual = best.value.max(0.0).sqrt();
    if !(residual <= DECOMPOSITION_MAX_RESIDUAL) {
        return Err(Error::NoDecomposition { residual });
    }
    let gates = decomposed_gates(best.x[0], best.x[1]);
    let unitary = compose(&gates);
    Ok(CircuitSpec {
        gamma: *gamma,
        route: Route::Decomposed,
        gates,
        angles: Some((best.x[0], best.x[1])),
        residual,
        unitary,
    })
}

/// Imperfections applied to the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Two-qubit depolarizing weight after the entangling core, in `[0, 1]`.
    pub depolarizing: f64,
    /// Coherent over-rotation about Y (radians) after each single-qubit gate.
    pub overrotation: f64,
    /// Probability that the ancilla readout reports the wrong symbol, in `[0, 0.5]`.
    pub readout_flip: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            depolarizing: 0.03,
            overrotation: 0.02,
            readout_flip: 0.01,
        }
    }
}

impl NoiseModel {
    pub fn ideal() -> Self {
        NoiseModel {
            depolarizing: 0.0,
            overrotation: 0.0,
            readout_flip: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.depolarizing) {
            return Err(Error::InvalidParams(format!(
                "depolarizing weight {} outside [0, 1]",
                self.depolarizing
            )));
        }
        if !self.overrotation.is_finite() {
            return Err(Error::InvalidParams("over-rotation must be finite".into()));
        }
        if !(0.0..=0.5).contains(&self.readout_flip) {
            return Err(Error::InvalidParams(format!(
                "readout flip {} outside [0, 0.5]",
                self.readout_flip
            )));
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.depolarizing == 0.0 && self.overrotation == 0.0 && self.readout_flip == 0.0
    }
}

/// Two-qubit channel actually realised by `spec` under `noise` (the readout
/// flip is applied later, by [`conditional_maps`]).
pub fn apply_noise(spec: &CircuitSpec, noise: &NoiseModel) -> TwoQubitChannel {
    let eps = noise.overrotation;
    match spec.route {
        Route::Decomposed => {
            let mut ch = TwoQubitChannel::unitary(Mat4::identity());
            for g in &spec.gates {
                ch = ch.then_unitary(&g.matrix());
                match g {
                    Gate::Single { wire, .. } => {
                        if eps != 0.0 {
                            let kick = Gate::Single {
                                wire: *wire,
                                label: "Ry(eps)",
                                op: Mat2::ry(eps),
                            };
                            ch = ch.then_unitary(&kick.matrix());
                        }
                    }
                    Gate::Cz => ch = ch.then_depolarizing(noise.depolarizing),
                }
            }
            ch.then_unitary(&Mat4::swap())
        }
        Route::Direct => {
            let mut ch =
                TwoQubitChannel::unitary(spec.unitary).then_depolarizing(noise.depolarizing);
            if eps != 0.0 {
                ch = ch.then_unitary(&Mat2::ry(eps).kron(&Mat2::ry(eps)));
            }
            ch
        }
    }
}

/// `𝓔₀` and `𝓔₁`: the memory-qubit maps conditioned on the reported symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalChannelPair {
    pub e0: QuantumChannel,
    pub e1: QuantumChannel,
}

impl ConditionalChannelPair {
    pub fn branch(&self, j: usize) -> &QuantumChannel {
        if j == 0 {
            &self.e0
        } else {
            &self.e1
        }
    }

    pub fn total(&self) -> QuantumChannel {
        self.e0.sum(&self.e1)
    }

    /// `(Tr 𝓔₀(ρ), Tr 𝓔₁(ρ))`
    pub fn outcome_probabilities(&self, rho: &Mat2) -> [f64; 2] {
        [0, 1].map(|j| self.branch(j).apply_matrix(rho).trace().re.clamp(0.0, 1.0))
    }
}

/// `𝓔_j(ρ) = Tr_anc[(I ⊗ Π̃_j) 𝓔(ρ ⊗ |0⟩⟨0|)]` with the noisy readout effect
/// `Π̃_j = (1 − q) Π_j + q Π_{1−j}`.
pub fn conditional_maps(noisy: &TwoQubitChannel, flip: f64) -> ConditionalChannelPair {
    let [e0, e1] = [0usize, 1].map(|j| {
        let mut kraus = Vec::new();
        for k in noisy.kraus() {
            for anc in 0..2 {
                let w = if anc == j { 1.0 - flip } else { flip };
                if w == 0.0 {
                    continue;
                }
                let mut a = Mat2::zeros();
                for r in 0..2 {
                    for c in 0..2 {
                        a.data[r][c] = k.data[2 * r + anc][2 * c];
                    }
                }
                kraus.push(a.scale(w.sqrt()));
            }
        }
        QuantumChannel::from_kraus(kraus)
    });
    ConditionalChannelPair { e0, e1 }
}

/// Builds, perturbs and conditions the circuit for `gamma` in one call.
pub fn channel_pair(
    gamma: &TransitionMatrix,
    route: Route,
    noise: &NoiseModel,
) -> Result<(CircuitSpec, ConditionalChannelPair)> {
    noise.validate()?;
    let spec = CircuitSpec::build(gamma, route)?;
    let pair = conditional_maps(&apply_noise(&spec, noise), noise.readout_flip);
    Ok((spec, pair))
}

/// Pure-state ensemble realising a mixed input.
pub type Ensemble = Vec<(Vector<2>, f64)>;

/// Eigenvectors of `rho` weighted by its eigenvalues.
pub fn spectral_ensemble(rho: &Qubit) -> Ensemble {
    let e = rho.eigen();
    let w: Vec<f64> = e.values.iter().map(|x| x.max(0.0)).collect();
    let total: f64 = w.iter().sum();
    (0..2)
        .filter(|&k| w[k] > 0.0)
        .map(|k| (e.vectors.column(k), w[k] / total))
        .collect()
}

/// Symbol counts `[n₀, n₁]` from `shots` runs of one machine step.
pub fn run_shots(
    ensemble: &[(Vector<2>, f64)],
    pair: &ConditionalChannelPair,
    shots: u64,
    seed: u64,
) -> Result<[u64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_shots_with(ensemble, pair, shots, &mut rng)
}

pub fn run_shots_with<R: Rng>(
    ensemble: &[(Vector<2>, f64)],
    pair: &ConditionalChannelPair,
    shots: u64,
    rng: &mut R,
) -> Result<[u64; 2]> {
    if shots == 0 {
        return Err(Error::InvalidParams("shot count must be ≥ 1".into()));
    }
    let total: f64 = ensemble.iter().map(|(_, w)| w).sum();
    if ensemble.is_empty() || (total - 1.0).abs() > 1e-9 || ensemble.iter().any(|(_, w)| *w < 0.0) {
        return Err(Error::InvalidParams(format!(
            "ensemble weights must be non-negative and sum to 1, got {total}"
        )));
    }
    let probs: Vec<f64> = ensemble
        .iter()
        .map(|(ket, _)| {
            let p = pair.outcome_probabilities(&Mat2::projector(ket));
            p[0] / (p[0] + p[1])
        })
        .collect();
    let mut counts = [0u64; 2];
    for _ in 0..shots {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut member = ensemble.len() - 1;
        for (k, (_, w)) in ensemble.iter().enumerate() {
            acc += w;
            if u < acc {
                member = k;
                break;
            }
        }
        let outcome = if rng.random::<f64>() < probs[member] {
            0
        } else {
            1
        };
        counts[outcome] += 1;
    }
    Ok(counts)
}

/// Symbol sequence of the classical machine. `start = None` draws the
/// initial state from the stationary distribution.
pub fn classical_sample(
    gamma: &TransitionMatrix,
    steps: usize,
    start: Option<usize>,
    seed: u64,
) -> Result<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = match start {
        Some(s) if s < 2 => s,
        Some(s) => return Err(Error::InvalidParams(format!("no causal state {s}"))),
        None => {
            let p = stationary_distribution(gamma)?;
            usize::from(rng.random::<f64>() >= p.p0)
        }
    };
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let next = usize::from(rng.random::<f64>() >= gamma.get(state, 0));
        out.push(next as u8);
        state = next;
    }
    Ok(out)
}

//! Simulated process tomography of the conditional channel pair and Pauli
//! state tomography of single qubits.
//!
//! Each configuration prepares one of `|0⟩, |1⟩, |+⟩, |+i⟩`, runs the step,
//! reads the ancilla outcome `j` and measures the memory qubit in one Pauli
//! basis. A configuration therefore has four outcomes `(j, ±)`, drawn jointly.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuit::ConditionalChannelPair;
use crate::error::{Error, Result};
use crate::qmath::{
    hermitian_eigensolve, standard_inputs, BlochVector, DensityMatrix, Mat2, Mat4, QuantumChannel,
    Qubit, C64,
};

pub const MIN_SHOTS: u64 = 100;
pub const DEFAULT_SHOTS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputState {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "+i")]
    PlusI,
}

impl InputState {
    pub const ALL: [InputState; 4] = [
        InputState::Zero,
        InputState::One,
        InputState::Plus,
        InputState::PlusI,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn state(self) -> Qubit {
        standard_inputs()[self.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn observable(self) -> Mat2 {
        match self {
            Basis::X => Mat2::pauli_x(),
            Basis::Y => Mat2::pauli_y(),
            Basis::Z => Mat2::pauli_z(),
        }
    }

    /// `(Π₊, Π₋)` for this basis.
    pub fn projectors(self) -> (Mat2, Mat2) {
        let p = self.observable();
        let id = Mat2::identity();
        ((id + p).scale(0.5), (id - p).scale(0.5))
    }
}

/// One `(input, outcome, basis)` configuration. With `shots = None` on the
/// dataset the two entries are exact probabilities instead of counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TomographyRecord {
    pub input: InputState,
    pub outcome: u8,
    pub basis: Basis,
    pub n_plus: f64,
    pub n_minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyDataset {
    /// Shots per `(input, basis)` setting; `None` in exact-probability mode.
    pub shots: Option<u64>,
    pub seed: u64,
    pub records: Vec<TomographyRecord>,
}

impl TomographyDataset {
    pub fn is_exact(&self) -> bool {
        self.shots.is_none()
    }

    pub fn find(&self, input: InputState, outcome: u8, basis: Basis) -> Option<&TomographyRecord> {
        self.records
            .iter()
            .find(|r| r.input == input && r.outcome == outcome && r.basis == basis)
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.records {
            if r.outcome > 1 {
                return Err(Error::IncompleteData(format!(
                    "outcome {} out of range",
                    r.outcome
                )));
            }
            if !(r.n_plus >= 0.0 && r.n_minus >= 0.0) {
                return Err(Error::IncompleteData("negative count".into()));
            }
            let bound = self.shots.map_or(1.0 + 1e-12, |s| s as f64);
            if r.n_plus + r.n_minus > bound {
                return Err(Error::IncompleteData(format!(
                    "{:?}/{}/{:?} exceeds shots per setting",
                    r.input, r.outcome, r.basis
                )));
            }
        }
        Ok(())
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("dataset serialises");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let data: Self = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        data.validate()?;
        Ok(data)
    }
}

/// Exact `Tr[Π_± 𝓔_j(ρ)]` for one setting.
fn setting_probabilities(pair: &ConditionalChannelPair, input: &Qubit, basis: Basis) -> [f64; 4] {
    let (pp, pm) = basis.projectors();
    let mut out = [0.0; 4];
    for j in 0..2 {
        let s = pair.branch(j).apply_matrix(input.matrix());
        out[2 * j] = (pp * s).trace().re.max(0.0);
        out[2 * j + 1] = (pm * s).trace().re.max(0.0);
    }
    let total: f64 = out.iter().sum();
    out.map(|p| p / total)
}

/// Multinomial draw through a chain of conditional binomials.
fn multinomial(rng: &mut ChaCha8Rng, n: u64, probs: &[f64]) -> Vec<u64> {
    let mut left = n;
    let mut mass = 1.0;
    let mut out = Vec::with_capacity(probs.len());
    for (k, &p) in probs.iter().enumerate() {
        if k + 1 == probs.len() {
            out.push(left);
            break;
        }
        let c = if left == 0 || mass <= 0.0 {
            0
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(left, q).expect("valid binomial").sample(rng)
        };
        out.push(c);
        left -= c;
        mass -= p;
    }
    out
}

/// Simulated counts for all 4 × 2 × 3 configurations. `shots = None`
/// records the exact probabilities.
pub fn generate_tomography_data(
    pair: &ConditionalChannelPair,
    shots: Option<u64>,
    seed: u64,
) -> Result<TomographyDataset> {
    if let Some(n) = shots {
        if n < MIN_SHOTS {
            return Err(Error::InvalidParams(format!(
                "tomography needs at least {MIN_SHOTS} shots per setting, got {n}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(24);
    for input in InputState::ALL {
        let rho = input.state();
        for basis in Basis::ALL {
            let probs = setting_probabilities(pair, &rho, basis);
            let values: Vec<f64> = match shots {
                None => probs.to_vec(),
                Some(n) => multinomial(&mut rng, n, &probs)
                    .into_iter()
                    .map(|c| c as f64)
                    .collect(),
            };
            for j in 0..2u8 {
                records.push(TomographyRecord {
                    input,
                    outcome: j,
                    basis,
                    n_plus: values[2 * j as usize],
                    n_minus: values[2 * j as usize + 1],
                });
            }
        }
    }
    Ok(TomographyDataset {
        shots,
        seed,
        records,
    })
}

/// Clamps negative eigenvalues to zero and rescales to the original trace,
/// clipped to `[0, 2]`.
pub fn cp_project(choi: &Mat4) -> Result<Mat4> {
    let e = hermitian_eigensolve(choi)?;
    let target = choi.trace().re.clamp(0.0, 2.0);
    let clamped = e.values.map(|v| v.max(0.0));
    let kept: f64 = clamped.iter().sum();
    if kept <= 0.0 {
        return Ok(Mat4::zeros());
    }
    if e.values.iter().all(|&v| v >= 0.0) && (kept - target).abs() < 1e-15 {
        return Ok(*choi);
    }
    let scale = target / kept;
    Ok(e.reconstruct_with(|v| v.max(0.0) * scale).hermitian_part())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub e0_hat: QuantumChannel,
    pub e1_hat: QuantumChannel,
    /// Normalised post-measurement states `ρ̂(j|i)`, indexed `[input][outcome]`.
    pub state_hats: [[Qubit; 2]; 4],
    /// Estimated branch probabilities, indexed `[input][outcome]`.
    pub branch_probabilities: [[f64; 2]; 4],
    /// Frobenius distance removed by the positivity projection, summed over branches.
    pub fit_residual: f64,
}

impl ReconstructionResult {
    pub fn pair(&self) -> ConditionalChannelPair {
        ConditionalChannelPair {
            e0: self.e0_hat.clone(),
            e1: self.e1_hat.clone(),
        }
    }
}

/// `(1, x, y, z)` rows of the input set; their span must be the full
/// operator space.
fn design_determinant() -> f64 {
    let rows: Vec<[f64; 4]> = InputState::ALL
        .iter()
        .map(|s| {
            let b = s.state().bloch();
            [1.0, b.x, b.y, b.z]
        })
        .collect();
    // Laplace expansion is fine at this size
    fn det3(m: [[f64; 3]; 3]) -> f64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
    (0..4)
        .map(|c| {
            let mut minor = [[0.0; 3]; 3];
            for r in 1..4 {
                let mut k = 0;
                for cc in 0..4 {
                    if cc != c {
                        minor[r - 1][k] = rows[r][cc];
                        k += 1;
                    }
                }
            }
            let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
            sign * rows[0][c] * det3(minor)
        })
        .sum()
}

fn expectation(n_plus: f64, n_minus: f64) -> f64 {
    let n = n_plus + n_minus;
    if n > 0.0 {
        (n_plus - n_minus) / n
    } else {
        0.0
    }
}

/// Linear-inversion reconstruction followed by [`cp_project`] on each branch.
pub fn reconstruct_channels(data: &TomographyDataset) -> Result<ReconstructionResult> {
    if design_determinant().abs() < 1e-12 {
        return Err(Error::IllConditioned(
            "input states do not span the operator space".into(),
        ));
    }
    data.validate()?;
    let per_setting = data.shots.map_or(1.0, |s| s as f64);

    // σ[k][j] = 𝓔_j(ρ_k), and the normalised state ρ̂(j|k)
    let mut sigma = [[Mat2::zeros(); 2]; 4];
    let mut probs = [[0.0; 2]; 4];
    let mut state_hats: Vec<Vec<Qubit>> = Vec::with_capacity(4);
    for input in InputState::ALL {
        let k = input.index();
        let mut row = Vec::with_capacity(2);
        for j in 0..2u8 {
            let mut bloch = [0.0; 3];
            let mut pooled = 0.0;
            for basis in Basis::ALL {
                let r = data.find(input, j, basis).ok_or_else(|| {
                    Error::IncompleteData(format!("missing {input:?}/{j}/{basis:?}"))
                })?;
                bloch[basis.index()] = expectation(r.n_plus, r.n_minus);
                pooled += r.n_plus + r.n_minus;
            }
            let p = pooled / (3.0 * per_setting);
            probs[k][j as usize] = p;
            let raw = BlochVector {
                x: bloch[0],
                y: bloch[1],
                z: bloch[2],
            };
            sigma[k][j as usize] = raw.to_matrix().scale(p);
            row.push(DensityMatrix::new(
                BlochVector::clipped(raw.x, raw.y, raw.z).to_matrix(),
            )?);
        }
        state_hats.push(row);
    }

    let half = C64::new(0.5, 0.0);
    let i = C64::new(0.0, 1.0);
    let mut fit_residual = 0.0;
    let mut channels = Vec::with_capacity(2);
    for j in 0..2 {
        let [s0, s1, sp, si] = [0, 1, 2, 3].map(|k| sigma[k][j]);
        let id_out = s0 + s1;
        // |0⟩⟨1| = |+⟩⟨+| + i|+i⟩⟨+i| − (1+i)/2 I, and its adjoint
        let e01 = sp + si.scale_c(i) - id_out.scale_c(half * (C64::new(1.0, 0.0) + i));
        let e10 = sp - si.scale_c(i) - id_out.scale_c(half * (C64::new(1.0, 0.0) - i));
        let blocks = [[s0, e01], [e10, s1]];
        let mut choi = Mat4::zeros();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        choi.data[2 * a + c][2 * b + d] = blocks[a][b].data[c][d];
                    }
                }
            }
        }
        let choi = choi.hermitian_part();
        let projected = cp_project(&choi)?;
        fit_residual += (projected - choi).frobenius_norm();
        channels.push(QuantumChannel::from_choi(projected)?);
    }
    let e1_hat = channels.pop().expect("two branches");
    let e0_hat = channels.pop().expect("two branches");
    let state_hats: [[Qubit; 2]; 4] = state_hats
        .into_iter()
        .map(|r| <[Qubit; 2]>::try_from(r).expect("two outcomes"))
        .collect::<Vec<_>>()
        .try_into()
        .expect("four inputs");
    Ok(ReconstructionResult {
        e0_hat,
        e1_hat,
        state_hats,
        branch_probabilities: probs,
        fit_residual,
    })
}

/// Counts `(n₊, n₋)` for one Pauli basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisCounts {
    pub basis: Basis,
    pub n_plus: f64,
    pub n_minus: f64,
}

/// `ρ̂ = (I + ⟨X⟩X + ⟨Y⟩Y + ⟨Z⟩Z)/2`, clipped into the Bloch ball.
pub fn reconstruct_state(counts: &[BasisCounts]) -> Result<Qubit> {
    let mut b = [None; 3];
    for c in counts {
        if !(c.n_plus >= 0.0 && c.n_minus >= 0.0) || c.n_plus + c.n_minus <= 0.0 {
            return Err(Error::IncompleteData(format!(
                "no usable counts for {:?}",
                c.basis
            )));
        }
        b[c.basis.index()] = Some(expectation(c.n_plus, c.n_minus));
    }
    match b {
        [Some(x), Some(y), Some(z)] => {
            DensityMatrix::new(BlochVector::clipped(x, y, z).to_matrix())
        }
        _ => Err(Error::IncompleteData(
            "state tomography needs X, Y and Z".into(),
        )),
    }
}

/// Samples `shots` Pauli measurements per basis of `rho`.
pub fn sample_state_counts(rho: &Qubit, shots: u64, seed: u64) -> Vec<BasisCounts> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Basis::ALL
        .iter()
        .map(|&basis| {
            let (pp, _) = basis.projectors();
            let p = (pp * *rho.matrix()).trace().re.clamp(0.0, 1.0);
            let n_plus = Binomial::new(shots, p)
                .expect("valid binomial")
                .sample(&mut rng);
            BasisCounts {
                basis,
                n_plus: n_plus as f64,
                n_minus: (shots - n_plus) as f64,
            }
        })
        .collect()
}

/// Exact `(⟨Π₊⟩, ⟨Π₋⟩)` per basis.
pub fn exact_state_counts(rho: &Qubit) -> Vec<BasisCounts> {
    Basis::ALL
        .iter()
        .map(|&basis| {
            let (pp, pm) = basis.projectors();
            BasisCounts {
                basis,
                n_plus: (pp * *rho.matrix()).trace().re,
                n_minus: (pm * *rho.matrix()).trace().re,
            }
        })
        .collect()
}

/// Largest Choi trace distance between corresponding branches.
pub fn pair_distance(a: &ConditionalChannelPair, b: &ConditionalChannelPair) -> Result<f64> {
    let d0 = crate::qmath::trace_distance(a.e0.choi(), b.e0.choi())?;
    let d1 = crate::qmath::trace_distance(a.e1.choi(), b.e1.choi())?;
    Ok(d0.max(d1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{channel_pair, NoiseModel, Route};
    use crate::ising::{transition_probabilities, IsingParams};
    use crate::qmath::{testutil::random_cptp, trace_distance};
    use rand::Rng;

    fn default_pair() -> ConditionalChannelPair {
        let g = transition_probabilities(&IsingParams::new(1.0, 0.3, 2.0).unwrap()).unwrap();
        channel_pair(&g, Route::Decomposed, &NoiseModel::default())
            .unwrap()
            .1
    }

    fn identity_pair() -> ConditionalChannelPair {
        // outcome 0 always, memory untouched
        ConditionalChannelPair {
            e0: QuantumChannel::identity(),
            e1: QuantumChannel::from_kraus(vec![Mat2::zeros()]),
        }
    }

    #[test]
    fn identity_channel_z_counts() {
        let d = generate_tomography_data(&identity_pair(), Some(1000), 4).unwrap();
        let r = d.find(InputState::Zero, 0, Basis::Z).unwrap();
        assert_eq!((r.n_plus, r.n_minus), (1000.0, 0.0));
        assert_eq!(d.records.len(), 24);
    }

    #[test]
    fn rejects_too_few_shots() {
        assert!(generate_tomography_data(&identity_pair(), Some(99), 0).is_err());
    }

    #[test]
    fn exact_mode_identity() {
        let d = generate_tomography_data(&identity_pair(), None, 0).unwrap();
        let r = reconstruct_channels(&d).unwrap();
        let want = QuantumChannel::identity();
        assert!(trace_distance(r.e0_hat.choi(), want.choi()).unwrap() < 1e-9);
        assert!(r.e1_hat.choi().frobenius_norm() < 1e-9);
    }

    #[test]
    fn exact_mode_amplitude_damping() {
        let g: f64 = 0.1;
        let k0 = Mat2::from_real([[1.0, 0.0], [0.0, (1.0 - g).sqrt()]]);
        let k1 = Mat2::from_real([[0.0, g.sqrt()], [0.0, 0.0]]);
        let mut want = Mat4::zeros();
        for k in [k0, k1] {
            // vec(K) with index 2a + c = K[c][a]
            let v: [C64; 4] = [k.data[0][0], k.data[1][0], k.data[0][1], k.data[1][1]];
            want = want + Mat4::outer(&v, &v);
        }
        let pair = ConditionalChannelPair {
            e0: QuantumChannel::from_kraus(vec![k0]),
            e1: QuantumChannel::from_kraus(vec![k1]),
        };
        let d = generate_tomography_data(&pair, None, 0).unwrap();
        let r = reconstruct_channels(&d).unwrap();
        let sum = *r.e0_hat.choi() + *r.e1_hat.choi();
        assert!(trace_distance(&sum, &want).unwrap() < 1e-9);
    }

    #[test]
    fn exact_mode_round_trip_random_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let full = random_cptp(&mut rng);
            let split: f64 = rng.random_range(0.1..0.9);
            // split the Kraus set into two trace-decreasing branches
            let e0 = QuantumChannel::from_kraus(
                full.kraus().iter().map(|k| k.scale(split.sqrt())).collect(),
            );
            let e1 = QuantumChannel::from_kraus(
                full.kraus()
                    .iter()
                    .map(|k| (Mat2::pauli_x() * *k).scale((1.0 - split).sqrt()))
                    .collect(),
            );
            let pair = ConditionalChannelPair { e0, e1 };
            let r =
                reconstruct_channels(&generate_tomography_data(&pair, None, 0).unwrap()).unwrap();
            assert!(pair_distance(&pair, &r.pair()).unwrap() < 1e-9);
        }
        let pair = default_pair();
        let r = reconstruct_channels(&generate_tomography_data(&pair, None, 0).unwrap()).unwrap();
        assert!(pair_distance(&pair, &r.pair()).unwrap() < 1e-9);
        assert!(r.fit_residual < 1e-9);
    }

    #[test]
    fn finite_shot_frequencies_within_five_sigma() {
        let pair = default_pair();
        let n = 100_000u64;
        let d = generate_tomography_data(&pair, Some(n), 21).unwrap();
        for input in InputState::ALL {
            for basis in Basis::ALL {
                let p = setting_probabilities(&pair, &input.state(), basis);
                for j in 0..2u8 {
                    let r = d.find(input, j, basis).unwrap();
                    for (k, c) in [(0, r.n_plus), (1, r.n_minus)] {
                        let q = p[2 * j as usize + k];
                        let sigma = (q * (1.0 - q) / n as f64).sqrt().max(1e-12);
                        assert!((c / n as f64 - q).abs() < 5.0 * sigma + 1e-12);
                    }
                    assert!(r.n_plus + r.n_minus <= n as f64);
                }
            }
        }
        assert_eq!(d, generate_tomography_data(&pair, Some(n), 21).unwrap());
    }

    #[test]
    fn finite_shot_accuracy() {
        let pair = default_pair();
        for seed in 0..20 {
            let d = generate_tomography_data(&pair, Some(DEFAULT_SHOTS), seed).unwrap();
            let r = reconstruct_channels(&d).unwrap();
            assert!(pair_distance(&pair, &r.pair()).unwrap() < 5e-2);
            assert!(r.pair().total().trace_preservation_defect() < 2e-2);
        }
    }

    #[test]
    fn error_scales_as_inverse_sqrt_shots() {
        let slope = shot_scaling_slope(&default_pair(), 10);
        assert!((slope + 0.5).abs() <= 0.15, "slope {slope}");
    }

    /// Least-squares slope of log(mean distance) vs log(shots).
    pub(crate) fn shot_scaling_slope(pair: &ConditionalChannelPair, seeds: u64) -> f64 {
        let shots = [1_000u64, 10_000, 100_000, 1_000_000];
        let pts: Vec<(f64, f64)> = shots
            .iter()
            .map(|&n| {
                let mean = (0..seeds)
                    .map(|s| {
                        let d = generate_tomography_data(pair, Some(n), 1000 + s).unwrap();
                        pair_distance(pair, &reconstruct_channels(&d).unwrap().pair()).unwrap()
                    })
                    .sum::<f64>()
                    / seeds as f64;
                ((n as f64).ln(), mean.ln())
            })
            .collect();
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn incomplete_dataset() {
        let mut d = generate_tomography_data(&identity_pair(), None, 0).unwrap();
        d.records.pop();
        assert!(matches!(
            reconstruct_channels(&d),
            Err(Error::IncompleteData(_))
        ));
        assert!(design_determinant().abs() > 0.1);
    }

    #[test]
    fn cp_project_examples() {
        let psd = *QuantumChannel::depolarizing(0.3).choi();
        assert!(cp_project(&psd).unwrap().max_abs_diff(&psd) < 1e-12);

        let bad = Mat4::diag([1.01, 0.5, 0.5, -0.01]);
        let out = cp_project(&bad).unwrap();
        let e = hermitian_eigensolve(&out).unwrap();
        assert!(e.values[3].abs() < 1e-12);
        assert!((out.trace().re - bad.trace().re).abs() < 1e-12);

        let huge = Mat4::diag([3.0, 0.0, 0.0, 0.0]);
        assert!((cp_project(&huge).unwrap().trace().re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cp_project_is_idempotent_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100 {
            let truth = *random_cptp(&mut rng).choi();
            let mut delta = Mat4::zeros();
            for r in 0..4 {
                for c in 0..4 {
                    delta.data[r][c] =
                        C64::new(rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05));
                }
            }
            let delta = delta.hermitian_part();
            let noisy = truth + delta;
            let p = cp_project(&noisy).unwrap();
            assert!(hermitian_eigensolve(&p).unwrap().values[3] > -1e-12);
            assert!(cp_project(&p).unwrap().max_abs_diff(&p) < 1e-12);
            let dn = trace_distance(&noisy, &truth).unwrap();
            let dp = trace_distance(&p, &truth).unwrap();
            // trace norm of the perturbation is twice its trace distance
            assert!(dp <= dn + 2.0 * dn + 1e-12, "{dp} vs {dn}");
        }
    }

    #[test]
    fn state_reconstruction() {
        let zero = DensityMatrix::from_pure(&crate::qmath::real_ket([1.0, 0.0])).unwrap();
        let r = reconstruct_state(&exact_state_counts(&zero)).unwrap();
        assert!(r.matrix().max_abs_diff(zero.matrix()) < 1e-12);

        let mixed = Qubit::maximally_mixed();
        let r = reconstruct_state(&exact_state_counts(&mixed)).unwrap();
        assert!(r.matrix().max_abs_diff(mixed.matrix()) < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..10 {
            let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let b = BlochVector::new(
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            )
            .unwrap();
            let rho = DensityMatrix::new(b.to_matrix()).unwrap();
            let est = reconstruct_state(&sample_state_counts(&rho, 100_000, seed)).unwrap();
            assert!(trace_distance(est.matrix(), rho.matrix()).unwrap() < 2e-2);
        }

        let partial = &exact_state_counts(&zero)[..2];
        assert!(matches!(
            reconstruct_state(partial),
            Err(Error::IncompleteData(_))
        ));
    }

    #[test]
    fn dataset_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tomo.json");
        let d = generate_tomography_data(&default_pair(), Some(1000), 3).unwrap();
        d.save_json(&path).unwrap();
        assert_eq!(TomographyDataset::load_json(&path).unwrap(), d);
        let text = std::fs::read_to_string(&path).unwrap();
        for key in [
            "\"input\"",
            "\"outcome\"",
            "\"basis\"",
            "\"n_plus\"",
            "\"n_minus\"",
            "\"shots\"",
            "\"seed\"",
        ] {
            assert!(text.contains(key), "{key}");
        }
    }
}

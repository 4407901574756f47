//! Two-state classical and quantum ε-machines of the Ising process.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{stationary_distribution, StationaryDistribution, TransitionMatrix};
use crate::qmath::{
    binary_entropy, inner, real_ket, von_neumann_entropy, DensityMatrix, Mat2, Qubit, Vector,
};

/// Classical ε-machine: transition structure plus its stationary
/// distribution over `{S₀, S₁}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalMachine {
    pub gamma: TransitionMatrix,
    pub p: StationaryDistribution,
}

impl ClassicalMachine {
    pub fn new(gamma: TransitionMatrix) -> Result<Self> {
        let p = stationary_distribution(&gamma)?;
        Ok(ClassicalMachine { gamma, p })
    }

    /// Memory cost in bits; zero for a single-state process.
    pub fn complexity(&self) -> f64 {
        if self.gamma.is_degenerate() {
            0.0
        } else {
            classical_complexity(&self.p)
        }
    }
}

/// `C_c = −Σ p_i log₂ p_i`
pub fn classical_complexity(p: &StationaryDistribution) -> f64 {
    binary_entropy(p.p0)
}

/// Quantum causal states `|S_i⟩ = √Γ_i0 |0⟩ + √Γ_i1 |1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumCausalStates {
    pub s0: Vector<2>,
    pub s1: Vector<2>,
}

impl QuantumCausalStates {
    pub fn state(&self, i: usize) -> Vector<2> {
        if i == 0 {
            self.s0
        } else {
            self.s1
        }
    }

    pub fn overlap(&self) -> f64 {
        inner(&self.s0, &self.s1).re
    }

    pub fn density(&self, i: usize) -> Qubit {
        DensityMatrix::from_pure(&self.state(i)).expect("causal states are normalized")
    }
}

pub fn quantum_causal_states(gamma: &TransitionMatrix) -> QuantumCausalStates {
    let g = gamma.entries();
    QuantumCausalStates {
        s0: real_ket([g[0][0].sqrt(), g[0][1].sqrt()]),
        s1: real_ket([g[1][0].sqrt(), g[1][1].sqrt()]),
    }
}

/// `ρ = p₀|S₀⟩⟨S₀| + p₁|S₁⟩⟨S₁|`
pub fn stationary_quantum_state(
    states: &QuantumCausalStates,
    p: &StationaryDistribution,
) -> Result<Qubit> {
    let m = Mat2::projector(&states.s0).scale(p.p0) + Mat2::projector(&states.s1).scale(p.p1);
    DensityMatrix::new(m)
}

/// `C_q = −Tr ρ log₂ ρ`
pub fn quantum_complexity(rho: &Qubit) -> f64 {
    von_neumann_entropy(rho)
}

/// Both complexities of the machine defined by `gamma`, applying the
/// single-state rule for coincident rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Complexities {
    pub c_c: f64,
    pub c_q: f64,
}

pub fn complexities(gamma: &TransitionMatrix) -> Result<Complexities> {
    if gamma.is_degenerate() {
        return Ok(Complexities { c_c: 0.0, c_q: 0.0 });
    }
    let machine = ClassicalMachine::new(*gamma)?;
    let rho = stationary_quantum_state(&quantum_causal_states(gamma), &machine.p)?;
    Ok(Complexities {
        c_c: machine.complexity(),
        c_q: quantum_complexity(&rho),
    })
}

pub const MAX_EXCESS_WINDOW: usize = 16;

/// Finite-window mutual information `E_L = I(X₀; X₁ … X_L)` in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcessEntropyEstimate {
    pub window: usize,
    pub value: f64,
    /// `E_1, …, E_L`
    pub sequence: Vec<f64>,
}

impl ExcessEntropyEstimate {
    /// `E_L − E_{L−1}`; zero for a single window.
    pub fn convergence_gap(&self) -> f64 {
        match self.sequence.len() {
            0 | 1 => 0.0,
            n => self.sequence[n - 1] - self.sequence[n - 2],
        }
    }
}

/// Exact enumeration over all `2^{L+1}` words of the stationary chain.
pub fn excess_entropy(
    gamma: &TransitionMatrix,
    p: &StationaryDistribution,
    window: usize,
) -> Result<ExcessEntropyEstimate> {
    if window == 0 {
        return Err(Error::InvalidParams(
            "excess-entropy window must be ≥ 1".into(),
        ));
    }
    if window > MAX_EXCESS_WINDOW {
        return Err(Error::TooLarge(format!(
            "window {window} exceeds {MAX_EXCESS_WINDOW}"
        )));
    }
    let g = gamma.entries();
    let p0 = p.as_array();
    let plogp = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    let mut sequence = Vec::with_capacity(window);
    for l in 1..=window {
        // I(X₀; F) = H(F) − H(F | X₀), F = X₁…X_l
        let mut h_future = 0.0;
        let mut h_cond = 0.0;
        for word in 0u32..(1u32 << l) {
            let mut joint = [p0[0], p0[1]];
            for (start, jp) in joint.iter_mut().enumerate() {
                let mut prev = start;
                for k in 0..l {
                    let sym = ((word >> k) & 1) as usize;
                    *jp *= g[prev][sym];
                    prev = sym;
                }
            }
            h_future += plogp(joint[0] + joint[1]);
            for x0 in 0..2 {
                if p0[x0] > 0.0 {
                    h_cond += p0[x0] * plogp(joint[x0] / p0[x0]);
                }
            }
        }
        sequence.push((h_future - h_cond).max(0.0));
    }
    Ok(ExcessEntropyEstimate {
        window,
        value: *sequence.last().expect("window ≥ 1"),
        sequence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{transition_probabilities, IsingParams};
    use crate::qmath::{hermitian_eigensolve, testutil::random_unitary2};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gamma(b: f64, t: f64) -> TransitionMatrix {
        transition_probabilities(&IsingParams::new(1.0, b, t).unwrap()).unwrap()
    }

    #[test]
    fn classical_complexity_examples() {
        let uniform = StationaryDistribution { p0: 0.5, p1: 0.5 };
        assert_eq!(classical_complexity(&uniform), 1.0);
        let det = StationaryDistribution { p0: 1.0, p1: 0.0 };
        assert_eq!(classical_complexity(&det), 0.0);

        let g = gamma(0.3, 2.0);
        let m = ClassicalMachine::new(g).unwrap();
        let p0 = m.p.p0;
        let h = -(p0 * p0.ln() + (1.0 - p0) * (1.0 - p0).ln()) / std::f64::consts::LN_2;
        assert!((m.complexity() - h).abs() < 1e-14);
    }

    #[test]
    fn degenerate_machine_has_zero_complexity() {
        let c = complexities(&TransitionMatrix::uniform()).unwrap();
        assert_eq!(c, Complexities { c_c: 0.0, c_q: 0.0 });
        let hot = complexities(&gamma(0.3, 1e12)).unwrap();
        assert_eq!(hot.c_c, 0.0);
    }

    #[test]
    fn causal_state_examples() {
        let id = quantum_causal_states(&TransitionMatrix::identity());
        assert_eq!(id.overlap(), 0.0);
        let half = quantum_causal_states(&TransitionMatrix::uniform());
        assert!((half.overlap() - 1.0).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((half.s0[0].re - h).abs() < 1e-15 && (half.s1[1].re - h).abs() < 1e-15);

        let g = gamma(0.0, 2.0);
        let a = g.get(0, 0);
        let s = quantum_causal_states(&g);
        assert!((s.overlap() - 2.0 * (a * (1.0 - a)).sqrt()).abs() < 1e-12);
        assert!((s.overlap() - 0.8868).abs() < 1e-4);
    }

    #[test]
    fn stationary_state_examples() {
        let id = quantum_causal_states(&TransitionMatrix::identity());
        let rho =
            stationary_quantum_state(&id, &StationaryDistribution { p0: 0.5, p1: 0.5 }).unwrap();
        assert!(rho.matrix().max_abs_diff(Qubit::maximally_mixed().matrix()) < 1e-15);

        let same = quantum_causal_states(&TransitionMatrix::uniform());
        let rho =
            stationary_quantum_state(&same, &StationaryDistribution { p0: 0.3, p1: 0.7 }).unwrap();
        assert!(quantum_complexity(&rho) < 1e-10);

        let g = gamma(0.0, 2.0);
        let a = g.get(0, 0);
        let c = (a * (1.0 - a)).sqrt();
        let m = ClassicalMachine::new(g).unwrap();
        let rho = stationary_quantum_state(&quantum_causal_states(&g), &m.p).unwrap();
        let want = Mat2::from_real([[0.5, c], [c, 0.5]]);
        assert!(rho.matrix().max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn zero_field_quantum_complexity() {
        let g = gamma(0.0, 2.0);
        let a = g.get(0, 0);
        let c = complexities(&g).unwrap();
        let lo = 0.5 - (a * (1.0 - a)).sqrt();
        let want = binary_entropy(lo);
        assert!((c.c_q - want).abs() < 1e-12);
        assert!((c.c_q - 0.3137).abs() < 1e-4);
        assert!((c.c_c - 1.0).abs() < 1e-12);
        let rho = DensityMatrix::new(Mat2::from_real([[0.5, 0.5 - lo], [0.5 - lo, 0.5]])).unwrap();
        assert!((quantum_complexity(&rho) - c.c_q).abs() < 1e-12);
        assert!(quantum_complexity(&Qubit::maximally_mixed()) == 1.0);
    }

    #[test]
    fn excess_entropy_examples() {
        let hot = gamma(0.3, 1e9);
        let p = stationary_distribution(&hot).unwrap();
        let e = excess_entropy(&hot, &p, 6).unwrap();
        assert!(e.sequence.iter().all(|x| x.abs() < 1e-10));

        let frozen = excess_entropy(
            &TransitionMatrix::identity(),
            &StationaryDistribution { p0: 0.5, p1: 0.5 },
            8,
        )
        .unwrap();
        assert!(frozen.sequence.iter().all(|x| (x - 1.0).abs() < 1e-12));

        let g = gamma(0.3, 2.0);
        let p = stationary_distribution(&g).unwrap();
        let e = excess_entropy(&g, &p, 12).unwrap();
        for w in e.sequence.windows(2) {
            assert!(w[1] >= w[0] - 1e-10);
        }
        assert!(e.sequence[11] - e.sequence[10] < 1e-4);
        assert!(e.convergence_gap() < 1e-4);
        let c = complexities(&g).unwrap();
        assert!(e.value <= c.c_q + 1e-8 && c.c_q <= c.c_c + 1e-8);

        assert!(matches!(
            excess_entropy(&g, &p, 17),
            Err(Error::TooLarge(_))
        ));
        assert!(excess_entropy(&g, &p, 0).is_err());
    }

    #[test]
    fn quantum_complexity_is_basis_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 0..50 {
            let g = gamma(0.3, 0.5 + k as f64 * 0.2);
            let m = ClassicalMachine::new(g).unwrap();
            let rho = stationary_quantum_state(&quantum_causal_states(&g), &m.p).unwrap();
            let u = random_unitary2(&mut rng);
            let rotated = DensityMatrix::new(u.conjugate(rho.matrix()).hermitian_part()).unwrap();
            assert!((quantum_complexity(&rho) - quantum_complexity(&rotated)).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn overlap_identity(g01 in 0.0f64..1.0, g10 in 0.0f64..1.0) {
            let g = TransitionMatrix::from_off_diagonal(g01, g10).unwrap();
            let s = quantum_causal_states(&g);
            let want = (g.get(0, 0) * g.get(1, 0)).sqrt() + (g.get(0, 1) * g.get(1, 1)).sqrt();
            prop_assert!((s.overlap() - want).abs() < 1e-12);
            prop_assert!((crate::qmath::norm(&s.s0) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn quantum_never_exceeds_classical(g01 in 0.05f64..0.95, g10 in 0.05f64..0.95) {
            let g = TransitionMatrix::from_off_diagonal(g01, g10).unwrap();
            prop_assume!(!g.is_degenerate());
            let c = complexities(&g).unwrap();
            let overlap = quantum_causal_states(&g).overlap();
            prop_assert!(c.c_q <= c.c_c + 1e-8);
            if overlap > 0.0 && overlap < 1.0 {
                prop_assert!(c.c_q < c.c_c - 1e-6);
            }
            let p = stationary_distribution(&g).unwrap();
            let e = excess_entropy(&g, &p, 4).unwrap();
            prop_assert!(e.value <= c.c_q + 1e-8);
            let ev = hermitian_eigensolve(
                stationary_quantum_state(&quantum_causal_states(&g), &p).unwrap().matrix(),
            ).unwrap();
            prop_assert!(ev.values[1] >= -1e-12);
        }
    }
}

//! Nearest-neighbour Ising chain statistics.
//!
//! Spin `x = +1` maps to causal-state index 0 and `x = −1` to index 1, so for
//! `B > 0` the field-aligned state is `S₀`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_indexed, Exec};

/// Spin value carried by causal-state index `i`.
pub const fn spin(index: usize) -> f64 {
    if index == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Coupling `j`, field `b` and temperature `t` (units with `k_B = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    pub j: f64,
    pub b: f64,
    pub t: f64,
}

impl IsingParams {
    pub fn new(j: f64, b: f64, t: f64) -> Result<Self> {
        let p = IsingParams { j, b, t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::InvalidParams(format!(
                "temperature must be positive and finite, got {}",
                self.t
            )));
        }
        if self.j == 0.0 || !self.j.is_finite() || !self.b.is_finite() {
            return Err(Error::InvalidParams(format!(
                "need finite J ≠ 0 and finite B, got J = {}, B = {}",
                self.j, self.b
            )));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.t
    }
}

pub const ROW_SUM_TOL: f64 = 1e-12;
/// Rows closer than this are a single causal state.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Row-stochastic `Γ_ij = P(emit j, move to S_j | S_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    gamma: [[f64; 2]; 2],
}

impl TransitionMatrix {
    pub fn new(gamma: [[f64; 2]; 2]) -> Result<Self> {
        for row in &gamma {
            for &g in row {
                if !(0.0..=1.0).contains(&g) {
                    return Err(Error::InvalidParams(format!("Γ entry {g} outside [0, 1]")));
                }
            }
            let s = row[0] + row[1];
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidParams(format!("Γ row sums to {s}")));
            }
        }
        Ok(TransitionMatrix { gamma })
    }

    /// Builds `Γ` from its off-diagonal entries `Γ₀₁` and `Γ₁₀`.
    pub fn from_off_diagonal(g01: f64, g10: f64) -> Result<Self> {
        Self::new([[1.0 - g01, g01], [g10, 1.0 - g10]])
    }

    pub fn uniform() -> Self {
        TransitionMatrix {
            gamma: [[0.5, 0.5], [0.5, 0.5]],
        }
    }

    pub fn identity() -> Self {
        TransitionMatrix {
            gamma: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.gamma[i][j]
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.gamma
    }

    /// True when both rows coincide, i.e. the process has one causal state.
    pub fn is_degenerate(&self) -> bool {
        (self.gamma[0][0] - self.gamma[1][0]).abs() < DEGENERACY_TOL
    }

    pub fn max_abs_diff(&self, other: &TransitionMatrix) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.gamma[i][j] - other.gamma[i][j]).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub p0: f64,
    pub p1: f64,
}

impl StationaryDistribution {
    pub fn as_array(&self) -> [f64; 2] {
        [self.p0, self.p1]
    }
}

/// `V[x, x′] = exp(β(J x x′ + B (x + x′)/2))`, rescaled by a common positive
/// factor so that the largest entry is 1 (Γ is invariant under the scale).
pub fn transfer_matrix(params: &IsingParams) -> Result<[[f64; 2]; 2]> {
    params.validate()?;
    let beta = params.beta();
    let mut expo = [[0.0; 2]; 2];
    let mut max = f64::NEG_INFINITY;
    for (r, row) in expo.iter_mut().enumerate() {
        for (c, e) in row.iter_mut().enumerate() {
            let (x, y) = (spin(r), spin(c));
            *e = beta * (params.j * x * y + params.b * (x + y) / 2.0);
            max = max.max(*e);
        }
    }
    Ok(expo.map(|row| row.map(|e| (e - max).exp())))
}

/// Unscaled transfer matrix; may overflow for very small `T`.
pub fn transfer_matrix_unscaled(params: &IsingParams) -> Result<[[f64; 2]; 2]> {
    params.validate()?;
    let beta = params.beta();
    let mut v = [[0.0; 2]; 2];
    for (r, row) in v.iter_mut().enumerate() {
        for (c, e) in row.iter_mut().enumerate() {
            let (x, y) = (spin(r), spin(c));
            *e = (beta * (params.j * x * y + params.b * (x + y) / 2.0)).exp();
        }
    }
    Ok(v)
}

/// Dominant eigenvalue of a symmetric positive 2×2 matrix.
fn perron_value(v: &[[f64; 2]; 2]) -> f64 {
    let (a, b, d) = (v[0][0], v[0][1], v[1][1]);
    0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b * b).sqrt()
}

/// `Γ_ij = V_ij φ_j / (λ φ_i)` from the Perron eigenpair `(λ, φ)` of the
/// transfer matrix.
///
/// The Perron ratio `φ₁/φ₀` equals `b/(λ − d) = (λ − a)/b`; substituting it
/// gives each entry without dividing by a component of `φ` that may
/// underflow at low temperature.
pub fn transition_probabilities(params: &IsingParams) -> Result<TransitionMatrix> {
    let v = transfer_matrix(params)?;
    let (a, b, d) = (v[0][0], v[0][1], v[1][1]);
    let lambda = perron_value(&v);
    let gamma = if a >= d {
        let gap = lambda - d;
        [
            [a / lambda, b * b / (lambda * gap)],
            [gap / lambda, d / lambda],
        ]
    } else {
        let gap = lambda - a;
        [
            [a / lambda, gap / lambda],
            [b * b / (lambda * gap), d / lambda],
        ]
    };
    TransitionMatrix::new(gamma.map(|row| {
        let s = row[0] + row[1];
        [row[0] / s, row[1] / s]
    }))
}

pub fn stationary_distribution(gamma: &TransitionMatrix) -> Result<StationaryDistribution> {
    let (g01, g10) = (gamma.get(0, 1), gamma.get(1, 0));
    if g01 + g10 <= 0.0 {
        return Err(Error::Degenerate(
            "Γ₀₁ = Γ₁₀ = 0: both states absorbing, no unique stationary distribution".into(),
        ));
    }
    let p0 = g10 / (g10 + g01);
    Ok(StationaryDistribution { p0, p1: 1.0 - p0 })
}

pub const MIN_CHAIN: usize = 8;
pub const MAX_CHAIN: usize = 28;

/// Counts of all `2^L` open-chain configurations, binned by bond sum
/// `Σ x_k x_{k+1}`, magnetisation `Σ x_k`, and the spin pair on the
/// conditioning bond `(0, 1)`.
#[derive(Debug, Clone)]
pub struct ChainHistogram {
    length: usize,
    counts: Vec<u64>,
}

impl ChainHistogram {
    fn bins(length: usize) -> (usize, usize) {
        (2 * length - 1, 2 * length + 1)
    }

    fn slot(length: usize, bond_sum: i32, mag: i32, pair: usize) -> usize {
        let (_, nm) = Self::bins(length);
        let bs = (bond_sum + length as i32 - 1) as usize;
        let ms = (mag + length as i32) as usize;
        (bs * nm + ms) * 4 + pair
    }

    /// Enumerates every configuration; the top bits are split into
    /// independent chunks, each walked in Gray-code order.
    pub fn enumerate(length: usize, exec: Exec) -> Result<Self> {
        if length < MIN_CHAIN {
            return Err(Error::InvalidParams(format!(
                "chain length {length} below minimum {MIN_CHAIN}"
            )));
        }
        if length > MAX_CHAIN {
            return Err(Error::TooLarge(format!(
                "2^{length} configurations exceeds the 2^{MAX_CHAIN} enumeration bound"
            )));
        }
        let (nb, nm) = Self::bins(length);
        let size = nb * nm * 4;
        let top_bits = 6.min(length - 2);
        let low_bits = length - top_bits;
        let chunks = map_indexed(exec, 1 << top_bits, |chunk| {
            let mut counts = vec![0u64; size];
            let mut spins: Vec<i32> = (0..length).map(|_| 1).collect();
            for k in 0..top_bits {
                if (chunk >> k) & 1 == 1 {
                    spins[low_bits + k] = -1;
                }
            }
            let mut bond: i32 = spins.windows(2).map(|w| w[0] * w[1]).sum();
            let mut mag: i32 = spins.iter().sum();
            let pair = |s: &[i32]| ((s[0] < 0) as usize) * 2 + (s[1] < 0) as usize;
            counts[Self::slot(length, bond, mag, pair(&spins))] += 1;
            for g in 1u64..(1u64 << low_bits) {
                let k = g.trailing_zeros() as usize;
                let old = spins[k];
                let mut delta = 0;
                if k > 0 {
                    delta += spins[k - 1] * old;
                }
                if k + 1 < length {
                    delta += spins[k + 1] * old;
                }
                spins[k] = -old;
                bond -= 2 * delta;
                mag -= 2 * old;
                counts[Self::slot(length, bond, mag, pair(&spins))] += 1;
            }
            counts
        });
        let mut counts = vec![0u64; size];
        for c in chunks {
            for (acc, x) in counts.iter_mut().zip(c) {
                *acc += x;
            }
        }
        Ok(ChainHistogram { length, counts })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Boltzmann-weighted conditional `P(x₁ | x₀)` with `H` summed over every
    /// bond and every site.
    pub fn gamma(&self, params: &IsingParams) -> Result<TransitionMatrix> {
        params.validate()?;
        let l = self.length as i32;
        let beta = params.beta();
        // log-weight of a bin is β(J·bond + B·mag); shift by its maximum
        let shift = beta * (params.j.abs() * (l - 1) as f64 + params.b.abs() * l as f64);
        let (nb, nm) = Self::bins(self.length);
        let mut z = [[0.0f64; 2]; 2];
        for bs in 0..nb {
            let bond = bs as i32 - (l - 1);
            for ms in 0..nm {
                let mag = ms as i32 - l;
                let base = (bs * nm + ms) * 4;
                if self.counts[base..base + 4].iter().all(|&c| c == 0) {
                    continue;
                }
                let w = (beta * (params.j * bond as f64 + params.b * mag as f64) - shift).exp();
                for pair in 0..4 {
                    z[pair / 2][pair % 2] += self.counts[base + pair] as f64 * w;
                }
            }
        }
        let rows = z.map(|row| {
            let s = row[0] + row[1];
            [row[0] / s, row[1] / s]
        });
        TransitionMatrix::new(rows)
    }
}

/// Literal Boltzmann enumeration of an open chain of `chain_length` spins,
/// conditioned on the leftmost bond.
///
/// The forward conditional `P(x_{k+1} | x_k)` of an open chain depends only on
/// the spins to the right of `k`, so the leftmost bond has the longest tail
/// and converges fastest in the chain length.
pub fn brute_force_gamma(params: &IsingParams, chain_length: usize) -> Result<TransitionMatrix> {
    brute_force_gamma_with(params, chain_length, Exec::default())
}

pub fn brute_force_gamma_with(
    params: &IsingParams,
    chain_length: usize,
    exec: Exec,
) -> Result<TransitionMatrix> {
    params.validate()?;
    ChainHistogram::enumerate(chain_length, exec)?.gamma(params)
}

/// Result of mapping an observed `Γ` back to Ising parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inversion {
    pub t: f64,
    pub b: f64,
    /// Euclidean norm of the `(Γ₀₁, Γ₁₀)` mismatch at the solution.
    pub residual: f64,
}

pub const INVERSION_EXACT_TOL: f64 = 1e-9;
pub const INVERSION_ACHIEVABLE_TOL: f64 = 1e-4;
const NEWTON_MAX_ITERS: usize = 200;
const RESTARTS: usize = 64;
const LOG_T_RANGE: (f64, f64) = (-6.9, 13.8);

/// Closed-form `(T, B)` for a strictly positive `Γ` with fixed `J`:
/// `Γ₀₀Γ₁₁/(Γ₀₁Γ₁₀) = e^{4βJ}` and `Γ₀₀/Γ₁₁ = e^{2βB}`.
/// Returns `None` when the implied `β` is not positive.
pub fn closed_form_parameters(gamma: &TransitionMatrix, j: f64) -> Option<(f64, f64)> {
    let g = gamma.entries();
    let ratio = (g[0][0] * g[1][1]) / (g[0][1] * g[1][0]);
    let beta = ratio.ln() / (4.0 * j);
    if !(beta > 0.0) || !beta.is_finite() {
        return None;
    }
    let b = (g[0][0] / g[1][1]).ln() / (2.0 * beta);
    b.is_finite().then_some((1.0 / beta, b))
}

fn off_diag_at(log_t: f64, b: f64, j: f64) -> Option<[f64; 2]> {
    let p = IsingParams::new(j, b, log_t.exp()).ok()?;
    let g = transition_probabilities(&p).ok()?;
    Some([g.get(0, 1), g.get(1, 0)])
}

struct Fit {
    log_t: f64,
    b: f64,
    residual: f64,
    converged: bool,
}

/// Levenberg-damped Gauss–Newton on `(log T, B)`.
fn damped_newton(start: (f64, f64), target: [f64; 2], j: f64) -> Option<Fit> {
    let resid = |lt: f64, b: f64| -> Option<[f64; 2]> {
        let g = off_diag_at(lt, b, j)?;
        Some([g[0] - target[0], g[1] - target[1]])
    };
    let norm = |r: [f64; 2]| (r[0] * r[0] + r[1] * r[1]).sqrt();
    let (mut lt, mut b) = start;
    let mut r = resid(lt, b)?;
    let mut mu = 1e-6;
    for _ in 0..NEWTON_MAX_ITERS {
        if norm(r) < 1e-15 {
            return Some(Fit {
                log_t: lt,
                b,
                residual: norm(r),
                converged: true,
            });
        }
        let h = 1e-6;
        let dlt = {
            let (a, c) = (resid(lt + h, b)?, resid(lt - h, b)?);
            [(a[0] - c[0]) / (2.0 * h), (a[1] - c[1]) / (2.0 * h)]
        };
        let db = {
            let (a, c) = (resid(lt, b + h)?, resid(lt, b - h)?);
            [(a[0] - c[0]) / (2.0 * h), (a[1] - c[1]) / (2.0 * h)]
        };
        // normal equations (JᵀJ + μ diag) δ = −Jᵀ r
        let jtj = [
            [
                dlt[0] * dlt[0] + dlt[1] * dlt[1],
                dlt[0] * db[0] + dlt[1] * db[1],
            ],
            [
                dlt[0] * db[0] + dlt[1] * db[1],
                db[0] * db[0] + db[1] * db[1],
            ],
        ];
        let jtr = [dlt[0] * r[0] + dlt[1] * r[1], db[0] * r[0] + db[1] * r[1]];
        let mut improved = false;
        for _ in 0..30 {
            let a = [
                [jtj[0][0] * (1.0 + mu), jtj[0][1]],
                [jtj[1][0], jtj[1][1] * (1.0 + mu)],
            ];
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            if det.abs() < 1e-300 {
                mu *= 10.0;
                continue;
            }
            let step = [
                -(a[1][1] * jtr[0] - a[0][1] * jtr[1]) / det,
                -(-a[1][0] * jtr[0] + a[0][0] * jtr[1]) / det,
            ];
            let nlt = (lt + step[0]).clamp(LOG_T_RANGE.0, LOG_T_RANGE.1);
            let nb = b + step[1];
            if let Some(nr) = resid(nlt, nb) {
                if norm(nr) < norm(r) {
                    let small = (nlt - lt).abs() < 1e-14 && (nb - b).abs() < 1e-14;
                    lt = nlt;
                    b = nb;
                    r = nr;
                    mu = (mu / 10.0).max(1e-12);
                    improved = true;
                    if small {
                        return Some(Fit {
                            log_t: lt,
                            b,
                            residual: norm(r),
                            converged: true,
                        });
                    }
                    break;
                }
            }
            mu *= 10.0;
        }
        if !improved {
            // no descent direction left: a local least-squares minimum
            return Some(Fit {
                log_t: lt,
                b,
                residual: norm(r),
                converged: true,
            });
        }
    }
    Some(Fit {
        log_t: lt,
        b,
        residual: norm(r),
        converged: norm(r) < INVERSION_EXACT_TOL,
    })
}

/// Finds `(T, B)` whose transition matrix matches `gamma` at coupling `j`.
///
/// `hint` is the starting point when the closed form is unavailable (for
/// example the nominal sweep parameters).
pub fn invert_parameters(
    gamma: &TransitionMatrix,
    j: f64,
    hint: Option<(f64, f64)>,
) -> Result<Inversion> {
    let g = gamma.entries();
    if g.iter().flatten().any(|&x| x <= 0.0 || x >= 1.0) {
        return Err(Error::InvalidParams(
            "Γ must lie strictly inside the simplex for inversion".into(),
        ));
    }
    if j == 0.0 || !j.is_finite() {
        return Err(Error::InvalidParams(format!(
            "coupling must be non-zero, got {j}"
        )));
    }
    let target = [g[0][1], g[1][0]];
    let mut starts: Vec<(f64, f64)> = Vec::new();
    if let Some((t, b)) = closed_form_parameters(gamma, j) {
        starts.push((t.ln().clamp(LOG_T_RANGE.0, LOG_T_RANGE.1), b));
    }
    if let Some((t, b)) = hint {
        if t > 0.0 {
            starts.push((t.ln(), b));
        }
    }
    starts.push((0.0, 0.0));

    let mut best: Option<Fit> = None;
    let consider = |fit: Fit, best: &mut Option<Fit>| {
        if best.as_ref().is_none_or(|b| fit.residual < b.residual) {
            *best = Some(fit);
        }
    };
    for s in &starts {
        if let Some(fit) = damped_newton(*s, target, j) {
            let done = fit.converged && fit.residual < INVERSION_EXACT_TOL;
            consider(fit, &mut best);
            if done {
                break;
            }
        }
    }
    if best
        .as_ref()
        .is_none_or(|b| b.residual >= INVERSION_EXACT_TOL)
    {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1517);
        for _ in 0..RESTARTS {
            let s = (
                rng.random_range(-3.0..4.0f64),
                rng.random_range(-2.0..2.0f64),
            );
            if let Some(fit) = damped_newton(s, target, j) {
                consider(fit, &mut best);
            }
            if best
                .as_ref()
                .is_some_and(|b| b.residual < INVERSION_EXACT_TOL)
            {
                break;
            }
        }
    }
    let best =
        best.ok_or_else(|| Error::NoConvergence("inversion produced no candidate".into()))?;
    if best.residual > INVERSION_ACHIEVABLE_TOL {
        return Err(Error::NotAchievable {
            residual: best.residual,
        });
    }
    if !best.converged {
        return Err(Error::NoConvergence(format!(
            "inversion iteration budget exhausted at residual {:.3e}",
            best.residual
        )));
    }
    Ok(Inversion {
        t: best.log_t.exp(),
        b: best.b,
        residual: best.residual,
    })
}

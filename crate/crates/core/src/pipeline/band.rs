use serde::{Deserialize, Serialize};

use super::SweepRecord;
use crate::error::{Error, Result};
use crate::ising::{transition_probabilities, IsingParams};
use crate::machine::complexities;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub t: f64,
    pub c_q_low: f64,
    pub c_q_mid: f64,
    pub c_q_high: f64,
}

impl BandPoint {
    pub fn width(&self) -> f64 {
        self.c_q_high - self.c_q_low
    }

    pub fn contains(&self, c_q: f64) -> bool {
        self.c_q_low <= c_q && c_q <= self.c_q_high
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryBand {
    pub intercept: f64,
    pub slope: f64,
    /// Residual standard deviation of the fit (`n − 2` degrees of freedom).
    pub sigma: f64,
    pub points: Vec<BandPoint>,
}

fn c_q_at(j: f64, b: f64, t: f64) -> Result<f64> {
    let g = transition_probabilities(&IsingParams::new(j, b, t)?)?;
    Ok(complexities(&g)?.c_q)
}

/// Linear fit `B^m(T^m)` with a `±σ` band, mapped through `C_q(B, T)` at
/// each record's `T^m`.
pub fn theory_band(records: &[SweepRecord], j: f64) -> Result<TheoryBand> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| Some((r.t_m?, r.b_m?)))
        .filter(|(t, b)| t.is_finite() && b.is_finite())
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "theory band needs 3 records with inverted parameters, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mb = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let stb: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mb)).sum();
    if stt <= 0.0 {
        return Err(Error::InsufficientData("all T^m values coincide".into()));
    }
    let slope = stb / stt;
    let intercept = mb - slope * mt;
    let ssr: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let sigma = (ssr / (n - 2.0)).sqrt();

    let mut ts: Vec<f64> = pts.iter().map(|p| p.0).collect();
    ts.sort_by(f64::total_cmp);
    let points = ts
        .into_iter()
        .map(|t| {
            let mid_b = intercept + slope * t;
            let mid = c_q_at(j, mid_b, t)?;
            let lo = c_q_at(j, mid_b - sigma, t)?;
            let hi = c_q_at(j, mid_b + sigma, t)?;
            Ok(BandPoint {
                t,
                c_q_low: lo.min(hi).min(mid),
                c_q_mid: mid,
                c_q_high: lo.max(hi).max(mid),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TheoryBand {
        intercept,
        slope,
        sigma,
        points,
    })
}

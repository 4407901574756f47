use serde::{Deserialize, Serialize};

use super::SweepRecord;
use crate::ising::{transition_probabilities, IsingParams};
use crate::machine::complexities;

/// Classical differences below this leave `K` undefined.
pub const UNDEFINED_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyCell {
    pub t1: f64,
    pub t2: f64,
    pub r: Option<f64>,
    pub k: Option<f64>,
}

/// `r = ΔC_q / ΔC_c` and `K = sign(r)·min(|r|, 1/|r|)`.
pub fn consistency(c_c1: f64, c_q1: f64, c_c2: f64, c_q2: f64) -> (Option<f64>, Option<f64>) {
    let dc = c_c1 - c_c2;
    // NaN inputs also land here
    if !(dc.abs() >= UNDEFINED_TOL) {
        return (None, None);
    }
    let r = (c_q1 - c_q2) / dc;
    if !r.is_finite() {
        return (None, None);
    }
    let k = if r == 0.0 {
        0.0
    } else {
        r.signum() * r.abs().min(1.0 / r.abs())
    };
    (Some(r), Some(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    #[default]
    Theory,
    M,
    S,
}

impl Source {
    pub const ALL: [Source; 3] = [Source::Theory, Source::M, Source::S];

    pub fn name(self) -> &'static str {
        match self {
            Source::Theory => "theory",
            Source::M => "m",
            Source::S => "s",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "theory" => Some(Source::Theory),
            "m" => Some(Source::M),
            "s" => Some(Source::S),
            _ => None,
        }
    }
}

/// `(C_c, C_q)` of a record for the given source. For the `m` and `s`
/// sources the classical complexity is that of the Ising machine at the
/// inverted `(T, B)`.
pub fn source_complexities(rec: &SweepRecord, source: Source) -> Option<(f64, f64)> {
    let classical_at = |t: Option<f64>, b: Option<f64>| {
        let p = IsingParams::new(rec.j, b?, t?).ok()?;
        let g = transition_probabilities(&p).ok()?;
        complexities(&g).ok().map(|c| c.c_c)
    };
    match source {
        Source::Theory => Some((rec.c_c?, rec.c_q?)),
        Source::M => Some((classical_at(rec.t_m, rec.b_m)?, rec.c_q_m?)),
        Source::S => Some((classical_at(rec.t_s, rec.b_s)?, rec.c_q_s?)),
    }
}

/// Full `n × n` map over the records, row `a`, column `b` comparing
/// `t_a` against `t_b`; cells are labelled by nominal temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityMap {
    pub source: Source,
    pub temperatures: Vec<f64>,
    pub cells: Vec<Vec<ConsistencyCell>>,
}

impl AmbiguityMap {
    pub fn len(&self) -> usize {
        self.temperatures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temperatures.is_empty()
    }

    pub fn cell(&self, a: usize, b: usize) -> &ConsistencyCell {
        &self.cells[a][b]
    }

    /// Cells with `t1 < t2`, in row-major order.
    pub fn upper(&self) -> impl Iterator<Item = &ConsistencyCell> {
        self.cells
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.iter().skip(a + 1))
    }

    pub fn has_negative(&self) -> bool {
        self.upper().any(|c| c.k.is_some_and(|k| k < 0.0))
    }

    pub fn has_positive(&self) -> bool {
        self.upper().any(|c| c.k.is_some_and(|k| k > 0.0))
    }
}

pub fn ambiguity_map(records: &[SweepRecord], source: Source) -> AmbiguityMap {
    let values: Vec<Option<(f64, f64)>> = records
        .iter()
        .map(|r| source_complexities(r, source))
        .collect();
    let temperatures: Vec<f64> = records.iter().map(|r| r.t_nominal).collect();
    let cells = (0..records.len())
        .map(|a| {
            (0..records.len())
                .map(|b| {
                    let (r, k) = match (a == b, values[a], values[b]) {
                        (false, Some((cc1, cq1)), Some((cc2, cq2))) => {
                            consistency(cc1, cq1, cc2, cq2)
                        }
                        _ => (None, None),
                    };
                    ConsistencyCell {
                        t1: temperatures[a],
                        t2: temperatures[b],
                        r,
                        k,
                    }
                })
                .collect()
        })
        .collect();
    AmbiguityMap {
        source,
        temperatures,
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let (_, k) = consistency(0.9, 0.4, 0.7, 0.2);
        assert!((k.unwrap() - 1.0).abs() < 1e-12);
        let (_, k) = consistency(0.9, 0.2, 0.7, 0.4);
        assert!(k.unwrap() < 0.0);
        assert_eq!(consistency(0.7, 0.1, 0.7, 0.3), (None, None));
        assert_eq!(consistency(0.9, 0.3, 0.7, 0.3), (Some(0.0), Some(0.0)));
        let (r, k) = consistency(0.8, 0.7, 0.7, 0.2);
        assert!((r.unwrap() - 5.0).abs() < 1e-9 && (k.unwrap() - 0.2).abs() < 1e-9);
    }

    #[test]
    fn identical_classical_complexity_is_undefined() {
        let mut a = SweepRecord::empty(1.0, 0.3, 1.0, 0);
        a.c_c = Some(0.5);
        a.c_q = Some(0.2);
        let mut b = a.clone();
        b.t_nominal = 2.0;
        b.c_q = Some(0.3);
        let map = ambiguity_map(&[a, b], Source::Theory);
        assert_eq!(map.upper().count(), 1);
        assert!(map.cell(0, 1).k.is_none());
    }

    proptest! {
        #[test]
        fn bounded_and_sign_consistent(a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64, d in 0.0..1.0f64) {
            let (r, k) = consistency(a, b, c, d);
            if let (Some(r), Some(k)) = (r, k) {
                prop_assert!(k.abs() <= 1.0);
                prop_assert!(r * k >= 0.0);
                if r != 0.0 { prop_assert!(r * k > 0.0); }
                let (_, k2) = consistency(c, d, a, b);
                prop_assert_eq!(Some(k), k2);
            } else {
                prop_assert!((a - c).abs() < UNDEFINED_TOL);
            }
        }
    }
}

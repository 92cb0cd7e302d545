//! Random 1-design input states and empirical error statistics.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::statistics::Statistics;

use crate::error::{Error, Result};
use crate::rng;
use crate::state::StateVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    Haar,
    LocalHaar,
    ComputationalBasis,
}

impl EnsembleKind {
    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Haar => "haar",
            EnsembleKind::LocalHaar => "local_haar",
            EnsembleKind::ComputationalBasis => "computational_basis",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "haar" => Ok(EnsembleKind::Haar),
            "local_haar" | "local" => Ok(EnsembleKind::LocalHaar),
            "computational_basis" | "basis" | "computational" => {
                Ok(EnsembleKind::ComputationalBasis)
            }
            other => Err(Error::arg(format!("unknown ensemble {other:?}"))),
        }
    }
}

fn gaussian(rng: &mut impl RngCore) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

fn haar_amps(dim: usize, rng: &mut impl RngCore) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
    crate::pauli::normalize(&mut v);
    v
}

pub fn sample_state(kind: EnsembleKind, n: usize, rng: &mut impl RngCore) -> StateVector {
    let d = 1usize << n;
    let amps = match kind {
        EnsembleKind::Haar => haar_amps(d, rng),
        EnsembleKind::LocalHaar => {
            let mut v = vec![Complex64::new(1.0, 0.0)];
            for _ in 0..n {
                let q = haar_amps(2, rng);
                v = v.iter().flat_map(|a| [a * q[0], a * q[1]]).collect();
            }
            v
        }
        EnsembleKind::ComputationalBasis => {
            return StateVector::basis(n, rng::below(rng, d as u64) as usize)
        }
    };
    StateVector::new(amps).expect("power-of-two length")
}

/// Summary of `S(ψ) = ‖(U − U₀)ψ‖²` over a sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSampleStats {
    pub samples: usize,
    pub mean_sqrt_s: f64,
    pub std_sqrt_s: f64,
    pub mean_s: f64,
    pub var_s: f64,
    pub seed: u64,
}

impl ErrorSampleStats {
    /// Statistics from per-sample `√S` values; spreads use the unbiased estimator.
    pub fn from_sqrt_values(sqrt_s: &[f64], seed: u64) -> Result<Self> {
        if sqrt_s.is_empty() {
            return Err(Error::arg("at least one sample is required"));
        }
        let s: Vec<f64> = sqrt_s.iter().map(|x| x * x).collect();
        let spread = |v: &[f64]| {
            if v.len() > 1 {
                v.variance().max(0.0)
            } else {
                0.0
            }
        };
        Ok(ErrorSampleStats {
            samples: sqrt_s.len(),
            mean_sqrt_s: sqrt_s.mean(),
            std_sqrt_s: spread(sqrt_s).sqrt(),
            mean_s: s.as_slice().mean(),
            var_s: spread(&s),
            seed,
        })
    }

    pub fn std_err_s(&self) -> f64 {
        (self.var_s / self.samples as f64).sqrt()
    }

    pub fn std_err_sqrt_s(&self) -> f64 {
        self.std_sqrt_s / (self.samples as f64).sqrt()
    }
}

/// Sample `i` is drawn from substream `i` of `seed`.
pub fn sample_states(kind: EnsembleKind, n: usize, samples: usize, seed: u64) -> Vec<StateVector> {
    (0..samples)
        .map(|i| sample_state(kind, n, &mut rng::substream(seed, i as u64)))
        .collect()
}

fn collect<U, U0>(
    states: impl Iterator<Item = StateVector>,
    mut apply_u: U,
    mut apply_u0: U0,
) -> Result<Vec<f64>>
where
    U: FnMut(&StateVector) -> Result<StateVector>,
    U0: FnMut(&StateVector) -> Result<StateVector>,
{
    states
        .map(|psi| {
            let a = apply_u(&psi)?;
            let b = apply_u0(&psi)?;
            if a.dim() != b.dim() {
                return Err(Error::Dimension {
                    expected: b.dim(),
                    found: a.dim(),
                });
            }
            Ok(a.distance(&b))
        })
        .collect()
}

pub fn empirical_error<U, U0>(
    apply_u: U,
    apply_u0: U0,
    kind: EnsembleKind,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<ErrorSampleStats>
where
    U: FnMut(&StateVector) -> Result<StateVector>,
    U0: FnMut(&StateVector) -> Result<StateVector>,
{
    if samples == 0 {
        return Err(Error::arg("at least one sample is required"));
    }
    let states = (0..samples).map(|i| sample_state(kind, n, &mut rng::substream(seed, i as u64)));
    let v = collect(states, apply_u, apply_u0)?;
    ErrorSampleStats::from_sqrt_values(&v, seed)
}

/// Inputs `|0…0⟩_k ⊗ |ψ⟩` with `|ψ⟩` Haar on the remaining `n − k` qubits.
pub fn subsystem_state(n: usize, k: usize, rng: &mut impl RngCore) -> StateVector {
    let mut amps = haar_amps(1usize << (n - k), rng);
    amps.resize(1usize << n, Complex64::new(0.0, 0.0));
    StateVector::new(amps).expect("power-of-two length")
}

pub fn empirical_subsystem_error<U, U0>(
    apply_u: U,
    apply_u0: U0,
    n: usize,
    fixed_qubits: usize,
    samples: usize,
    seed: u64,
) -> Result<ErrorSampleStats>
where
    U: FnMut(&StateVector) -> Result<StateVector>,
    U0: FnMut(&StateVector) -> Result<StateVector>,
{
    if fixed_qubits >= n {
        return Err(Error::arg("fixed register must leave at least one random qubit"));
    }
    if samples == 0 {
        return Err(Error::arg("at least one sample is required"));
    }
    let states =
        (0..samples).map(|i| subsystem_state(n, fixed_qubits, &mut rng::substream(seed, i as u64)));
    let v = collect(states, apply_u, apply_u0)?;
    ErrorSampleStats::from_sqrt_values(&v, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn states_are_normalized() {
        let mut r = rng::from_seed(3);
        for kind in [EnsembleKind::Haar, EnsembleKind::LocalHaar, EnsembleKind::ComputationalBasis] {
            for _ in 0..20 {
                let s = sample_state(kind, 4, &mut r);
                assert!((s.norm() - 1.0).abs() < 1e-12);
            }
        }
        let s = sample_state(EnsembleKind::ComputationalBasis, 4, &mut r);
        let nz: Vec<_> = s.iter().filter(|a| a.norm() > 0.0).collect();
        assert_eq!(nz.len(), 1);
        assert_eq!(nz[0].norm(), 1.0);
    }

    #[test]
    fn haar_first_moment() {
        let n = 3;
        let d = 8;
        let count = 10_000;
        let mut r = rng::from_seed(42);
        let mut sum = vec![Complex64::new(0.0, 0.0); d * d];
        let mut diag_sq = vec![0.0; d];
        for _ in 0..count {
            let s = sample_state(EnsembleKind::Haar, n, &mut r);
            for i in 0..d {
                for j in 0..d {
                    sum[i * d + j] += s[i] * s[j].conj();
                }
                diag_sq[i] += s[i].norm_sqr().powi(2);
            }
        }
        let c = count as f64;
        for i in 0..d {
            let mean = sum[i * d + i].re / c;
            let sd = ((diag_sq[i] / c - mean * mean) / c).sqrt();
            assert!((mean - 1.0 / d as f64).abs() < 3.0 * sd);
            for j in 0..d {
                if i != j {
                    // Var of Re and Im parts of ψ_i ψ_j* is 1/(2 d (d+1)) each.
                    let sd = (1.0 / (2.0 * (d * (d + 1)) as f64) / c).sqrt();
                    let m = sum[i * d + j] / c;
                    assert!(m.re.abs() < 3.5 * sd && m.im.abs() < 3.5 * sd);
                }
            }
        }
    }

    #[test]
    fn identical_and_negated_maps() {
        let id = |s: &StateVector| Ok(s.clone());
        let st = empirical_error(id, id, EnsembleKind::Haar, 3, 50, 1).unwrap();
        assert_eq!(st.mean_s, 0.0);
        assert_eq!(st.mean_sqrt_s, 0.0);
        let neg = |s: &StateVector| {
            Ok(StateVector::new(s.iter().map(|a| -a).collect()).unwrap())
        };
        let st = empirical_error(neg, id, EnsembleKind::LocalHaar, 3, 50, 1).unwrap();
        assert!((st.mean_sqrt_s - 2.0).abs() < 1e-12);
        assert!(st.var_s < 1e-20);
        assert!(empirical_error(id, id, EnsembleKind::Haar, 3, 0, 1).is_err());
    }

    #[test]
    fn subsystem_layout() {
        let mut r = rng::from_seed(5);
        let s = subsystem_state(4, 1, &mut r);
        assert!(s[8..].iter().all(|a| a.norm() == 0.0));
        assert!((s.norm() - 1.0).abs() < 1e-12);
        let id = |s: &StateVector| Ok(s.clone());
        assert!(empirical_subsystem_error(id, id, 3, 3, 10, 1).is_err());
    }

    #[test]
    fn jensen() {
        let st = ErrorSampleStats::from_sqrt_values(&[0.1, 0.5, 0.3], 0).unwrap();
        assert!(st.mean_sqrt_s <= st.mean_s.sqrt());
    }
}

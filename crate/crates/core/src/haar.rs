//! Haar averages of `√⟨ψ|G|ψ⟩` for positive semidefinite `G`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg;
use crate::pauli::PauliSum;
use crate::rng;

/// Relative eigenvalue gap below which the closed form is not used.
pub const DEGENERACY_GAP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    OneNonzero,
    EquallySpaced,
    Degenerate,
    ExponentialRandom,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::OneNonzero => "one_nonzero",
            ScenarioKind::EquallySpaced => "equally_spaced",
            ScenarioKind::Degenerate => "degenerate",
            ScenarioKind::ExponentialRandom => "exponential_random",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "one_nonzero" | "one" => Ok(ScenarioKind::OneNonzero),
            "equally_spaced" | "equal" => Ok(ScenarioKind::EquallySpaced),
            "degenerate" => Ok(ScenarioKind::Degenerate),
            "exponential_random" | "exponential" => Ok(ScenarioKind::ExponentialRandom),
            other => Err(Error::arg(format!("unknown spectrum scenario {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumScenario {
    pub kind: ScenarioKind,
    pub d: usize,
    pub lambda_max: f64,
    pub seed: u64,
}

impl SpectrumScenario {
    pub fn new(kind: ScenarioKind, d: usize, lambda_max: f64, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::arg("dimension must be >= 1"));
        }
        if !(lambda_max > 0.0) {
            return Err(Error::arg("largest eigenvalue must be positive"));
        }
        Ok(SpectrumScenario {
            kind,
            d,
            lambda_max,
            seed,
        })
    }

    pub fn spectrum(&self) -> Vec<f64> {
        let (d, l) = (self.d, self.lambda_max);
        match self.kind {
            ScenarioKind::OneNonzero => {
                let mut v = vec![0.0; d];
                v[0] = l;
                v
            }
            ScenarioKind::EquallySpaced => (1..=d).map(|j| l * j as f64 / d as f64).collect(),
            ScenarioKind::Degenerate => vec![l; d],
            ScenarioKind::ExponentialRandom => {
                let mut r = rng::from_seed(self.seed);
                let v: Vec<f64> = (0..d).map(|_| Exp1.sample(&mut r)).collect();
                let m = v.iter().cloned().fold(0.0, f64::max);
                v.into_iter().map(|x| l * x / m).collect()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSqrt {
    pub value: f64,
    pub method: Method,
    pub samples: usize,
    pub std_err: f64,
    /// True when the closed form was attempted and rejected.
    pub fell_back: bool,
}

/// `(√π/2) Γ(d)/Γ(d+½)`.
pub fn gamma_ratio(d: usize) -> f64 {
    let d = d as f64;
    0.5 * PI.sqrt() * (ln_gamma(d) - ln_gamma(d + 0.5)).exp()
}

fn validate(spectrum: &[f64]) -> Result<f64> {
    if spectrum.is_empty() {
        return Err(Error::arg("spectrum is empty"));
    }
    if spectrum.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::arg("eigenvalues must be finite and nonnegative"));
    }
    Ok(spectrum.iter().cloned().fold(0.0, f64::max))
}

/// Closed form, or `None` when the positive eigenvalues are too close or the
/// alternating sum loses all precision.
fn closed_form(spectrum: &[f64], lambda: f64) -> Option<f64> {
    let d = spectrum.len();
    if lambda == 0.0 {
        return Some(0.0);
    }
    let mut pos: Vec<f64> = spectrum.iter().cloned().filter(|&x| x > 0.0).collect();
    pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if pos.windows(2).any(|w| w[1] - w[0] < DEGENERACY_GAP * lambda) {
        return None;
    }
    let zeros = d - pos.len();
    // Divided difference of x^{d-1/2}; zero eigenvalues only contribute a
    // factor λ_j per zero to the denominator.
    let mut terms = Vec::with_capacity(pos.len());
    for (j, &x) in pos.iter().enumerate() {
        let y = x / lambda;
        let mut log = (d as f64 - 0.5) * y.ln() - zeros as f64 * y.ln();
        let mut neg = false;
        for (k, &z) in pos.iter().enumerate() {
            if k != j {
                let diff = y - z / lambda;
                log -= diff.abs().ln();
                neg ^= diff < 0.0;
            }
        }
        let v = log.exp();
        terms.push(if neg { -v } else { v });
    }
    // Neumaier summation
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut biggest = 0.0f64;
    for v in terms {
        biggest = biggest.max(v.abs());
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    let value = lambda.sqrt() * gamma_ratio(d) * (sum + comp);
    let lost = biggest * f64::EPSILON * d as f64 * 16.0 > (sum + comp).abs() * 1e-6;
    if !value.is_finite() || value < 0.0 || value > lambda.sqrt() * (1.0 + 1e-12) || lost {
        return None;
    }
    Some(value)
}

/// Haar samples of `√(Σ λ_j |c_j|²)`.
pub fn mc_mean_sqrt(spectrum: &[f64], samples: usize, rng: &mut impl RngCore) -> Result<(f64, f64)> {
    validate(spectrum)?;
    if samples < 2 {
        return Err(Error::arg("Monte Carlo needs at least two samples"));
    }
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let (mut num, mut den) = (0.0, 0.0);
        for &l in spectrum {
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            let w = a * a + b * b;
            num += l * w;
            den += w;
        }
        let v = (num / den).sqrt();
        s1 += v;
        s2 += v * v;
    }
    let n = samples as f64;
    let mean = s1 / n;
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// Exact Haar mean where the closed form is reliable, Monte Carlo otherwise.
pub fn exact_mean_sqrt(spectrum: &[f64], mc_samples: usize, seed: u64) -> Result<MeanSqrt> {
    let lambda = validate(spectrum)?;
    if spectrum.len() == 1 {
        return Ok(MeanSqrt {
            value: spectrum[0].sqrt(),
            method: Method::Exact,
            samples: 0,
            std_err: 0.0,
            fell_back: false,
        });
    }
    let mut pos = spectrum.iter().filter(|&&x| x > 0.0).count();
    if pos == 0 {
        pos = 1;
    }
    let distinct_ok = pos <= 1 || {
        let mut v: Vec<f64> = spectrum.iter().cloned().filter(|&x| x > 0.0).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.windows(2).all(|w| w[1] - w[0] >= DEGENERACY_GAP * lambda)
    };
    if let Some(v) = closed_form(spectrum, lambda) {
        return Ok(MeanSqrt {
            value: v,
            method: Method::Exact,
            samples: 0,
            std_err: 0.0,
            fell_back: false,
        });
    }
    let (mean, se) = mc_mean_sqrt(spectrum, mc_samples, &mut rng::from_seed(seed))?;
    Ok(MeanSqrt {
        value: mean,
        method: Method::MonteCarlo,
        samples: mc_samples,
        std_err: se,
        fell_back: distinct_ok,
    })
}

/// `√(Tr G / d)`.
pub fn cauchy_bound(spectrum: &[f64]) -> Result<f64> {
    validate(spectrum)?;
    Ok((spectrum.iter().sum::<f64>() / spectrum.len() as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DStatistic {
    pub value: f64,
    pub method: Method,
    pub samples: usize,
    /// Standard error of `value` (zero for the closed form).
    pub std_err: f64,
}

/// `D = (√(Tr G/d) − E√⟨ψ|G|ψ⟩)/√Λ`.
pub fn d_statistic(spectrum: &[f64], mc_samples: usize, seed: u64) -> Result<DStatistic> {
    let lambda = validate(spectrum)?;
    if lambda == 0.0 {
        return Err(Error::arg("D is undefined for the zero spectrum"));
    }
    let m = exact_mean_sqrt(spectrum, mc_samples, seed)?;
    let sl = lambda.sqrt();
    Ok(DStatistic {
        value: (cauchy_bound(spectrum)? - m.value) / sl,
        method: m.method,
        samples: m.samples,
        std_err: m.std_err / sl,
    })
}

/// `D` of the spectrum `{Λ, 0, …, 0}`.
pub fn d_lambda_one(d: usize) -> f64 {
    1.0 / (d as f64).sqrt() - gamma_ratio(d)
}

/// `E √⟨ψ|(t⁴/4)[iB,A]²|ψ⟩`, the first-order bound without Cauchy–Schwarz.
pub fn pf1_no_cauchy_bound(
    a: &PauliSum,
    b: &PauliSum,
    t: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<MeanSqrt> {
    if a.n() > crate::DENSE_CAP {
        return Err(Error::cap(format!(
            "spectrum at n = {} exceeds the dense cap {}",
            a.n(),
            crate::DENSE_CAP
        )));
    }
    let k = b.commutator(a)?.scale(num_complex::Complex64::new(0.0, 1.0));
    let (vals, _) = linalg::hermitian_eig(&k.to_dense());
    let c = t.powi(4) / 4.0;
    let spectrum: Vec<f64> = vals.iter().map(|v| c * v * v).collect();
    if spectrum.iter().all(|&x| x == 0.0) {
        return Ok(MeanSqrt {
            value: 0.0,
            method: Method::Exact,
            samples: 0,
            std_err: 0.0,
            fell_back: false,
        });
    }
    exact_mean_sqrt(&spectrum, mc_samples, seed)
}

/// One row of the D-statistic table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaarRow {
    pub scenario: String,
    pub d: usize,
    #[serde(rename = "D_value")]
    pub d_value: f64,
    pub method: String,
    pub samples: usize,
    pub std_err: f64,
}

/// `D` for a scenario; the random scenario reports the maximum over `trials` draws.
pub fn scenario_row(
    kind: ScenarioKind,
    d: usize,
    trials: usize,
    mc_samples: usize,
    seed: u64,
) -> Result<HaarRow> {
    let (value, method, samples, se) = match kind {
        ScenarioKind::ExponentialRandom => {
            let mut best: Option<DStatistic> = None;
            for i in 0..trials.max(1) {
                let sc = SpectrumScenario::new(kind, d, 1.0, rng::substream(seed, i as u64).next_u64())?;
                let ds = d_statistic(&sc.spectrum(), mc_samples, seed.wrapping_add(i as u64))?;
                if best.map_or(true, |b| ds.value > b.value) {
                    best = Some(ds);
                }
            }
            let b = best.expect("at least one trial");
            (b.value, b.method, b.samples, b.std_err)
        }
        _ => {
            let sc = SpectrumScenario::new(kind, d, 1.0, seed)?;
            let ds = d_statistic(&sc.spectrum(), mc_samples, seed)?;
            (ds.value, ds.method, ds.samples, ds.std_err)
        }
    };
    Ok(HaarRow {
        scenario: kind.name().into(),
        d,
        d_value: value,
        method: method.name().into(),
        samples,
        std_err: se,
    })
}

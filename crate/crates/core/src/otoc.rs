//! Infinite-temperature OTOC of `Z` on the first qubit and `X` on the last.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::{self, EnsembleKind};
use crate::error::{Error, Result};
use crate::exact::{self, ExactEvolver};
use crate::formulas::{self, EvolutionPlan, FormulaKernel, StageList};
use crate::hamiltonian::HamiltonianInstance;
use crate::linalg::{self, CMatrix};
use crate::rng;
use crate::state::StateVector;

/// Suffix states evolved together.
const CHUNK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    ExactMixed,
    SampledBasis,
}

#[derive(Clone, Debug)]
pub struct OtocConfig<'a> {
    pub hamiltonian: &'a HamiltonianInstance,
    pub t: f64,
    pub p: usize,
    pub r: u64,
}

impl<'a> OtocConfig<'a> {
    pub fn new(hamiltonian: &'a HamiltonianInstance, t: f64, p: usize, r: u64) -> Result<Self> {
        if hamiltonian.n < 2 {
            return Err(Error::arg("the OTOC needs at least two qubits"));
        }
        if hamiltonian.n > crate::DENSE_CAP {
            return Err(Error::cap(format!(
                "OTOC at n = {} exceeds the statevector cap {}",
                hamiltonian.n,
                crate::DENSE_CAP
            )));
        }
        StageList::for_order(p)?;
        if r < 1 || !t.is_finite() {
            return Err(Error::arg("need r >= 1 and finite t"));
        }
        Ok(OtocConfig {
            hamiltonian,
            t,
            p,
            r,
        })
    }

    pub fn n(&self) -> usize {
        self.hamiltonian.n
    }

    /// `d₁ = 2^{n-1}`.
    pub fn suffix_dim(&self) -> usize {
        1usize << (self.n() - 1)
    }
}

fn flip_last(psi: &mut [Complex64], batch: usize) {
    let d = psi.len() / batch;
    for b in (0..d).step_by(2) {
        for s in 0..batch {
            psi.swap(b * batch + s, (b + 1) * batch + s);
        }
    }
}

/// `⟨Z₁⟩` of each interleaved state.
fn z_first(psi: &[Complex64], batch: usize) -> Vec<f64> {
    let half = psi.len() / batch / 2;
    let mut out = vec![0.0; batch];
    for (i, a) in psi.iter().enumerate() {
        let s = i % batch;
        let sign = if i / batch < half { 1.0 } else { -1.0 };
        out[s] += sign * a.norm_sqr();
    }
    out
}

enum Propagator {
    Exact(ExactEvolver),
    Trotter {
        forward: formulas::Segment,
        back: formulas::Segment,
        r: u64,
    },
}

impl Propagator {
    fn exact(cfg: &OtocConfig<'_>) -> Result<Self> {
        Ok(Propagator::Exact(ExactEvolver::auto(&cfg.hamiltonian.total())?))
    }

    fn trotter(cfg: &OtocConfig<'_>) -> Result<Self> {
        let k = FormulaKernel::compile(cfg.hamiltonian)?;
        let stages = StageList::for_order(cfg.p)?;
        let tau = cfg.t / cfg.r as f64;
        Ok(Propagator::Trotter {
            forward: k.segment(&stages, tau),
            back: k.segment_adjoint(&stages, tau),
            r: cfg.r,
        })
    }

    /// `⟨Z₁⟩` after `W† X_n W` on each state, with `W ≈ e^{-iHt}`.
    fn values(&self, states: &[StateVector], t: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(states.len());
        for chunk in states.chunks(CHUNK) {
            match self {
                Propagator::Exact(ev) => {
                    for s in chunk {
                        let mut a = ev.evolve(s, t)?;
                        flip_last(&mut a, 1);
                        let b = ev.evolve(&a, -t)?;
                        out.push(z_first(&b, 1)[0]);
                    }
                }
                Propagator::Trotter { forward, back, r } => {
                    let bt = chunk.len();
                    let mut data = formulas::interleave(chunk);
                    forward.apply_batch_repeated(&mut data, bt, *r);
                    flip_last(&mut data, bt);
                    back.apply_batch_repeated(&mut data, bt, *r);
                    out.extend(z_first(&data, bt));
                }
            }
        }
        Ok(out)
    }
}

fn basis_suffix(n: usize) -> Vec<StateVector> {
    (0..1usize << (n - 1)).map(|j| StateVector::basis(n, j)).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// OTOC with exact evolution, averaged over every suffix basis state.
pub fn otoc_exact(cfg: &OtocConfig<'_>) -> Result<f64> {
    let states = basis_suffix(cfg.n());
    Ok(mean(&Propagator::exact(cfg)?.values(&states, cfg.t)?))
}

/// OTOC with both evolutions replaced by `U_p(t/r)^r` and its adjoint.
pub fn otoc_trotterized(cfg: &OtocConfig<'_>) -> Result<f64> {
    let states = basis_suffix(cfg.n());
    Ok(mean(&Propagator::trotter(cfg)?.values(&states, cfg.t)?))
}

/// Dense `Tr(V₀ ρ_in V₀† Z₁)`.
pub fn otoc_dense_trace(cfg: &OtocConfig<'_>) -> Result<f64> {
    let n = cfg.n();
    let d = 1usize << n;
    let u = exact::exact_unitary_dense(&cfg.hamiltonian.total(), cfg.t)?;
    let x = CMatrix::from_fn(d, d, |i, j| {
        if i == j ^ 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let v = u.adjoint() * x * &u;
    let d1 = d / 2;
    let rho = CMatrix::from_fn(d, d, |i, j| {
        if i == j && i < d1 {
            Complex64::new(1.0 / d1 as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let z = CMatrix::from_fn(d, d, |i, j| {
        if i != j {
            Complex64::new(0.0, 0.0)
        } else if i < d1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        }
    });
    Ok(linalg::trace(&(&v * rho * v.adjoint() * z)).re)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OtocBound {
    /// `4r‖m‖_F/√d₁`.
    pub average: f64,
    /// `4r‖m‖`.
    pub worst: f64,
    pub m_frobenius: f64,
    pub m_spectral: f64,
}

/// Error budget from the dense per-segment multiplicative error `m`.
pub fn otoc_error_bound(cfg: &OtocConfig<'_>) -> Result<OtocBound> {
    let h = cfg.hamiltonian;
    let tau = cfg.t / cfg.r as f64;
    let u0 = exact::exact_unitary_dense(&h.total(), tau)?;
    let up = EvolutionPlan::new(h, cfg.p, tau, 1)?.unitary_dense()?;
    let d = h.dim();
    let m = u0.adjoint() * up - CMatrix::identity(d, d);
    let fro = linalg::frobenius_sq(&m).sqrt();
    let spectral = linalg::spectral_norm(&m);
    let r = cfg.r as f64;
    Ok(OtocBound {
        average: 4.0 * r * fro / (cfg.suffix_dim() as f64).sqrt(),
        worst: 4.0 * r * spectral,
        m_frobenius: fro,
        m_spectral: spectral,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledOtoc {
    pub estimate: f64,
    pub radius: f64,
    pub samples: usize,
    pub delta: f64,
}

/// Hoeffding radius `√(2 ln(2/δ)/K)` for `K` samples bounded by 1.
pub fn hoeffding_radius(k: usize, delta: f64) -> f64 {
    (2.0 * (2.0 / delta).ln() / k as f64).sqrt()
}

/// Trotterized OTOC estimated from `K` random suffix states.
pub fn otoc_sampled(
    cfg: &OtocConfig<'_>,
    kind: EnsembleKind,
    k: usize,
    delta: f64,
    seed: u64,
) -> Result<SampledOtoc> {
    if k == 0 {
        return Err(Error::arg("at least one sample is required"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::arg("delta must lie in (0, 1)"));
    }
    let n = cfg.n();
    let states: Vec<StateVector> = (0..k)
        .map(|i| {
            let s = ensembles::sample_state(kind, n - 1, &mut rng::substream(seed, i as u64));
            let mut a = s.into_inner();
            a.resize(1usize << n, Complex64::new(0.0, 0.0));
            StateVector::new(a).expect("power-of-two length")
        })
        .collect();
    let v = Propagator::trotter(cfg)?.values(&states, cfg.t)?;
    Ok(SampledOtoc {
        estimate: mean(&v),
        radius: hoeffding_radius(k, delta),
        samples: k,
        delta,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OtocRow {
    pub model: String,
    pub n: usize,
    pub t: f64,
    pub p: usize,
    pub r: u64,
    pub otoc_exact: f64,
    pub otoc_trott: f64,
    pub gap: f64,
    pub bound_avg: f64,
    pub bound_worst: f64,
}

pub fn otoc_row(cfg: &OtocConfig<'_>) -> Result<OtocRow> {
    let e = otoc_exact(cfg)?;
    let tr = otoc_trotterized(cfg)?;
    let b = otoc_error_bound(cfg)?;
    Ok(OtocRow {
        model: cfg.hamiltonian.model.name().into(),
        n: cfg.n(),
        t: cfg.t,
        p: cfg.p,
        r: cfg.r,
        otoc_exact: e,
        otoc_trott: tr,
        gap: (e - tr).abs(),
        bound_avg: b.average,
        bound_worst: b.worst,
    })
}

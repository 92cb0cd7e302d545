//! Minimal Trotter number `r` reaching a target error.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, ConstantMode, HamiltonianNorm, InterferenceInputs};
use crate::ensembles::{self, EnsembleKind, ErrorSampleStats};
use crate::error::{Error, Result};
use crate::exact::ExactEvolver;
use crate::formulas::{interleave, EvolutionPlan, FormulaKernel, StageList};
use crate::hamiltonian::{HamiltonianInstance, Model};
use crate::linalg::{self, CMatrix};
use crate::pauli::NormMethod;
use crate::rng;
use crate::state::StateVector;

pub const DEFAULT_R_CAP: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    EmpiricalAvg,
    EmpiricalWorst,
    Triangle,
    Counting,
    Interference,
    Tp,
    CommutatorWorst,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::EmpiricalAvg => "empirical",
            Criterion::EmpiricalWorst => "worst",
            Criterion::Triangle => "triangle",
            Criterion::Counting => "counting",
            Criterion::Interference => "interference",
            Criterion::Tp => "tp",
            Criterion::CommutatorWorst => "alpha_comm",
        }
    }

    pub fn is_bound(self) -> bool {
        !matches!(self, Criterion::EmpiricalAvg | Criterion::EmpiricalWorst)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "empirical" | "empirical_avg" | "average" => Ok(Criterion::EmpiricalAvg),
            "worst" | "empirical_worst" => Ok(Criterion::EmpiricalWorst),
            "triangle" => Ok(Criterion::Triangle),
            "counting" => Ok(Criterion::Counting),
            "interference" => Ok(Criterion::Interference),
            "tp" => Ok(Criterion::Tp),
            "alpha_comm" | "commutator_worst" => Ok(Criterion::CommutatorWorst),
            other => Err(Error::arg(format!("unknown criterion {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub r_min: u64,
    pub criterion: Criterion,
    pub t: f64,
    pub eps: f64,
    pub p: usize,
    pub samples: usize,
    pub seed: u64,
    pub error_at_r_min: f64,
    /// Error at `r_min - 1` when it was evaluated.
    pub error_below: Option<f64>,
    pub evaluations: usize,
    pub monotonicity_violations: usize,
    #[serde(default)]
    pub notes: BTreeMap<String, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    pub cap: u64,
    /// Starting point of the bracket, e.g. the result for a similar instance.
    pub hint: Option<u64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            cap: DEFAULT_R_CAP,
            hint: None,
        }
    }
}

/// Outcome of [`minimal_r`].
#[derive(Clone, Debug, PartialEq)]
pub struct SearchTrace {
    pub r_min: u64,
    pub value: f64,
    pub value_below: Option<f64>,
    pub evaluated: BTreeMap<u64, f64>,
    pub violations: usize,
}

/// Smallest `r ≥ 1` with `f(r) ≤ eps` for a (nearly) decreasing `f`.
///
/// The bracket grows by at least a factor two per probe, guided by the local
/// model `f ∝ r^{-order}`; it is then closed by interpolation in log-log
/// coordinates, falling back to bisection when one side stalls.
pub fn minimal_r<F>(mut f: F, eps: f64, order: f64, opts: SearchOptions) -> Result<SearchTrace>
where
    F: FnMut(u64) -> Result<f64>,
{
    if !(eps > 0.0) {
        return Err(Error::arg("eps must be positive"));
    }
    let mut seen: BTreeMap<u64, f64> = BTreeMap::new();
    let mut eval = |r: u64, seen: &mut BTreeMap<u64, f64>| -> Result<f64> {
        if r > opts.cap {
            return Err(Error::SearchOverflow { cap: opts.cap });
        }
        if let Some(v) = seen.get(&r) {
            return Ok(*v);
        }
        let v = f(r)?;
        seen.insert(r, v);
        Ok(v)
    };
    let predict = |r: u64, e: f64| -> f64 {
        if e.is_finite() && e > 0.0 {
            r as f64 * (e / eps).powf(1.0 / order)
        } else {
            f64::NAN
        }
    };

    let mut r = opts.hint.unwrap_or(1).clamp(1, opts.cap);
    let mut e = eval(r, &mut seen)?;
    let (mut lo, mut e_lo, mut hi, mut e_hi);
    if e <= eps {
        hi = r;
        e_hi = e;
        loop {
            if hi == 1 {
                return Ok(finish(1, e_hi, None, seen));
            }
            let guess = predict(hi, e_hi) * 0.97;
            let cand = if guess.is_finite() {
                (guess.floor() as u64).clamp((hi / 16).max(1), hi - 1)
            } else {
                hi / 2
            }
            .max(1);
            let v = eval(cand, &mut seen)?;
            if v <= eps {
                hi = cand;
                e_hi = v;
            } else {
                lo = cand;
                e_lo = v;
                break;
            }
        }
    } else {
        lo = r;
        e_lo = e;
        loop {
            let guess = predict(lo, e_lo) * 1.03;
            let floor = lo.saturating_mul(2);
            r = if guess.is_finite() && guess < opts.cap as f64 {
                (guess.ceil() as u64).clamp(floor, lo.saturating_mul(10_000))
            } else {
                floor
            };
            if r > opts.cap {
                if lo < opts.cap {
                    r = opts.cap;
                } else {
                    return Err(Error::SearchOverflow { cap: opts.cap });
                }
            }
            e = eval(r, &mut seen)?;
            if e <= eps {
                hi = r;
                e_hi = e;
                break;
            }
            lo = r;
            e_lo = e;
        }
    }

    let mut last_side = 0i8;
    let mut repeats = 0;
    while hi - lo > 1 {
        let interp = if e_lo.is_finite() && e_lo > 0.0 && e_hi > 0.0 && e_lo > e_hi {
            let k = (e_hi.ln() - e_lo.ln()) / ((hi as f64).ln() - (lo as f64).ln());
            ((lo as f64).ln() + (eps.ln() - e_lo.ln()) / k).exp()
        } else {
            f64::NAN
        };
        let mid = lo + (hi - lo) / 2;
        let cand = if repeats >= 2 || !interp.is_finite() {
            repeats = 0;
            mid
        } else {
            (interp.ceil() as u64).clamp(lo + 1, hi - 1)
        };
        let v = eval(cand, &mut seen)?;
        let side = if v <= eps { 1 } else { -1 };
        if side == last_side {
            repeats += 1;
        } else {
            repeats = 0;
        }
        last_side = side;
        if v <= eps {
            hi = cand;
            e_hi = v;
        } else {
            lo = cand;
            e_lo = v;
        }
    }
    Ok(finish(hi, e_hi, Some(e_lo), seen))
}

fn finish(r: u64, v: f64, below: Option<f64>, seen: BTreeMap<u64, f64>) -> SearchTrace {
    let mut violations = 0;
    let vals: Vec<f64> = seen.values().cloned().collect();
    for w in vals.windows(2) {
        if w[1] > w[0] {
            violations += 1;
        }
    }
    SearchTrace {
        r_min: r,
        value: v,
        value_below: if r > 1 { below } else { None },
        evaluated: seen,
        violations,
    }
}

/// Deterministic seeds `(hamiltonian, states)` for instance `i` at size `n`.
pub fn instance_seeds(seed: u64, n: usize, i: usize) -> (u64, u64) {
    let mut r = rng::substream(seed, ((n as u64) << 32) | i as u64);
    (r.next_u64(), r.next_u64())
}

/// Average-case error of `U_p(t/r)^r` over a fixed set of input states.
pub struct EmpiricalProblem {
    n: usize,
    t: f64,
    stages: StageList,
    kernel: FormulaKernel,
    inputs: Vec<Complex64>,
    targets: Vec<Complex64>,
    samples: usize,
}

impl EmpiricalProblem {
    /// `reference_tol` applies when the reference evolution uses Krylov.
    pub fn new(
        h: &HamiltonianInstance,
        p: usize,
        t: f64,
        states: &[StateVector],
        reference_tol: f64,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::arg("at least one sample is required"));
        }
        let total = h.total();
        let ev = if h.n <= crate::exact::AUTO_DENSE_MAX {
            ExactEvolver::dense(&total)?
        } else {
            ExactEvolver::krylov(&total, reference_tol)?
        };
        let refs = states
            .iter()
            .map(|s| ev.evolve(s, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(EmpiricalProblem {
            n: h.n,
            t,
            stages: StageList::for_order(p)?,
            kernel: FormulaKernel::compile(h)?,
            inputs: interleave(states),
            targets: interleave(&refs),
            samples: states.len(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Per-state `√S` at Trotter number `r`.
    pub fn sqrt_s(&self, r: u64) -> Result<Vec<f64>> {
        if r == 0 {
            return Err(Error::arg("r must be >= 1"));
        }
        let seg = self.kernel.segment(&self.stages, self.t / r as f64);
        let mut data = self.inputs.clone();
        seg.apply_batch_repeated(&mut data, self.samples, r);
        let mut acc = vec![0.0; self.samples];
        for (i, (a, b)) in data.iter().zip(&self.targets).enumerate() {
            acc[i % self.samples] += (a - b).norm_sqr();
        }
        Ok(acc.into_iter().map(f64::sqrt).collect())
    }

    pub fn stats(&self, r: u64, seed: u64) -> Result<ErrorSampleStats> {
        ErrorSampleStats::from_sqrt_values(&self.sqrt_s(r)?, seed)
    }

    pub fn mean_error(&self, r: u64) -> Result<f64> {
        let v = self.sqrt_s(r)?;
        Ok(v.iter().sum::<f64>() / v.len() as f64)
    }
}

pub fn search_r_empirical(
    h: &HamiltonianInstance,
    p: usize,
    t: f64,
    eps: f64,
    kind: EnsembleKind,
    samples: usize,
    seed: u64,
    opts: SearchOptions,
) -> Result<SearchResult> {
    if samples == 0 {
        return Err(Error::arg("at least one sample is required"));
    }
    let states = ensembles::sample_states(kind, h.n, samples, seed);
    let prob = EmpiricalProblem::new(h, p, t, &states, (eps / 100.0).min(1e-10))?;
    let trace = minimal_r(|r| prob.mean_error(r), eps, p as f64, opts)?;
    Ok(result(trace, Criterion::EmpiricalAvg, t, eps, p, samples, seed))
}

fn result(
    tr: SearchTrace,
    criterion: Criterion,
    t: f64,
    eps: f64,
    p: usize,
    samples: usize,
    seed: u64,
) -> SearchResult {
    SearchResult {
        r_min: tr.r_min,
        criterion,
        t,
        eps,
        p,
        samples,
        seed,
        error_at_r_min: tr.value,
        error_below: tr.value_below,
        evaluations: tr.evaluated.len(),
        monotonicity_violations: tr.violations,
        notes: BTreeMap::new(),
    }
}

/// Spectral-norm distance `‖U_p(t/r)^r − e^{-iHt}‖` from dense unitaries.
pub fn worst_error(h: &HamiltonianInstance, u0: &CMatrix, p: usize, t: f64, r: u64) -> Result<f64> {
    let u = EvolutionPlan::new(h, p, t, r)?.unitary_dense()?;
    Ok(linalg::spectral_norm(&(u - u0)))
}

pub fn search_r_worst(
    h: &HamiltonianInstance,
    p: usize,
    t: f64,
    eps: f64,
    opts: SearchOptions,
) -> Result<SearchResult> {
    if h.n > crate::DENSE_CAP {
        return Err(Error::cap(format!(
            "worst-case search at n = {} exceeds the dense cap {}",
            h.n,
            crate::DENSE_CAP
        )));
    }
    let u0 = crate::exact::exact_unitary_dense(&h.total(), t)?;
    let trace = minimal_r(|r| worst_error(h, &u0, p, t, r), eps, p as f64, opts)?;
    Ok(result(trace, Criterion::EmpiricalWorst, t, eps, p, 0, 0))
}

/// Bound value as a function of `r` for fixed `(H, p, t)`.
pub fn bound_curve(
    criterion: Criterion,
    h: &HamiltonianInstance,
    p: usize,
    t: f64,
) -> Result<Box<dyn Fn(u64) -> Result<f64>>> {
    let pi = p as i32;
    let scaled = |v1: f64| -> Box<dyn Fn(u64) -> Result<f64>> {
        Box::new(move |r: u64| Ok(v1 / (r as f64).powi(pi)))
    };
    match criterion {
        Criterion::Triangle => Ok(scaled(bounds::triangle_bound(h, p, t, 1)?.value)),
        Criterion::Counting => {
            let v1 = match h.model {
                Model::Heisenberg1d => bounds::counting_bound_nn(h.n, t, 1, p)?.value,
                Model::PowerLaw if p == 1 => {
                    let alpha = h.params.alpha.unwrap_or(0.0);
                    bounds::counting_bound_power_law(h.n, alpha, t, 1)?.value
                }
                _ => {
                    return Err(Error::cap(format!(
                        "no counting bound for model {} at p = {p}",
                        h.model
                    )))
                }
            };
            Ok(scaled(v1))
        }
        Criterion::Tp => Ok(scaled(
            bounds::tp_bound(h, p, t, 1, bounds::DEFAULT_TERM_CAP, ConstantMode::Omitted)?.value,
        )),
        Criterion::CommutatorWorst => Ok(scaled(
            bounds::worst_case_bound(
                h,
                p,
                t,
                1,
                NormMethod::PowerIteration,
                bounds::DEFAULT_TERM_CAP,
                ConstantMode::Omitted,
            )?
            .value,
        )),
        Criterion::Interference => {
            if p != 1 {
                return Err(Error::arg("interference bound is defined for p = 1"));
            }
            let inputs = InterferenceInputs::new(h, HamiltonianNorm::FourN)?;
            Ok(Box::new(move |r: u64| Ok(inputs.evaluate(t, r)?.value)))
        }
        Criterion::EmpiricalAvg | Criterion::EmpiricalWorst => {
            Err(Error::arg(format!("{criterion} is not a bound")))
        }
    }
}

/// Smallest `r` with `bound(t, r) ≤ eps`; invalid regimes count as infinite.
pub fn search_r_from_bound(
    criterion: Criterion,
    h: &HamiltonianInstance,
    p: usize,
    t: f64,
    eps: f64,
    opts: SearchOptions,
) -> Result<SearchResult> {
    let curve = bound_curve(criterion, h, p, t)?;
    let trace = minimal_r(|r| curve(r), eps, p as f64, opts)?;
    let mut res = result(trace, criterion, t, eps, p, 0, 0);
    if criterion == Criterion::Interference {
        let inputs = InterferenceInputs::new(h, HamiltonianNorm::FourN)?;
        res.notes.insert("regime_rule_r".into(), inputs.regime_rule(t, eps));
        res.notes.insert("comm_norm".into(), inputs.comm_norm);
    }
    Ok(res)
}

/// Mean and spread of `r_min` over instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub model: String,
    pub n: usize,
    pub p: usize,
    pub t: f64,
    pub eps: f64,
    pub criterion: String,
    pub r_mean: f64,
    pub r_std: f64,
    pub instances: usize,
    #[serde(rename = "N")]
    pub samples: usize,
    pub seed: u64,
}

pub fn summarize(
    model: Model,
    n: usize,
    results: &[SearchResult],
    seed: u64,
) -> Result<SearchSummary> {
    let first = results
        .first()
        .ok_or_else(|| Error::arg("no search results to summarize"))?;
    let rs: Vec<f64> = results.iter().map(|r| r.r_min as f64).collect();
    let mean = rs.iter().sum::<f64>() / rs.len() as f64;
    let std = if rs.len() > 1 {
        (rs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (rs.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(SearchSummary {
        model: model.name().into(),
        n,
        p: first.p,
        t: first.t,
        eps: first.eps,
        criterion: first.criterion.name().into(),
        r_mean: mean,
        r_std: std,
        instances: results.len(),
        samples: first.samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::heisenberg_1d;

    #[test]
    fn minimal_r_on_closed_forms() {
        for (c, eps, p) in [(3.7e4, 1e-3, 1.0), (2.0, 0.3, 2.0), (5.0, 10.0, 1.0)] {
            let f = |r: u64| Ok(c / (r as f64).powf(p));
            let tr = minimal_r(f, eps, p, SearchOptions::default()).unwrap();
            let want = ((c / eps).powf(1.0 / p).ceil() as u64).max(1);
            assert_eq!(tr.r_min, want);
            assert_eq!(tr.violations, 0);
            let tr = minimal_r(
                f,
                eps,
                p,
                SearchOptions {
                    hint: Some(want * 37),
                    ..SearchOptions::default()
                },
            )
            .unwrap();
            assert_eq!(tr.r_min, want);
        }
    }

    #[test]
    fn minimal_r_overflow_and_step() {
        let f = |_r: u64| Ok(1.0);
        let opts = SearchOptions {
            cap: 1000,
            hint: None,
        };
        assert!(matches!(minimal_r(f, 0.5, 1.0, opts), Err(Error::SearchOverflow { .. })));
        let step = |r: u64| Ok(if r >= 777 { 0.0 } else { 1.0 });
        assert_eq!(minimal_r(step, 0.5, 1.0, SearchOptions::default()).unwrap().r_min, 777);
    }

    #[test]
    fn trivial_empirical_cases() {
        let h = heisenberg_1d(4, 1).unwrap();
        let single = h.merged();
        let res =
            search_r_empirical(&single, 1, 4.0, 1e-6, EnsembleKind::Haar, 5, 3, SearchOptions::default())
                .unwrap();
        assert_eq!(res.r_min, 1);
        let res = search_r_empirical(&h, 1, 4.0, 2.0, EnsembleKind::Haar, 5, 3, SearchOptions::default())
            .unwrap();
        assert_eq!(res.r_min, 1);
        assert_eq!(search_r_worst(&single, 2, 4.0, 1e-6, SearchOptions::default()).unwrap().r_min, 1);
    }

    #[test]
    fn empirical_bracket_is_tight() {
        let h = heisenberg_1d(5, 2).unwrap();
        let states = ensembles::sample_states(EnsembleKind::Haar, 5, 10, 8);
        let prob = EmpiricalProblem::new(&h, 2, 5.0, &states, 1e-12).unwrap();
        let res =
            search_r_empirical(&h, 2, 5.0, 1e-3, EnsembleKind::Haar, 10, 8, SearchOptions::default())
                .unwrap();
        assert!(prob.mean_error(res.r_min).unwrap() <= 1e-3);
        assert!(prob.mean_error(res.r_min - 1).unwrap() > 1e-3);
        assert!(prob.mean_error(2 * res.r_min).unwrap() <= 1e-3);
        let worst = search_r_worst(&h, 2, 5.0, 1e-3, SearchOptions::default()).unwrap();
        assert!(worst.r_min >= res.r_min);
    }

    #[test]
    fn triangle_inversions() {
        let h = heisenberg_1d(6, 4).unwrap();
        let (t, eps) = (3.0, 1e-3);
        let t1 = bounds::triangle_t1(&h).unwrap().0;
        let r1 = search_r_from_bound(Criterion::Triangle, &h, 1, t, eps, SearchOptions::default())
            .unwrap();
        assert_eq!(r1.r_min, (t * t * t1 / eps).ceil() as u64);
        let t2 = bounds::triangle_t2(&h).unwrap().0;
        let r2 = search_r_from_bound(Criterion::Triangle, &h, 2, t, eps, SearchOptions::default())
            .unwrap();
        assert_eq!(r2.r_min, (t.powf(1.5) * (t2 / eps).sqrt()).ceil() as u64);
    }

    #[test]
    fn interference_search_is_valid() {
        let h = heisenberg_1d(6, 4).unwrap();
        let res =
            search_r_from_bound(Criterion::Interference, &h, 1, 6.0, 1e-3, SearchOptions::default())
                .unwrap();
        let inp = InterferenceInputs::new(&h, HamiltonianNorm::FourN).unwrap();
        let at = inp.evaluate(6.0, res.r_min).unwrap();
        assert!(at.assumptions_ok && at.value <= 1e-3);
        assert!(inp.evaluate(6.0, res.r_min - 1).unwrap().value > 1e-3);
    }

    #[test]
    fn summary_statistics() {
        let mk = |r| SearchResult {
            r_min: r,
            criterion: Criterion::Triangle,
            t: 1.0,
            eps: 1e-3,
            p: 1,
            samples: 0,
            seed: 0,
            error_at_r_min: 0.0,
            error_below: None,
            evaluations: 1,
            monotonicity_violations: 0,
            notes: BTreeMap::new(),
        };
        let s = summarize(Model::Heisenberg1d, 4, &[mk(10), mk(20)], 1).unwrap();
        assert_eq!(s.r_mean, 15.0);
        assert!((s.r_std - 50f64.sqrt()).abs() < 1e-12);
    }
}

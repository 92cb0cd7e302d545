//! Analytic error bounds for product formulas and the truncated Taylor series,
//! plus closed-form averages over Haar-random inputs.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::formulas::StageList;
use crate::hamiltonian::{heisenberg_1d, HamiltonianInstance};
use crate::linalg::{self, CMatrix};
use crate::pauli::{NormMethod, NormOptions, PauliString, PauliSum};

/// Flag attached to bounds whose big-O constant is not known.
pub const O_CONSTANT_OMITTED: &str = "O-constant omitted";

pub const DEFAULT_TERM_CAP: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub value: f64,
    pub t: f64,
    pub r: u64,
    pub p: usize,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub intermediates: BTreeMap<String, f64>,
    pub assumptions_ok: bool,
    #[serde(default)]
    pub flags: Vec<String>,
}

impl BoundReport {
    fn new(name: &str, value: f64, t: f64, r: u64, p: usize) -> Self {
        BoundReport {
            name: name.into(),
            value,
            t,
            r,
            p,
            params: BTreeMap::new(),
            intermediates: BTreeMap::new(),
            assumptions_ok: true,
            flags: Vec::new(),
        }
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.intermediates.insert(key.into(), v);
        self
    }

    fn param(mut self, key: &str, v: f64) -> Self {
        self.params.insert(key.into(), v);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_r(r: u64) -> Result<()> {
    if r == 0 {
        Err(Error::arg("r must be >= 1"))
    } else {
        Ok(())
    }
}

/// `M = U₀†U − I`.
pub fn multiplicative_error(u: &CMatrix, u0: &CMatrix) -> CMatrix {
    let d = u.nrows();
    u0.adjoint() * u - CMatrix::identity(d, d)
}

fn check_unitary_m(m: &CMatrix) -> Result<()> {
    let d = m.nrows();
    let a = m + CMatrix::identity(d, d);
    let res = linalg::unitarity_residual(&a);
    if res > 1e-8 {
        return Err(Error::Validation(format!(
            "I + M is not unitary (residual {res:.3e})"
        )));
    }
    Ok(())
}

/// Mean of `S(ψ)` over any 1-design and the 2-design variance cap.
pub fn mean_variance_law(m: &CMatrix) -> Result<(f64, f64)> {
    check_unitary_m(m)?;
    let d = m.nrows() as f64;
    let f2 = linalg::frobenius_sq(m);
    let tr = linalg::trace(m);
    let lhs = 2.0 * tr.re;
    if (lhs + f2).abs() > 1e-8 * d.max(1.0) {
        return Err(Error::Validation(format!(
            "Tr(M + M†) = {lhs} differs from -Tr(MM†) = {}",
            -f2
        )));
    }
    Ok((f2 / d, 4.0 * f2 / (d * (d + 1.0))))
}

fn suffix_sums(h: &HamiltonianInstance) -> Result<Vec<PauliSum>> {
    let l = h.groups.len();
    let mut out = vec![PauliSum::zero(h.n); l];
    for i in (0..l.saturating_sub(1)).rev() {
        out[i] = out[i + 1].try_add(&h.groups[i + 1].op)?;
    }
    Ok(out)
}

/// `T'_1` and its per-group summands.
pub fn triangle_t1(h: &HamiltonianInstance) -> Result<(f64, Vec<f64>)> {
    let tails = suffix_sums(h)?;
    let mut parts = Vec::new();
    for (g, tail) in h.groups.iter().zip(&tails) {
        parts.push(0.5 * g.op.commutator(tail)?.frobenius_normalized());
    }
    Ok((parts.iter().sum(), parts))
}

/// `T'_2` split into its `1/12` and `1/24` sums.
pub fn triangle_t2(h: &HamiltonianInstance) -> Result<(f64, f64, f64)> {
    let tails = suffix_sums(h)?;
    let (mut s12, mut s24) = (0.0, 0.0);
    for (g, tail) in h.groups.iter().zip(&tails) {
        let inner = tail.commutator(&g.op)?;
        s12 += tail.commutator(&inner)?.frobenius_normalized() / 12.0;
        let inner2 = g.op.commutator(tail)?;
        s24 += g.op.commutator(&inner2)?.frobenius_normalized() / 24.0;
    }
    Ok((s12 + s24, s12, s24))
}

pub fn triangle_bound_pf1(h: &HamiltonianInstance, t: f64, r: u64) -> Result<BoundReport> {
    check_r(r)?;
    let (t1, parts) = triangle_t1(h)?;
    let mut rep = BoundReport::new("triangle", t * t / r as f64 * t1, t, r, 1).with("T1'", t1);
    for (i, v) in parts.iter().enumerate() {
        rep = rep.with(&format!("T1'_part_{i}"), *v);
    }
    Ok(rep)
}

pub fn triangle_bound_pf2(h: &HamiltonianInstance, t: f64, r: u64) -> Result<BoundReport> {
    check_r(r)?;
    let (t2, s12, s24) = triangle_t2(h)?;
    let rf = r as f64;
    Ok(BoundReport::new("triangle", t.powi(3) / (rf * rf) * t2, t, r, 2)
        .with("T2'", t2)
        .with("T2'_twelfth", s12)
        .with("T2'_twentyfourth", s24))
}

pub fn triangle_bound(h: &HamiltonianInstance, p: usize, t: f64, r: u64) -> Result<BoundReport> {
    match p {
        1 => triangle_bound_pf1(h, t, r),
        2 => triangle_bound_pf2(h, t, r),
        _ => Err(Error::arg("triangle bound is defined for p = 1 and p = 2")),
    }
}

/// How the unknown constant of the commutator-sum bounds is treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantMode {
    /// Report `T_p t^{p+1}/r^p` with no constant.
    #[default]
    Omitted,
    /// Multiply by `2 S^{p+1}` with `S` the stage count.
    Proof,
}

/// Sum of a norm over the right-nested commutators of all `(p+1)`-tuples of groups.
pub fn nested_tuple_sum<F>(h: &HamiltonianInstance, p: usize, cap: u64, mut norm: F) -> Result<f64>
where
    F: FnMut(&PauliSum) -> Result<f64>,
{
    let l = h.groups.len() as u64;
    let count = l.checked_pow(p as u32 + 1).unwrap_or(u64::MAX);
    if count > cap {
        return Err(Error::cap(format!(
            "{count} nested commutators exceed the enumeration cap {cap}"
        )));
    }
    let ops = h.group_ops();
    let mut total = 0.0;
    // (a, b) and (b, a) give negated commutators at every outer depth.
    for a in 0..ops.len() {
        for b in a + 1..ops.len() {
            let inner = ops[a].commutator(ops[b])?;
            total += 2.0 * outer_sum(&ops, &inner, p - 1, &mut norm)?;
        }
    }
    Ok(total)
}

fn outer_sum<F>(ops: &[&PauliSum], inner: &PauliSum, depth: usize, norm: &mut F) -> Result<f64>
where
    F: FnMut(&PauliSum) -> Result<f64>,
{
    if inner.is_zero() {
        return Ok(0.0);
    }
    if depth == 0 {
        return norm(inner);
    }
    let mut s = 0.0;
    for op in ops {
        s += outer_sum(ops, &op.commutator(inner)?, depth - 1, norm)?;
    }
    Ok(s)
}

fn scaled_commutator_bound(
    name: &str,
    sum: f64,
    h: &HamiltonianInstance,
    p: usize,
    t: f64,
    r: u64,
    mode: ConstantMode,
) -> Result<BoundReport> {
    let rf = r as f64;
    let base = sum * t.powi(p as i32 + 1) / rf.powi(p as i32);
    let stages = StageList::for_order(p)?.len() as f64;
    let (value, flag) = match mode {
        ConstantMode::Omitted => (base, Some(O_CONSTANT_OMITTED)),
        ConstantMode::Proof => (2.0 * stages.powi(p as i32 + 1) * base, None),
    };
    let mut rep = BoundReport::new(name, value, t, r, p)
        .param("groups", h.groups.len() as f64)
        .param("stages", stages);
    if let Some(f) = flag {
        rep.flags.push(f.into());
    }
    Ok(rep)
}

/// `T_p t^{p+1}/r^p` with `T_p` the normalized Frobenius commutator sum.
pub fn tp_bound(
    h: &HamiltonianInstance,
    p: usize,
    t: f64,
    r: u64,
    term_cap: u64,
    mode: ConstantMode,
) -> Result<BoundReport> {
    check_r(r)?;
    StageList::for_order(p)?;
    let tp = nested_tuple_sum(h, p, term_cap, |c| Ok(c.frobenius_normalized()))?;
    Ok(scaled_commutator_bound("tp", tp, h, p, t, r, mode)?.with("T_p", tp))
}

/// `α_comm,p t^{p+1}/r^p` with spectral norms.
pub fn worst_case_bound(
    h: &HamiltonianInstance,
    p: usize,
    t: f64,
    r: u64,
    method: NormMethod,
    term_cap: u64,
    mode: ConstantMode,
) -> Result<BoundReport> {
    check_r(r)?;
    StageList::for_order(p)?;
    let opts = NormOptions::default();
    let a = nested_tuple_sum(h, p, term_cap, |c| c.spectral_norm_with(method, &opts))?;
    Ok(scaled_commutator_bound("worst", a, h, p, t, r, mode)?.with("alpha_comm", a))
}

fn magnitude_commutator(
    a: &[(PauliString, f64)],
    b: &[(PauliString, f64)],
) -> Vec<(PauliString, f64)> {
    let mut acc: HashMap<PauliString, f64> = HashMap::new();
    for (p, x) in a {
        for (q, y) in b {
            if !p.commutes_with(q) {
                let (_, s) = p.mul_raw(q);
                *acc.entry(s).or_insert(0.0) += 2.0 * x * y;
            }
        }
    }
    acc.into_iter().collect()
}

fn magnitude_sq(v: &[(PauliString, f64)]) -> f64 {
    v.iter().map(|(_, c)| c * c).sum()
}

/// Counting bound for the even-odd nearest-neighbor chain.
///
/// `p = 1` is the closed form `2√2 n t²/r`. For `p = 2` both double
/// commutators are expanded on unit-strength couplings and fields, with the
/// magnitudes of all contributions to a string added, so every field value in
/// `[-1, 1]` is covered.
pub fn counting_bound_nn(n: usize, t: f64, r: u64, p: usize) -> Result<BoundReport> {
    check_r(r)?;
    let rf = r as f64;
    match p {
        1 => Ok(
            BoundReport::new("counting", 2.0 * 2f64.sqrt() * n as f64 * t * t / rf, t, r, 1)
                .with("T1'_count", 4.0 * 2f64.sqrt() * n as f64)
                .param("n", n as f64),
        ),
        2 => {
            let h = heisenberg_1d(n, 0)?;
            let unit = |op: &PauliSum| -> Vec<(PauliString, f64)> {
                op.terms().iter().map(|(p, _)| (*p, 1.0)).collect()
            };
            let a = unit(&h.groups[0].op);
            let b = unit(&h.groups[1].op);
            let bba = magnitude_commutator(&b, &magnitude_commutator(&b, &a));
            let aab = magnitude_commutator(&a, &magnitude_commutator(&a, &b));
            let (k_bba, k_aab) = (magnitude_sq(&bba), magnitude_sq(&aab));
            let t2 = k_bba.sqrt() / 12.0 + k_aab.sqrt() / 24.0;
            Ok(BoundReport::new("counting", t.powi(3) / (rf * rf) * t2, t, r, 2)
                .with("T2'_count", t2)
                .with("count_BBA", k_bba)
                .with("count_AAB", k_aab)
                .param("n", n as f64))
        }
        _ => Err(Error::arg("counting bound is defined for p = 1 and p = 2")),
    }
}

/// Counting bound for the power-law chain under the X-Y-Z grouping, PF1.
pub fn counting_bound_power_law(n: usize, alpha: f64, t: f64, r: u64) -> Result<BoundReport> {
    check_r(r)?;
    if n < 2 {
        return Err(Error::arg("power-law chain needs n >= 2"));
    }
    let w = |a: usize, b: usize| (a.abs_diff(b) as f64).powf(-2.0 * alpha);
    let mut triple = 0.0;
    for k in 0..n {
        let s: f64 = (0..n).filter(|&j| j != k).map(|j| w(j, k)).sum();
        triple += s * s;
    }
    let mut pairs = 0.0;
    for j in 0..n {
        for k in j + 1..n {
            pairs += 2.0 * w(j, k);
        }
    }
    let bracket = triple + pairs;
    let t1 = 2.0 * (2f64.sqrt() + 1.0) * bracket.sqrt();
    Ok(
        BoundReport::new("counting", t * t / (2.0 * r as f64) * t1, t, r, 1)
            .with("T1'_count", t1)
            .with("triple_sum", triple)
            .with("pair_sum", pairs)
            .param("n", n as f64)
            .param("alpha", alpha),
    )
}

/// Which value of `‖H‖` enters the interference prefactor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianNorm {
    /// `‖H‖ ≤ 4n`.
    #[default]
    FourN,
    Computed,
}

/// `r`-independent ingredients of the interference bound for `H = A + B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterferenceInputs {
    pub n: usize,
    pub h_norm: f64,
    /// `‖[A, B]‖`.
    pub comm_norm: f64,
    /// `Tr(|[A,[H,B]]|²)/d`.
    pub v3_frob_sq: f64,
}

pub const INTERFERENCE_C: f64 = 2048.0 / (std::f64::consts::E * std::f64::consts::E * (std::f64::consts::E - 1.0));

fn best_norm(op: &PauliSum) -> Result<f64> {
    if op.n() <= 10 {
        op.spectral_norm(NormMethod::Dense)
    } else {
        op.spectral_norm(NormMethod::PowerIteration)
    }
}

impl InterferenceInputs {
    pub fn new(h: &HamiltonianInstance, norm: HamiltonianNorm) -> Result<Self> {
        if h.groups.len() != 2 {
            return Err(Error::arg("interference bound needs exactly two groups"));
        }
        let a = &h.groups[0].op;
        let b = &h.groups[1].op;
        let total = h.total();
        let h_norm = match norm {
            HamiltonianNorm::FourN => 4.0 * h.n as f64,
            HamiltonianNorm::Computed => best_norm(&total)?,
        };
        let v3 = a.commutator(&total.commutator(b)?)?;
        Ok(InterferenceInputs {
            n: h.n,
            h_norm,
            comm_norm: best_norm(&a.commutator(b)?)?,
            v3_frob_sq: v3.frobenius_normalized().powi(2),
        })
    }

    pub fn evaluate(&self, t: f64, r: u64) -> Result<BoundReport> {
        check_r(r)?;
        let e = std::f64::consts::E;
        let rf = r as f64;
        let n = self.n as f64;
        let s = t / rf;
        let theta = t * self.h_norm / rf;
        let x = t * t * self.comm_norm / (2.0 * rf);
        let ok = x < 1.0 && theta < 1.0 && e * theta < 1.0 && n * s < 1.0;
        let sf = n.sqrt() * s * s / (1.0 - theta).powi(2);
        let geo = (1.0 / (1.0 - e * theta)).powi(2) - 1.0;
        let vv = INTERFERENCE_C.powi(2) * e * e * self.h_norm.powi(2) * s.powi(6) * geo / (36.0 * n)
            + self.v3_frob_sq * s.powi(6) / 36.0;
        let delta = if t == 0.0 { 0.0 } else { 2.0 / s * sf + rf * vv.sqrt() };
        let value = if t == 0.0 {
            0.0
        } else if ok {
            delta / (1.0 - x)
        } else {
            f64::INFINITY
        };
        let mut rep = BoundReport::new("interference", value, t, r, 1)
            .with("sum_F_normalized", sf)
            .with("trVV_normalized", vv)
            .with("delta1_normalized", delta)
            .with("r_M1_bound", x)
            .with("t_normH_over_r", theta)
            .param("n", n)
            .param("h_norm", self.h_norm)
            .param("comm_norm", self.comm_norm)
            .param("v3_frob_sq", self.v3_frob_sq);
        rep.assumptions_ok = ok || t == 0.0;
        Ok(rep)
    }

    /// Lower envelope `max(‖[A,B]‖t²/2, √n t/ε, n^{1/4} t^{3/2}/√ε)` of the regime rule.
    pub fn regime_rule(&self, t: f64, eps: f64) -> f64 {
        let n = self.n as f64;
        (self.comm_norm * t * t / 2.0)
            .max(n.sqrt() * t / eps)
            .max(n.powf(0.25) * t.powf(1.5) / eps.sqrt())
    }
}

pub fn interference_bound(
    h: &HamiltonianInstance,
    t: f64,
    r: u64,
    norm: HamiltonianNorm,
) -> Result<BoundReport> {
    InterferenceInputs::new(h, norm)?.evaluate(t, r)
}

fn ln2_term(k: usize) -> f64 {
    let k1 = (k + 1) as f64;
    (k1 * std::f64::consts::LN_2.ln() - ln_gamma(k1 + 1.0)).exp()
}

/// Truncated Taylor series: `(average, worst)` with the big-O constant omitted.
pub fn taylor_average_bound(coeffs: &[f64], t: f64, k: usize) -> Result<(f64, f64)> {
    if coeffs.is_empty() || coeffs.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::arg("Taylor coefficients must be positive"));
    }
    let alpha: f64 = coeffs.iter().sum();
    let amax = coeffs.iter().cloned().fold(0.0, f64::max);
    let tail = ln2_term(k);
    Ok(((amax * alpha).sqrt() * t * tail, alpha * t * tail))
}

/// `(Tr(H^j)/d, α^{j-1} max α_i)` for a positive combination of distinct strings.
pub fn trace_power_check(h: &PauliSum, j: u32) -> Result<(f64, f64)> {
    if h.n() > 4 {
        return Err(Error::cap("trace power check is dense and limited to n <= 4"));
    }
    if j == 0 {
        return Err(Error::arg("power must be >= 1"));
    }
    let coeffs: Vec<f64> = h.terms().iter().map(|(_, c)| c.re).collect();
    if coeffs.is_empty() || h.terms().iter().any(|(_, c)| !(c.re > 0.0) || c.im != 0.0) {
        return Err(Error::arg("coefficients must be positive reals"));
    }
    let m = h.to_dense();
    let d = m.nrows();
    let mut pow = CMatrix::identity(d, d);
    for _ in 0..j {
        pow = &pow * &m;
    }
    let lhs = linalg::trace(&pow).re / d as f64;
    let alpha: f64 = coeffs.iter().sum();
    let amax = coeffs.iter().cloned().fold(0.0, f64::max);
    Ok((lhs, alpha.powi(j as i32 - 1) * amax))
}

fn moments(m: &CMatrix) -> (f64, f64, Complex64) {
    (m.nrows() as f64, linalg::frobenius_sq(m), linalg::trace(m))
}

/// Haar-average fidelity `E|⟨ψ|U₀†U|ψ⟩|²`.
pub fn fidelity_exact(m: &CMatrix) -> f64 {
    let (d, f2, tr) = moments(m);
    1.0 - f2 / (d + 1.0) + tr.norm_sqr() / (d * (d + 1.0))
}

/// Bracket on the average trace distance.
pub fn trace_norm_bounds(m: &CMatrix) -> (f64, f64) {
    let (d, f2, tr) = moments(m);
    let inner = (f2 / (d + 1.0) - tr.norm_sqr() / (d * (d + 1.0))).max(0.0);
    let f = (1.0 - inner).max(0.0);
    (2.0 * (1.0 - f.sqrt()), 2.0 * inner.sqrt())
}

/// Bound on the average outcome-probability change under a random projective measurement.
pub fn measurement_error_bound(m: &CMatrix) -> f64 {
    let (d, f2, tr) = moments(m);
    (2.0 * f2 / (d * (d + 1.0).powi(2)) - 2.0 * tr.norm_sqr() / (d * d * (d + 1.0).powi(2)))
        .max(0.0)
        .sqrt()
}

/// Haar average of `F²` for `A = I + M`.
pub fn fidelity_second_moment(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let a = m + CMatrix::identity(d, d);
    let ta = linalg::trace(&a);
    let ta2 = linalg::trace(&(&a * &a));
    let tad2 = ta2.conj();
    let df = d as f64;
    let num = ta.norm_sqr().powi(2)
        + ta.norm_sqr() * (4.0 * df + 8.0)
        + (ta2 * ta.conj() * ta.conj()).re
        + (ta * ta * tad2).re
        + ta2.norm_sqr()
        + 2.0 * df * df
        + 6.0 * df;
    num / ((df + 3.0) * (df + 2.0) * (df + 1.0) * df)
}

pub fn fidelity_variance(m: &CMatrix) -> f64 {
    fidelity_second_moment(m) - fidelity_exact(m).powi(2)
}

/// `‖M‖_F/√(2^{n-k})` for inputs with the first `k` qubits fixed.
pub fn subsystem_bound(m: &CMatrix, k: usize) -> Result<f64> {
    let d = m.nrows();
    let n = d.trailing_zeros() as usize;
    if k >= n {
        return Err(Error::arg("fixed register must leave at least one random qubit"));
    }
    Ok((linalg::frobenius_sq(m) / (1usize << (n - k)) as f64).sqrt())
}

/// `r d (‖m‖_F/√d)` for one-clean-qubit trace estimation.
pub fn trace_estimation_bound(m_frob_normalized: f64, r: u64, n: usize) -> f64 {
    r as f64 * (1u64 << n) as f64 * m_frob_normalized
}

pub fn multi_segment_total(per_segment: f64, r: u64) -> f64 {
    r as f64 * per_segment
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::EvolutionPlan;
    use crate::hamiltonian::{power_law, TermGroup};

    fn two_groups(a: &[(&str, f64)], b: &[(&str, f64)]) -> HamiltonianInstance {
        HamiltonianInstance::custom(vec![
            TermGroup {
                label: "A".into(),
                op: PauliSum::from_labels(a).unwrap(),
            },
            TermGroup {
                label: "B".into(),
                op: PauliSum::from_labels(b).unwrap(),
            },
        ])
        .unwrap()
    }

    fn dense_comm(a: &CMatrix, b: &CMatrix) -> CMatrix {
        a * b - b * a
    }

    fn fro_n(m: &CMatrix) -> f64 {
        (linalg::frobenius_sq(m) / m.nrows() as f64).sqrt()
    }

    #[test]
    fn mean_variance_scalar_cases() {
        let m = CMatrix::zeros(4, 4);
        assert_eq!(mean_variance_law(&m).unwrap(), (0.0, 0.0));
        let th: f64 = 0.7;
        let m = CMatrix::identity(4, 4) * (Complex64::from_polar(1.0, th) - 1.0);
        let (mean, _) = mean_variance_law(&m).unwrap();
        assert!((mean - (2.0 - 2.0 * th.cos())).abs() < 1e-12);
        let bad = CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0);
        assert!(matches!(mean_variance_law(&bad), Err(Error::Validation(_))));
    }

    #[test]
    fn triangle_two_site_dense() {
        let h = two_groups(&[("XX", 1.0), ("YY", 1.0), ("ZZ", 1.0), ("ZI", 0.3)], &[("IZ", -0.6)]);
        let a = h.groups[0].op.to_dense();
        let b = h.groups[1].op.to_dense();
        let (t, r) = (0.9, 3);
        let want = t * t / (2.0 * r as f64) * fro_n(&dense_comm(&a, &b));
        assert!((triangle_bound_pf1(&h, t, r).unwrap().value - want).abs() < 1e-12);
    }

    #[test]
    fn triangle_pf2_three_site_dense() {
        let h = heisenberg_1d(3, 8).unwrap();
        let a = h.groups[0].op.to_dense();
        let b = h.groups[1].op.to_dense();
        let s12 = fro_n(&dense_comm(&b, &dense_comm(&b, &a))) / 12.0;
        let s24 = fro_n(&dense_comm(&a, &dense_comm(&a, &b))) / 24.0;
        let rep = triangle_bound_pf2(&h, 1.0, 1).unwrap();
        assert!((rep.intermediates["T2'_twelfth"] - s12).abs() < 1e-10);
        assert!((rep.intermediates["T2'_twentyfourth"] - s24).abs() < 1e-10);
    }

    #[test]
    fn bounds_vanish_without_splitting() {
        let single = heisenberg_1d(4, 1).unwrap().merged();
        let commuting = two_groups(&[("ZZI", 1.0), ("IIZ", 0.5)], &[("IZZ", 1.0), ("ZII", 0.2)]);
        for h in [&single, &commuting] {
            assert_eq!(triangle_bound_pf1(h, 2.0, 1).unwrap().value, 0.0);
            assert_eq!(triangle_bound_pf2(h, 2.0, 1).unwrap().value, 0.0);
            for p in [1, 2, 4] {
                let v = tp_bound(h, p, 2.0, 1, DEFAULT_TERM_CAP, ConstantMode::Omitted).unwrap();
                assert_eq!(v.value, 0.0);
            }
        }
    }

    #[test]
    fn tp_two_groups_doubles_commutator() {
        let h = heisenberg_1d(4, 2).unwrap();
        let a = h.groups[0].op.to_dense();
        let b = h.groups[1].op.to_dense();
        let rep = tp_bound(&h, 1, 1.0, 1, DEFAULT_TERM_CAP, ConstantMode::Omitted).unwrap();
        assert!((rep.value - 2.0 * fro_n(&dense_comm(&a, &b))).abs() < 1e-10);
        assert_eq!(rep.flags, vec![O_CONSTANT_OMITTED.to_string()]);
        let proof = tp_bound(&h, 1, 1.0, 1, DEFAULT_TERM_CAP, ConstantMode::Proof).unwrap();
        assert!((proof.value - 2.0 * rep.value).abs() < 1e-12);
        let worst =
            worst_case_bound(&h, 1, 1.0, 1, NormMethod::Dense, DEFAULT_TERM_CAP, ConstantMode::Omitted)
                .unwrap();
        assert!(worst.value >= rep.value);
        assert!(tp_bound(&h, 4, 1.0, 1, 10, ConstantMode::Omitted).is_err());
    }

    #[test]
    fn tp_matches_brute_force_tuples() {
        let h = power_law(3, 1.0, 4).unwrap();
        let ops: Vec<CMatrix> = h.groups.iter().map(|g| g.op.to_dense()).collect();
        let l = ops.len();
        let mut want = 0.0;
        for i in 0..l {
            for j in 0..l {
                for k in 0..l {
                    want += fro_n(&dense_comm(&ops[i], &dense_comm(&ops[j], &ops[k])));
                }
            }
        }
        let got = tp_bound(&h, 2, 1.0, 1, DEFAULT_TERM_CAP, ConstantMode::Omitted).unwrap();
        assert!((got.intermediates["T_p"] - want).abs() < 1e-10);
    }

    #[test]
    fn counting_nn_values() {
        let rep = counting_bound_nn(10, 1.0, 1, 1).unwrap();
        assert!((rep.value - 2.0 * 2f64.sqrt() * 10.0).abs() < 1e-12);
        assert!((counting_bound_nn(20, 1.0, 1, 1).unwrap().value / rep.value - 2.0).abs() < 1e-12);
        for n in 3..=8 {
            for seed in 0..3 {
                let h = heisenberg_1d(n, seed).unwrap();
                for p in [1, 2] {
                    let c = counting_bound_nn(n, 1.3, 2, p).unwrap().value;
                    let t = triangle_bound(&h, p, 1.3, 2).unwrap().value;
                    assert!(c >= t, "n = {n}, p = {p}: {c} < {t}");
                }
            }
        }
    }

    #[test]
    fn counting_power_law_values() {
        // α = 0, n = 3: twelve ordered triples and three pairs of weight 2.
        let rep = counting_bound_power_law(3, 0.0, 1.0, 1).unwrap();
        assert_eq!(rep.intermediates["triple_sum"], 12.0);
        assert_eq!(rep.intermediates["pair_sum"], 6.0);
        let want = 0.5 * 2.0 * (2f64.sqrt() + 1.0) * 18f64.sqrt();
        assert!((rep.value - want).abs() < 1e-12);
        assert!((rep.value - 10.242640687119284).abs() < 1e-12);
        // Large α keeps nearest neighbours only.
        let far = counting_bound_power_law(5, 60.0, 1.0, 1).unwrap();
        assert!((far.intermediates["pair_sum"] - 8.0).abs() < 1e-12);
        assert!((far.intermediates["triple_sum"] - (1.0 + 4.0 + 4.0 + 4.0 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn interference_limits() {
        let h = heisenberg_1d(6, 1).unwrap();
        let inp = InterferenceInputs::new(&h, HamiltonianNorm::FourN).unwrap();
        assert_eq!(inp.evaluate(0.0, 100).unwrap().value, 0.0);
        let small = inp.evaluate(1e-3, 100).unwrap();
        assert!(small.assumptions_ok && small.value < 1e-3);
        let bad = inp.evaluate(5.0, 2).unwrap();
        assert!(!bad.assumptions_ok);
        assert!(bad.value.is_infinite());
    }

    #[test]
    fn taylor_ratios() {
        let (avg, worst) = taylor_average_bound(&[0.5; 4], 2.0, 3).unwrap();
        assert!((avg / worst - 0.5).abs() < 1e-12);
        let (a1, w1) = taylor_average_bound(&[1.3], 2.0, 3).unwrap();
        assert!((a1 - w1).abs() < 1e-14);
        let (a2, _) = taylor_average_bound(&[1.3], 2.0, 4).unwrap();
        assert!((a2 / a1 - std::f64::consts::LN_2 / 5.0).abs() < 1e-12);
        assert!(taylor_average_bound(&[1.0, 0.0], 1.0, 2).is_err());
    }

    #[test]
    fn trace_powers() {
        let h = PauliSum::from_labels(&[("X", 1.0), ("Z", 1.0)]).unwrap();
        let (l, r) = trace_power_check(&h, 2).unwrap();
        assert!((l - 2.0).abs() < 1e-12 && (r - 2.0).abs() < 1e-12);
        let h = PauliSum::from_labels(&[("XZY", 0.3), ("ZZI", 0.9), ("IYX", 0.2), ("XII", 0.5)]).unwrap();
        let (l, r) = trace_power_check(&h, 4).unwrap();
        assert!(l <= r);
    }

    #[test]
    fn closed_forms_at_zero_and_phase() {
        let z = CMatrix::zeros(8, 8);
        assert_eq!(fidelity_exact(&z), 1.0);
        assert_eq!(trace_norm_bounds(&z), (0.0, 0.0));
        assert_eq!(measurement_error_bound(&z), 0.0);
        assert!((fidelity_second_moment(&z) - 1.0).abs() < 1e-14);
        let ph = CMatrix::identity(8, 8) * (Complex64::from_polar(1.0, 0.4) - 1.0);
        assert!((fidelity_exact(&ph) - 1.0).abs() < 1e-14);
        assert!((fidelity_second_moment(&ph) - 1.0).abs() < 1e-13);
        assert!(subsystem_bound(&z, 3).is_err());
    }

    #[test]
    fn closed_form_orderings() {
        let h = heisenberg_1d(3, 5).unwrap();
        let plan = EvolutionPlan::new(&h, 1, 0.8, 1).unwrap();
        let u = plan.unitary_dense().unwrap();
        let u0 = linalg::expm_hermitian(&h.total().to_dense(), 0.8);
        let m = multiplicative_error(&u, &u0);
        let (lo, hi) = trace_norm_bounds(&m);
        assert!(lo <= hi);
        let d = 8.0;
        assert!(hi <= 2.0 * (linalg::frobenius_sq(&m) / (d + 1.0)).sqrt() + 1e-15);
        assert!(measurement_error_bound(&m) <= hi);
        assert!(fidelity_variance(&m) >= 0.0);
        let s0 = subsystem_bound(&m, 0).unwrap();
        let s1 = subsystem_bound(&m, 1).unwrap();
        assert!(s1 > s0);
        assert!((s0 - fro_n(&m)).abs() < 1e-14);
        assert_eq!(trace_estimation_bound(0.1, 4, 3), 2.0 * trace_estimation_bound(0.1, 2, 3));
        assert_eq!(multi_segment_total(0.5, 1), 0.5);
    }
}

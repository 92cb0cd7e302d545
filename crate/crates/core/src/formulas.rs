//! Trotter–Suzuki schedules and their application.
//!
//! A formula of order `p` over groups `H_1..H_L` is a product of stages.
//! A forward stage with coefficient `a` is the operator
//! `e^{-i a τ H_1} e^{-i a τ H_2} ⋯ e^{-i a τ H_L}`; a reverse stage lists the
//! groups in the opposite order. The stage list is the left-to-right operator
//! product, so on a state the last stage acts first.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianInstance;
use crate::linalg::{self, CMatrix};
use crate::pauli::{i_pow, Pauli, PauliString, PauliSum};
use crate::state::StateVector;

/// Largest block (in qubits) exponentiated as a dense local gate.
pub const LOCAL_CAP: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Reverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub coeff: f64,
    pub direction: Direction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageList {
    pub order: usize,
    pub stages: Vec<Stage>,
}

/// `p_k = 1 / (4 - 4^{1/(2k-1)})`.
pub fn suzuki_p(k: usize) -> f64 {
    1.0 / (4.0 - 4f64.powf(1.0 / (2 * k - 1) as f64))
}

/// Stages of the order-`2k` Suzuki formula.
pub fn suzuki_stages(k: usize) -> Result<StageList> {
    if k < 1 {
        return Err(Error::arg("Suzuki half-order must be >= 1"));
    }
    let mut stages = vec![
        Stage {
            coeff: 0.5,
            direction: Direction::Forward,
        },
        Stage {
            coeff: 0.5,
            direction: Direction::Reverse,
        },
    ];
    for j in 2..=k {
        let p = suzuki_p(j);
        let mut next = Vec::with_capacity(stages.len() * 5);
        for w in [p, p, 1.0 - 4.0 * p, p, p] {
            next.extend(stages.iter().map(|s| Stage {
                coeff: s.coeff * w,
                direction: s.direction,
            }));
        }
        stages = next;
    }
    Ok(StageList {
        order: 2 * k,
        stages,
    })
}

impl StageList {
    /// Order 1 (Lie–Trotter) or any even order.
    pub fn for_order(p: usize) -> Result<StageList> {
        match p {
            1 => Ok(StageList {
                order: 1,
                stages: vec![Stage {
                    coeff: 1.0,
                    direction: Direction::Forward,
                }],
            }),
            p if p >= 2 && p % 2 == 0 => suzuki_stages(p / 2),
            _ => Err(Error::arg(format!("unsupported formula order {p}"))),
        }
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn coeff_sum(&self) -> f64 {
        self.stages.iter().map(|s| s.coeff).sum()
    }

    /// `(group index, coefficient)` in operator-product order, left to right.
    pub fn exponentials(&self, groups: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(self.stages.len() * groups);
        for s in &self.stages {
            match s.direction {
                Direction::Forward => out.extend((0..groups).map(|l| (l, s.coeff))),
                Direction::Reverse => out.extend((0..groups).rev().map(|l| (l, s.coeff))),
            }
        }
        out
    }
}

/// `U_p(t/r)^r` for one instance.
#[derive(Clone, Debug)]
pub struct EvolutionPlan<'a> {
    pub hamiltonian: &'a HamiltonianInstance,
    pub t: f64,
    pub r: u64,
    pub stages: StageList,
}

impl<'a> EvolutionPlan<'a> {
    pub fn new(hamiltonian: &'a HamiltonianInstance, p: usize, t: f64, r: u64) -> Result<Self> {
        if r < 1 {
            return Err(Error::arg("r must be >= 1"));
        }
        if !t.is_finite() {
            return Err(Error::arg("t must be finite"));
        }
        Ok(EvolutionPlan {
            hamiltonian,
            t,
            r,
            stages: StageList::for_order(p)?,
        })
    }

    pub fn step(&self) -> f64 {
        self.t / self.r as f64
    }

    pub fn propagator(&self) -> Result<Segment> {
        let kernel = FormulaKernel::compile(self.hamiltonian)?;
        Ok(kernel.segment(&self.stages, self.step()))
    }

    /// Matrix-free `U_p(t/r)^r ψ`.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.n() != self.hamiltonian.n {
            return Err(Error::Dimension {
                expected: self.hamiltonian.dim(),
                found: psi.dim(),
            });
        }
        let seg = self.propagator()?;
        let mut out = psi.clone();
        seg.apply_repeated(&mut out, self.r);
        Ok(out)
    }

    /// Dense `U_p(t/r)^r` from full-size group exponentials.
    pub fn unitary_dense(&self) -> Result<CMatrix> {
        self.unitary_dense_capped(crate::DENSE_CAP)
    }

    pub fn unitary_dense_capped(&self, cap: usize) -> Result<CMatrix> {
        let h = self.hamiltonian;
        if h.n > cap {
            return Err(Error::cap(format!(
                "dense unitary at n = {} exceeds cap {cap}",
                h.n
            )));
        }
        let d = h.dim();
        let eigs: Vec<(Vec<f64>, CMatrix)> = h
            .groups
            .iter()
            .map(|g| linalg::hermitian_eig(&g.op.to_dense()))
            .collect();
        let tau = self.step();
        let mut cache: HashMap<(usize, u64), CMatrix> = HashMap::new();
        let mut seg = CMatrix::identity(d, d);
        for (l, a) in self.stages.exponentials(h.groups.len()) {
            let key = (l, (a * tau).to_bits());
            let u = cache
                .entry(key)
                .or_insert_with(|| linalg::unitary_from_eig(&eigs[l].0, &eigs[l].1, a * tau));
            seg *= &*u;
        }
        Ok(matrix_power(&seg, self.r))
    }
}

pub fn matrix_power(m: &CMatrix, mut e: u64) -> CMatrix {
    let d = m.nrows();
    let mut result = CMatrix::identity(d, d);
    let mut base = m.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Convenience wrapper for `EvolutionPlan::apply`.
pub fn pf_apply(plan: &EvolutionPlan<'_>, psi: &StateVector) -> Result<StateVector> {
    plan.apply(psi)
}

pub fn pf_unitary_dense(plan: &EvolutionPlan<'_>) -> Result<CMatrix> {
    plan.unitary_dense()
}

#[derive(Clone, Debug)]
enum BlockKernel {
    Scalar(f64),
    Local {
        offsets: Vec<usize>,
        vals: Vec<f64>,
        vecs: CMatrix,
    },
    /// Every string is diagonal after a fixed single-qubit basis change.
    Diagonal {
        basis: Vec<(usize, Pauli)>,
        energies: Vec<f64>,
    },
    /// Pairwise-commuting strings exponentiated one by one.
    Rotations(Vec<(PauliString, f64)>),
}

/// Exponentiation recipe for one internally structured group.
#[derive(Clone, Debug)]
pub struct GroupKernel {
    n: usize,
    blocks: Vec<BlockKernel>,
}

fn local_offsets(n: usize, qubits: &[usize]) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|m| {
            qubits.iter().enumerate().fold(0usize, |acc, (j, &q)| {
                if m & (1 << (k - 1 - j)) != 0 {
                    acc | (1 << (n - 1 - q))
                } else {
                    acc
                }
            })
        })
        .collect()
}

fn pairwise_commuting(op: &PauliSum) -> bool {
    let t = op.terms();
    (0..t.len()).all(|i| (i + 1..t.len()).all(|j| t[i].0.commutes_with(&t[j].0)))
}

fn uniform_basis(n: usize, op: &PauliSum) -> Option<Vec<(usize, Pauli)>> {
    let mut letters = vec![Pauli::I; n];
    for (p, _) in op.terms() {
        for q in p.support() {
            let l = p.letter(q);
            if letters[q] == Pauli::I {
                letters[q] = l;
            } else if letters[q] != l {
                return None;
            }
        }
    }
    Some(
        letters
            .into_iter()
            .enumerate()
            .filter(|(_, l)| *l != Pauli::I)
            .collect(),
    )
}

impl GroupKernel {
    pub fn compile(op: &PauliSum) -> Result<Self> {
        if !op.is_hermitian(1e-12) {
            return Err(Error::Validation("group is not Hermitian".into()));
        }
        let n = op.n();
        let mut blocks = Vec::new();
        for (qubits, block) in op.support_blocks() {
            if qubits.is_empty() {
                let c: f64 = block.terms().iter().map(|(_, c)| c.re).sum();
                blocks.push(BlockKernel::Scalar(c));
            } else if qubits.len() <= LOCAL_CAP {
                let (vals, vecs) = linalg::hermitian_eig(&block.restrict(&qubits).to_dense());
                blocks.push(BlockKernel::Local {
                    offsets: local_offsets(n, &qubits),
                    vals,
                    vecs,
                });
            } else if pairwise_commuting(&block) {
                if let Some(basis) = uniform_basis(n, &block) {
                    let d = 1usize << n;
                    let zs: Vec<(u64, f64)> = block
                        .terms()
                        .iter()
                        .map(|(p, c)| (p.support_mask(), c.re))
                        .collect();
                    let energies = (0..d)
                        .map(|b| {
                            zs.iter()
                                .map(|&(m, c)| {
                                    if ((b as u64) & m).count_ones() & 1 == 0 {
                                        c
                                    } else {
                                        -c
                                    }
                                })
                                .sum()
                        })
                        .collect();
                    blocks.push(BlockKernel::Diagonal { basis, energies });
                } else {
                    blocks.push(BlockKernel::Rotations(
                        block.terms().iter().map(|(p, c)| (*p, c.re)).collect(),
                    ));
                }
            } else {
                return Err(Error::cap(format!(
                    "non-commuting block on {} qubits exceeds local cap {LOCAL_CAP}",
                    qubits.len()
                )));
            }
        }
        Ok(GroupKernel { n, blocks })
    }

    /// Gates realizing `e^{-iτH}` in application order.
    fn gates(&self, tau: f64, out: &mut Vec<Gate>) {
        let n = self.n;
        for b in &self.blocks {
            match b {
                BlockKernel::Scalar(c) => out.push(Gate::Phase(Complex64::from_polar(1.0, -c * tau))),
                BlockKernel::Local {
                    offsets,
                    vals,
                    vecs,
                } => {
                    let u = linalg::unitary_from_eig(vals, vecs, tau);
                    out.push(Gate::local(offsets.clone(), &u));
                }
                BlockKernel::Diagonal { basis, energies } => {
                    for &(q, l) in basis {
                        if let Some(w) = to_z_basis(l) {
                            out.push(Gate::local(local_offsets(n, &[q]), &w.adjoint()));
                        }
                    }
                    out.push(Gate::Diagonal(
                        energies
                            .iter()
                            .map(|&e| Complex64::from_polar(1.0, -e * tau))
                            .collect(),
                    ));
                    for &(q, l) in basis {
                        if let Some(w) = to_z_basis(l) {
                            out.push(Gate::local(local_offsets(n, &[q]), &w));
                        }
                    }
                }
                BlockKernel::Rotations(terms) => {
                    for &(p, c) in terms {
                        let (s, co) = (c * tau).sin_cos();
                        out.push(Gate::Rotation { p, cos: co, sin: s });
                    }
                }
            }
        }
    }
}

/// `W` with `W Z W† = P` for the given letter.
fn to_z_basis(l: Pauli) -> Option<CMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    match l {
        Pauli::X => Some(CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])),
        // S·H
        Pauli::Y => Some(CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(0.0, h), c(0.0, -h)])),
        _ => None,
    }
}

#[derive(Clone, Debug)]
enum Gate {
    Phase(Complex64),
    Local1 {
        bit: usize,
        u: [Complex64; 4],
    },
    Local2 {
        hi: usize,
        lo: usize,
        u: [Complex64; 16],
    },
    /// Two-qubit gate that preserves the number of ones: blocks `{00}`,
    /// `{01, 10}`, `{11}`.
    Local2Exchange {
        hi: usize,
        lo: usize,
        u00: Complex64,
        mid: [Complex64; 4],
        u11: Complex64,
    },
    Local1Diag {
        bit: usize,
        d0: Complex64,
        d1: Complex64,
    },
    Local {
        offsets: Vec<usize>,
        u: Vec<Complex64>,
    },
    Diagonal(Vec<Complex64>),
    Rotation {
        p: PauliString,
        cos: f64,
        sin: f64,
    },
}

impl Gate {
    fn local(offsets: Vec<usize>, u: &CMatrix) -> Gate {
        let k = offsets.len();
        let row_major: Vec<Complex64> = (0..k * k).map(|i| u[(i / k, i % k)]).collect();
        let zero = |idx: &[usize]| idx.iter().all(|&i| row_major[i].norm() < 1e-15);
        match k {
            2 if zero(&[1, 2]) => Gate::Local1Diag {
                bit: offsets[1],
                d0: row_major[0],
                d1: row_major[3],
            },
            2 => Gate::Local1 {
                bit: offsets[1],
                u: [row_major[0], row_major[1], row_major[2], row_major[3]],
            },
            4 if zero(&[1, 2, 3, 4, 7, 8, 11, 12, 13, 14]) => Gate::Local2Exchange {
                hi: offsets[2],
                lo: offsets[1],
                u00: row_major[0],
                mid: [row_major[5], row_major[6], row_major[9], row_major[10]],
                u11: row_major[15],
            },
            4 => {
                let mut arr = [Complex64::new(0.0, 0.0); 16];
                arr.copy_from_slice(&row_major);
                Gate::Local2 {
                    hi: offsets[2],
                    lo: offsets[1],
                    u: arr,
                }
            }
            _ => Gate::Local {
                offsets,
                u: row_major,
            },
        }
    }

    /// Applies the gate to `bt` states stored interleaved: amplitude `b` of
    /// state `s` lives at `b * bt + s`.
    fn apply_batch(&self, psi: &mut [Complex64], bt: usize) {
        let d = psi.len() / bt;
        match self {
            Gate::Phase(c) => psi.iter_mut().for_each(|v| *v *= c),
            Gate::Local1 { bit, u } => {
                let b = *bit;
                let mut base = 0;
                while base < d {
                    for i in base..base + b {
                        let (x0, x1) = (i * bt, (i | b) * bt);
                        for s in 0..bt {
                            let (a0, a1) = (psi[x0 + s], psi[x1 + s]);
                            psi[x0 + s] = u[0] * a0 + u[1] * a1;
                            psi[x1 + s] = u[2] * a0 + u[3] * a1;
                        }
                    }
                    base += 2 * b;
                }
            }
            Gate::Local1Diag { bit, d0, d1 } => {
                for (b, chunk) in psi.chunks_exact_mut(bt).enumerate() {
                    let f = if b & bit == 0 { d0 } else { d1 };
                    chunk.iter_mut().for_each(|v| *v *= f);
                }
            }
            Gate::Local2Exchange {
                hi,
                lo,
                u00,
                mid,
                u11,
            } => {
                let (h, l) = (*hi, *lo);
                let (big, small) = if h > l { (h, l) } else { (l, h) };
                let mut a = 0;
                while a < d {
                    let mut c = a;
                    while c < a + big {
                        for b in c..c + small {
                            let (x0, x1, x2, x3) =
                                (b * bt, (b | l) * bt, (b | h) * bt, (b | h | l) * bt);
                            for s in 0..bt {
                                psi[x0 + s] *= u00;
                                psi[x3 + s] *= u11;
                                let (a1, a2) = (psi[x1 + s], psi[x2 + s]);
                                psi[x1 + s] = mid[0] * a1 + mid[1] * a2;
                                psi[x2 + s] = mid[2] * a1 + mid[3] * a2;
                            }
                        }
                        c += 2 * small;
                    }
                    a += 2 * big;
                }
            }
            Gate::Local2 { hi, lo, u } => {
                let (h, l) = (*hi, *lo);
                let (big, small) = if h > l { (h, l) } else { (l, h) };
                let mut a = 0;
                while a < d {
                    let mut b = a;
                    while b < a + big {
                        for i in b..b + small {
                            let idx = [i * bt, (i | l) * bt, (i | h) * bt, (i | h | l) * bt];
                            for s in 0..bt {
                                let v = [
                                    psi[idx[0] + s],
                                    psi[idx[1] + s],
                                    psi[idx[2] + s],
                                    psi[idx[3] + s],
                                ];
                                for (row, &j) in idx.iter().enumerate() {
                                    let r = &u[4 * row..4 * row + 4];
                                    psi[j + s] =
                                        r[0] * v[0] + r[1] * v[1] + r[2] * v[2] + r[3] * v[3];
                                }
                            }
                        }
                        b += 2 * small;
                    }
                    a += 2 * big;
                }
            }
            Gate::Local { offsets, u } => {
                let k = offsets.len();
                let mask: usize = offsets.iter().fold(0, |m, &o| m | o);
                let mut v = vec![Complex64::new(0.0, 0.0); k];
                for base in 0..d {
                    if base & mask != 0 {
                        continue;
                    }
                    for s in 0..bt {
                        for (m, &o) in offsets.iter().enumerate() {
                            v[m] = psi[(base | o) * bt + s];
                        }
                        for (row, &o) in offsets.iter().enumerate() {
                            let r = &u[row * k..(row + 1) * k];
                            psi[(base | o) * bt + s] = r.iter().zip(&v).map(|(a, b)| a * b).sum();
                        }
                    }
                }
            }
            Gate::Diagonal(ph) => {
                for (chunk, p) in psi.chunks_exact_mut(bt).zip(ph) {
                    chunk.iter_mut().for_each(|v| *v *= p);
                }
            }
            Gate::Rotation { p, cos, sin } => {
                let x = p.x_mask() as usize;
                let z = p.z_mask();
                let y = i_pow(p.y_count());
                let ms = Complex64::new(0.0, -sin);
                let phase = |b: usize| {
                    if ((b as u64) & z).count_ones() & 1 == 0 {
                        y
                    } else {
                        -y
                    }
                };
                if x == 0 {
                    for (b, chunk) in psi.chunks_exact_mut(bt).enumerate() {
                        let f = cos + ms * phase(b);
                        chunk.iter_mut().for_each(|v| *v *= f);
                    }
                } else {
                    for b in 0..d {
                        let b2 = b ^ x;
                        if b2 < b {
                            continue;
                        }
                        // P|b2⟩ = phase(b2)|b⟩
                        let (f1, f2) = (ms * phase(b2), ms * phase(b));
                        for s in 0..bt {
                            let (v1, v2) = (psi[b * bt + s], psi[b2 * bt + s]);
                            psi[b * bt + s] = v1 * cos + f1 * v2;
                            psi[b2 * bt + s] = v2 * cos + f2 * v1;
                        }
                    }
                }
            }
        }
    }
}

/// Compiled group exponentials of one instance.
#[derive(Clone, Debug)]
pub struct FormulaKernel {
    n: usize,
    groups: Vec<GroupKernel>,
}

impl FormulaKernel {
    pub fn compile(h: &HamiltonianInstance) -> Result<Self> {
        let groups = h
            .groups
            .iter()
            .map(|g| GroupKernel::compile(&g.op))
            .collect::<Result<Vec<_>>>()?;
        Ok(FormulaKernel { n: h.n, groups })
    }

    /// Gate sequence for one segment `U_p(τ)`.
    pub fn segment(&self, stages: &StageList, tau: f64) -> Segment {
        let mut per_group: HashMap<(usize, u64), Vec<Gate>> = HashMap::new();
        let mut gates = Vec::new();
        for (l, a) in stages.exponentials(self.groups.len()).into_iter().rev() {
            let key = (l, (a * tau).to_bits());
            let g = per_group.entry(key).or_insert_with(|| {
                let mut v = Vec::new();
                self.groups[l].gates(a * tau, &mut v);
                v
            });
            gates.extend(g.iter().cloned());
        }
        Segment { n: self.n, gates }
    }

    /// Gate sequence for `U_p(τ)†`.
    pub fn segment_adjoint(&self, stages: &StageList, tau: f64) -> Segment {
        let mut per_group: HashMap<(usize, u64), Vec<Gate>> = HashMap::new();
        let mut gates = Vec::new();
        for (l, a) in stages.exponentials(self.groups.len()) {
            let key = (l, (-a * tau).to_bits());
            let g = per_group.entry(key).or_insert_with(|| {
                let mut v = Vec::new();
                self.groups[l].gates(-a * tau, &mut v);
                v
            });
            gates.extend(g.iter().cloned());
        }
        Segment { n: self.n, gates }
    }
}

/// Packs states so amplitude `b` of state `s` sits at `b * len + s`.
pub fn interleave(states: &[StateVector]) -> Vec<Complex64> {
    let bt = states.len();
    let d = states.first().map_or(0, |s| s.dim());
    let mut out = vec![Complex64::new(0.0, 0.0); d * bt];
    for (s, st) in states.iter().enumerate() {
        for (b, a) in st.iter().enumerate() {
            out[b * bt + s] = *a;
        }
    }
    out
}

pub fn deinterleave(data: &[Complex64], batch: usize) -> Vec<StateVector> {
    let d = data.len() / batch;
    (0..batch)
        .map(|s| {
            StateVector::new((0..d).map(|b| data[b * batch + s]).collect())
                .expect("power-of-two length")
        })
        .collect()
}

/// One product-formula segment as an ordered gate list.
#[derive(Clone, Debug)]
pub struct Segment {
    n: usize,
    gates: Vec<Gate>,
}

impl Segment {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn apply(&self, psi: &mut [Complex64]) {
        self.apply_batch(psi, 1);
    }

    pub fn apply_repeated(&self, psi: &mut [Complex64], r: u64) {
        self.apply_batch_repeated(psi, 1, r);
    }

    /// One segment on `batch` interleaved states (see [`interleave`]).
    pub fn apply_batch(&self, data: &mut [Complex64], batch: usize) {
        debug_assert_eq!(data.len(), batch << self.n);
        for g in &self.gates {
            g.apply_batch(data, batch);
        }
    }

    pub fn apply_batch_repeated(&self, data: &mut [Complex64], batch: usize, r: u64) {
        for _ in 0..r {
            self.apply_batch(data, batch);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{heisenberg_1d, power_law, TermGroup};

    #[test]
    fn second_order_stages() {
        let s = suzuki_stages(1).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.stages[0].coeff, 0.5);
        assert_eq!(s.stages[1].direction, Direction::Reverse);
        assert!(suzuki_stages(0).is_err());
    }

    #[test]
    fn fourth_order_stages() {
        let p2 = 1.0 / (4.0 - 4f64.powf(1.0 / 3.0));
        assert!((suzuki_p(2) - 0.4144907717943757).abs() < 1e-15);
        assert_eq!(suzuki_p(2), p2);
        let s = suzuki_stages(2).unwrap();
        assert_eq!(s.len(), 10);
        assert!((s.stages[4].coeff - (1.0 - 4.0 * p2) / 2.0).abs() < 1e-15);
        assert!((s.stages[5].coeff - (1.0 - 4.0 * p2) / 2.0).abs() < 1e-15);
        for k in 1..5 {
            let s = suzuki_stages(k).unwrap();
            assert_eq!(s.len(), 2 * 5usize.pow(k as u32 - 1));
            assert!((s.coeff_sum() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn odd_orders_rejected() {
        assert!(StageList::for_order(3).is_err());
        assert!(StageList::for_order(0).is_err());
        assert_eq!(StageList::for_order(1).unwrap().len(), 1);
    }

    #[test]
    fn zero_time_is_identity() {
        let h = heisenberg_1d(3, 1).unwrap();
        let plan = EvolutionPlan::new(&h, 2, 0.0, 3).unwrap();
        let u = plan.unitary_dense().unwrap();
        assert!(linalg::max_abs_diff(&u, &CMatrix::identity(8, 8)) < 1e-14);
    }

    #[test]
    fn single_group_is_exact() {
        let h = heisenberg_1d(3, 2).unwrap().merged();
        let exact = linalg::expm_hermitian(&h.total().to_dense(), 0.7);
        for p in [1, 2, 4] {
            let u = EvolutionPlan::new(&h, p, 0.7, 3).unwrap().unitary_dense().unwrap();
            assert!(linalg::max_abs_diff(&u, &exact) < 1e-10);
        }
    }

    #[test]
    fn large_noncommuting_block_is_rejected() {
        let op = PauliSum::from_labels(&[
            ("XXIII", 1.0),
            ("IZZII", 1.0),
            ("IIXXI", 1.0),
            ("IIIZZ", 1.0),
        ])
        .unwrap();
        let h = HamiltonianInstance::custom(vec![TermGroup {
            label: "g".into(),
            op,
        }])
        .unwrap();
        let plan = EvolutionPlan::new(&h, 1, 1.0, 1).unwrap();
        assert!(matches!(
            plan.apply(&StateVector::zero_state(5)),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn power_law_groups_compile_to_diagonals() {
        let h = power_law(6, 1.0, 3).unwrap();
        let k = FormulaKernel::compile(&h).unwrap();
        assert!(k.groups.iter().all(|g| matches!(g.blocks[0], BlockKernel::Diagonal { .. })));
    }

    fn check_apply_matches_dense(h: &HamiltonianInstance, p: usize, t: f64, r: u64) {
        let plan = EvolutionPlan::new(h, p, t, r).unwrap();
        let u = plan.unitary_dense().unwrap();
        let mut rng = crate::rng::from_seed(11);
        let amps: Vec<Complex64> = (0..h.dim())
            .map(|_| Complex64::new(crate::rng::uniform(&mut rng, -1.0, 1.0), crate::rng::uniform(&mut rng, -1.0, 1.0)))
            .collect();
        let mut psi = StateVector::new(amps).unwrap();
        psi.normalize();
        let fast = plan.apply(&psi).unwrap();
        let slow = linalg::mat_vec(&u, &psi);
        let err: f64 = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-10, "p = {p}: {err}");
    }

    #[test]
    fn matrix_free_matches_dense() {
        let heis = heisenberg_1d(5, 4).unwrap();
        let pl = power_law(6, 1.5, 5).unwrap();
        let kl = crate::hamiltonian::k_local_random(5, 3, 2, 6).unwrap();
        for p in [1, 2, 4] {
            check_apply_matches_dense(&heis, p, 0.9, 3);
            check_apply_matches_dense(&pl, p, 0.6, 2);
            check_apply_matches_dense(&kl, p, 0.8, 2);
        }
    }

    #[test]
    fn commuting_rotations_match_dense() {
        let a = PauliSum::from_labels(&[("XXXXXX", 0.3), ("ZZZZZZ", -0.7), ("YYYYYY", 0.2), ("IIIIII", 0.4)]).unwrap();
        let b = PauliSum::from_labels(&[("ZIIIII", 0.5), ("IXIIII", 0.5)]).unwrap();
        let h = HamiltonianInstance::custom(vec![
            TermGroup { label: "a".into(), op: a },
            TermGroup { label: "b".into(), op: b },
        ])
        .unwrap();
        let k = FormulaKernel::compile(&h).unwrap();
        assert!(k.groups[0].blocks.iter().any(|b| matches!(b, BlockKernel::Rotations(_))));
        check_apply_matches_dense(&h, 1, 1.3, 2);
        check_apply_matches_dense(&h, 2, 1.3, 2);
    }
}

//! Symplectic Pauli strings and sparse Pauli sums.
//!
//! A string on `n` qubits is stored as two bit masks. Qubit `q` (0-based,
//! leftmost in labels) lives at bit `n - 1 - q`, which is also its bit in a
//! computational-basis index, so `dense(P) = σ_0 ⊗ σ_1 ⊗ … ⊗ σ_{n-1}`.
//! A `Y` letter is the pair `(x=1, z=1)`; its factor of `i` relative to
//! `X·Z` is applied whenever the string acts on a state.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Coefficients below this magnitude are dropped after every collection.
pub const PRUNE_TOL: f64 = 1e-14;

/// Masks are `u64`, so strings are limited to 64 qubits.
pub const MAX_QUBITS: usize = 64;

const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// Complex unit `i^k`.
pub fn i_pow(k: u32) -> Complex64 {
    I_POW[(k & 3) as usize]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::arg(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
    }
    Ok(())
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { n, x: 0, z: 0 }
    }

    /// Masks in basis-index bit order (qubit `q` at bit `n - 1 - q`).
    pub fn from_masks(n: usize, x: u64, z: u64) -> Result<Self> {
        check_qubits(n)?;
        let m = full_mask(n);
        if x & !m != 0 || z & !m != 0 {
            return Err(Error::arg("mask has bits outside the qubit range"));
        }
        Ok(PauliString { n, x, z })
    }

    /// Builds a string from `(qubit, letter)` pairs; later pairs overwrite earlier ones.
    pub fn from_sites(n: usize, sites: &[(usize, Pauli)]) -> Result<Self> {
        check_qubits(n)?;
        let mut s = PauliString::identity(n);
        for &(q, p) in sites {
            if q >= n {
                return Err(Error::arg(format!("qubit {q} out of range for n = {n}")));
            }
            s.set(q, p);
        }
        Ok(s)
    }

    fn set(&mut self, q: usize, p: Pauli) {
        let b = 1u64 << (self.n - 1 - q);
        let (px, pz) = p.bits();
        self.x = if px { self.x | b } else { self.x & !b };
        self.z = if pz { self.z | b } else { self.z & !b };
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        self.support_mask().count_ones()
    }

    pub fn letter(&self, q: usize) -> Pauli {
        let b = 1u64 << (self.n - 1 - q);
        Pauli::from_bits(self.x & b != 0, self.z & b != 0)
    }

    /// Qubits acted on nontrivially, in increasing order.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.letter(q) != Pauli::I).collect()
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones() % 2 == 0
    }

    /// Product `self · other = i^k · R`, returning `(k mod 4, R)`.
    pub(crate) fn mul_raw(&self, other: &PauliString) -> (u32, PauliString) {
        let (x1, z1, x2, z2) = (self.x, self.z, other.x, other.z);
        // cyclic pairs XY, YZ, ZX give +i; the reversed pairs give -i
        let plus = (x1 & !z1 & x2 & z2) | (x1 & z1 & !x2 & z2) | (!x1 & z1 & x2 & !z2);
        let minus = (x1 & z1 & x2 & !z2) | (!x1 & z1 & x2 & z2) | (x1 & !z1 & !x2 & z2);
        let k = (plus.count_ones() + 3 * minus.count_ones()) & 3;
        (
            k,
            PauliString {
                n: self.n,
                x: x1 ^ x2,
                z: z1 ^ z2,
            },
        )
    }

    pub fn multiply(&self, other: &PauliString) -> Result<(Complex64, PauliString)> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: other.n,
            });
        }
        let (k, r) = self.mul_raw(other);
        Ok((i_pow(k), r))
    }

    /// `P|b⟩ = phase · |b'⟩`.
    #[inline]
    pub fn act(&self, b: usize) -> (Complex64, usize) {
        let sign = ((b as u64) & self.z).count_ones() & 1;
        (i_pow(self.y_count() + 2 * sign), b ^ self.x as usize)
    }

    /// Restriction to an ordered list of qubits, as a string on `qubits.len()` qubits.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        let k = qubits.len();
        let mut out = PauliString::identity(k);
        for (j, &q) in qubits.iter().enumerate() {
            out.set(j, self.letter(q));
        }
        out
    }

    pub fn label(&self) -> String {
        (0..self.n).map(|q| self.letter(q).as_char()).collect()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let d = 1usize << self.n;
        let mut m = DMatrix::zeros(d, d);
        for b in 0..d {
            let (ph, c) = self.act(b);
            m[(c, b)] = ph;
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        check_qubits(s.chars().count())?;
        let n = s.chars().count();
        let mut p = PauliString::identity(n);
        for (q, c) in s.chars().enumerate() {
            let letter = Pauli::from_char(c).ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("bad Pauli letter {c:?}"),
            })?;
            p.set(q, letter);
        }
        Ok(p)
    }
}

/// Accumulates contributions keyed by string; `finish` sorts and prunes.
pub(crate) struct Collector {
    n: usize,
    map: HashMap<PauliString, Complex64>,
}

impl Collector {
    pub(crate) fn new(n: usize) -> Self {
        Collector {
            n,
            map: HashMap::new(),
        }
    }

    #[inline]
    pub(crate) fn add(&mut self, p: PauliString, c: Complex64) {
        *self.map.entry(p).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub(crate) fn finish(self) -> PauliSum {
        let mut terms: Vec<_> = self
            .map
            .into_iter()
            .filter(|(_, c)| c.norm() >= PRUNE_TOL)
            .collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        PauliSum { n: self.n, terms }
    }
}

/// Which algorithm [`PauliSum::spectral_norm`] uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    Dense,
    PowerIteration,
    CoefficientSumUpper,
}

impl FromStr for NormMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(NormMethod::Dense),
            "power" | "power_iteration" | "matrix_free_power_iteration" => {
                Ok(NormMethod::PowerIteration)
            }
            "coefficient_sum" | "coefficient_sum_upper" => Ok(NormMethod::CoefficientSumUpper),
            other => Err(Error::arg(format!("unknown norm method {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NormOptions {
    pub dense_cap: usize,
    pub max_iterations: usize,
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions {
            dense_cap: crate::DENSE_CAP,
            max_iterations: 10_000,
            rel_tol: 1e-8,
            seed: 0x5eed_0001,
        }
    }
}

/// Sparse linear combination of Pauli strings. Terms are sorted, unique and
/// never smaller than [`PRUNE_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: Vec<(PauliString, Complex64)>,
}

impl PauliSum {
    pub fn zero(n: usize) -> Self {
        PauliSum { n, terms: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        PauliSum::from_string(PauliString::identity(n), Complex64::new(1.0, 0.0))
    }

    pub fn from_string(p: PauliString, c: Complex64) -> Self {
        let mut col = Collector::new(p.n());
        col.add(p, c);
        col.finish()
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, Complex64)>,
    {
        let mut col = Collector::new(n);
        for (p, c) in terms {
            if p.n() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: p.n(),
                });
            }
            col.add(p, c);
        }
        Ok(col.finish())
    }

    /// Real-coefficient terms given by labels, e.g. `[("XX", 1.0), ("ZI", 0.5)]`.
    pub fn from_labels(terms: &[(&str, f64)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::arg("empty term list"))?;
        let n = first.0.trim().len();
        let parsed = terms
            .iter()
            .map(|(l, c)| Ok((l.parse::<PauliString>()?, Complex64::new(*c, 0.0))))
            .collect::<Result<Vec<_>>>()?;
        PauliSum::from_terms(n, parsed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    pub fn terms(&self) -> &[(PauliString, Complex64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, p: &PauliString) -> Complex64 {
        self.terms
            .binary_search_by(|(q, _)| q.cmp(p))
            .map(|i| self.terms[i].1)
            .unwrap_or_default()
    }

    fn check_same(&self, other: &PauliSum) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_same(other)?;
        let mut col = Collector::new(self.n);
        for &(p, c) in self.terms.iter().chain(other.terms.iter()) {
            col.add(p, c);
        }
        Ok(col.finish())
    }

    pub fn try_sub(&self, other: &PauliSum) -> Result<PauliSum> {
        self.try_add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> PauliSum {
        PauliSum::from_terms(self.n, self.terms.iter().map(|&(p, c)| (p, c * s)))
            .expect("same qubit count")
    }

    /// Sum of a slice of operators on the same qubits.
    pub fn sum<'a, I>(n: usize, parts: I) -> Result<PauliSum>
    where
        I: IntoIterator<Item = &'a PauliSum>,
    {
        let mut col = Collector::new(n);
        for part in parts {
            if part.n != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: part.n,
                });
            }
            for &(p, c) in &part.terms {
                col.add(p, c);
            }
        }
        Ok(col.finish())
    }

    pub fn product(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_same(other)?;
        let mut col = Collector::new(self.n);
        for &(p, a) in &self.terms {
            for &(q, b) in &other.terms {
                let (k, r) = p.mul_raw(&q);
                col.add(r, a * b * i_pow(k));
            }
        }
        Ok(col.finish())
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_same(other)?;
        let mut col = Collector::new(self.n);
        for &(p, a) in &self.terms {
            for &(q, b) in &other.terms {
                if !p.commutes_with(&q) {
                    let (k, r) = p.mul_raw(&q);
                    col.add(r, 2.0 * a * b * i_pow(k));
                }
            }
        }
        Ok(col.finish())
    }

    pub fn adjoint(&self) -> PauliSum {
        PauliSum {
            n: self.n,
            terms: self.terms.iter().map(|&(p, c)| (p, c.conj())).collect(),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.iter().all(|(_, c)| c.im.abs() <= tol)
    }

    /// `‖H‖_F / √d`.
    pub fn frobenius_normalized(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Σ |c_P|`, an upper bound on the spectral norm.
    pub fn coefficient_sum(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm()).sum()
    }

    /// Union of the supports of all terms, as a basis-index mask.
    pub fn support_mask(&self) -> u64 {
        self.terms.iter().fold(0, |m, (p, _)| m | p.support_mask())
    }

    /// Splits the operator into qubit-disjoint blocks: connected components
    /// of the "shares a qubit" relation between terms. Identity terms form a
    /// block with empty support. Blocks are ordered by their lowest qubit.
    pub fn support_blocks(&self) -> Vec<(Vec<usize>, PauliSum)> {
        let n = self.n;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for (p, _) in &self.terms {
            let sup = p.support();
            for w in sup.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut blocks: Vec<(Vec<usize>, Vec<(PauliString, Complex64)>)> = Vec::new();
        let mut index_of_root: HashMap<usize, usize> = HashMap::new();
        let mut identity_terms = Vec::new();
        for &(p, c) in &self.terms {
            let sup = p.support();
            let Some(&first) = sup.first() else {
                identity_terms.push((p, c));
                continue;
            };
            let root = find(&mut parent, first);
            let idx = *index_of_root.entry(root).or_insert_with(|| {
                blocks.push((Vec::new(), Vec::new()));
                blocks.len() - 1
            });
            blocks[idx].1.push((p, c));
        }
        for (qubits, terms) in blocks.iter_mut() {
            let mask = terms.iter().fold(0u64, |m, (p, _)| m | p.support_mask());
            *qubits = (0..n).filter(|&q| mask & (1u64 << (n - 1 - q)) != 0).collect();
        }
        blocks.sort_by_key(|(q, _)| q[0]);
        let mut out: Vec<(Vec<usize>, PauliSum)> = blocks
            .into_iter()
            .map(|(q, t)| (q, PauliSum::from_terms(n, t).expect("same n")))
            .collect();
        if !identity_terms.is_empty() {
            out.push((Vec::new(), PauliSum::from_terms(n, identity_terms).expect("same n")));
        }
        out
    }

    pub fn restrict(&self, qubits: &[usize]) -> PauliSum {
        let k = qubits.len();
        PauliSum::from_terms(k, self.terms.iter().map(|&(p, c)| (p.restrict(qubits), c)))
            .expect("restricted strings share qubit count")
    }

    fn check_state(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: len,
            });
        }
        Ok(())
    }

    /// `out = H ψ`.
    pub fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        self.check_state(psi.len())?;
        self.check_state(out.len())?;
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for &(p, c) in &self.terms {
            let base = c * i_pow(p.y_count());
            let x = p.x as usize;
            let z = p.z;
            if z == 0 {
                for (b, amp) in psi.iter().enumerate() {
                    out[b ^ x] += base * amp;
                }
            } else {
                let neg = -base;
                for (b, amp) in psi.iter().enumerate() {
                    let w = if ((b as u64) & z).count_ones() & 1 == 0 {
                        base
                    } else {
                        neg
                    };
                    out[b ^ x] += w * amp;
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply_into(psi, &mut out)?;
        Ok(out)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for &(p, c) in &self.terms {
            for b in 0..d {
                let (ph, r) = p.act(b);
                m[(r, b)] += c * ph;
            }
        }
        m
    }

    pub fn spectral_norm(&self, method: NormMethod) -> Result<f64> {
        self.spectral_norm_with(method, &NormOptions::default())
    }

    pub fn spectral_norm_with(&self, method: NormMethod, opts: &NormOptions) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        match method {
            NormMethod::CoefficientSumUpper => Ok(self.coefficient_sum()),
            NormMethod::Dense => {
                if self.n > opts.dense_cap {
                    return Err(Error::cap(format!(
                        "dense spectral norm at n = {} exceeds cap {}",
                        self.n, opts.dense_cap
                    )));
                }
                Ok(crate::linalg::spectral_norm(&self.to_dense()))
            }
            NormMethod::PowerIteration => self.power_iteration(opts),
        }
    }

    /// Largest singular value by power iteration on `H†H`.
    fn power_iteration(&self, opts: &NormOptions) -> Result<f64> {
        let d = self.dim();
        let adj = self.adjoint();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut v: Vec<Complex64> = (0..d)
            .map(|_| {
                Complex64::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                )
            })
            .collect();
        normalize(&mut v);
        let mut hv = vec![Complex64::new(0.0, 0.0); d];
        let mut w = vec![Complex64::new(0.0, 0.0); d];
        let mut prev = f64::NAN;
        let mut residual = f64::INFINITY;
        for _ in 0..opts.max_iterations {
            self.apply_into(&v, &mut hv)?;
            let lambda: f64 = hv.iter().map(|c| c.norm_sqr()).sum();
            adj.apply_into(&hv, &mut w)?;
            residual = w
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b * lambda).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if (lambda - prev).abs() < opts.rel_tol * lambda {
                return Ok(lambda.sqrt());
            }
            prev = lambda;
            let nw = norm(&w);
            if nw == 0.0 {
                return Ok(0.0);
            }
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / nw;
            }
        }
        Err(Error::Convergence {
            iterations: opts.max_iterations,
            residual,
        })
    }

    /// Emits the text format, one `re im LABEL` line per term.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (p, c) in &self.terms {
            s.push_str(&format!("{:?} {:?} {}\n", c.re, c.im, p));
        }
        s
    }

    /// Parses the text format. Blank lines and `#` comments are skipped.
    /// `n` is required when the text may contain no terms.
    pub fn from_text(text: &str, n: Option<usize>) -> Result<PauliSum> {
        let mut parsed = Vec::new();
        let mut width = n;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: &str| Error::Parse {
                line: i + 1,
                message: m.to_string(),
            };
            let mut it = line.split_whitespace();
            let re: f64 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad("bad real part"))?;
            let im: f64 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad("bad imaginary part"))?;
            let label = it.next().ok_or_else(|| bad("missing label"))?;
            if it.next().is_some() {
                return Err(bad("trailing tokens"));
            }
            let p: PauliString = label.parse().map_err(|_| bad("bad label"))?;
            match width {
                None => width = Some(p.n()),
                Some(w) if w != p.n() => return Err(bad("inconsistent label length")),
                _ => {}
            }
            parsed.push((p, Complex64::new(re, im)));
        }
        let n = width.ok_or_else(|| Error::arg("no terms and no qubit count given"))?;
        PauliSum::from_terms(n, parsed)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Right-nested commutator `[c₁,[c₂,…,[c_p,c_{p+1}]]]`.
pub fn nested_commutator(chain: &[&PauliSum]) -> Result<PauliSum> {
    if chain.len() < 2 {
        return Err(Error::arg("nested commutator needs at least two operands"));
    }
    let mut acc = chain[chain.len() - 1].clone();
    for op in chain[..chain.len() - 1].iter().rev() {
        acc = op.commutator(&acc)?;
        if acc.is_zero() {
            return Ok(PauliSum::zero(op.n()));
        }
    }
    Ok(acc)
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn normalize(v: &mut [Complex64]) {
    let nv = norm(v);
    if nv > 0.0 {
        v.iter_mut().for_each(|c| *c /= nv);
    }
}

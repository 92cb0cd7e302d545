//! Model Hamiltonians split into ordered term groups.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    #[serde(rename = "heisenberg_1d")]
    Heisenberg1d,
    PowerLaw,
    KLocalRandom,
    Custom,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Heisenberg1d => "heisenberg_1d",
            Model::PowerLaw => "power_law",
            Model::KLocalRandom => "k_local_random",
            Model::Custom => "custom",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "heisenberg_1d" | "heisenberg1d" | "heisenberg" | "nn" => Ok(Model::Heisenberg1d),
            "power_law" | "powerlaw" => Ok(Model::PowerLaw),
            "k_local_random" | "k_local" | "klocal" => Ok(Model::KLocalRandom),
            "custom" => Ok(Model::Custom),
            other => Err(Error::arg(format!("unknown model {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms_per_support: Option<usize>,
    /// Fields and random couplings are drawn from `[-field_range, field_range]`.
    #[serde(default = "one")]
    pub field_range: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct TermGroup {
    pub label: String,
    pub op: PauliSum,
}

/// `H = Σ_l H_l` with the groups in product-formula order.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianInstance {
    pub n: usize,
    pub model: Model,
    pub params: ModelParams,
    pub seed: u64,
    pub groups: Vec<TermGroup>,
}

fn string(n: usize, sites: &[(usize, Pauli)]) -> PauliString {
    PauliString::from_sites(n, sites).expect("sites in range")
}

fn bond(n: usize, a: usize, b: usize, w: f64) -> [(PauliString, Complex64); 3] {
    let c = Complex64::new(w, 0.0);
    [
        (string(n, &[(a, Pauli::X), (b, Pauli::X)]), c),
        (string(n, &[(a, Pauli::Y), (b, Pauli::Y)]), c),
        (string(n, &[(a, Pauli::Z), (b, Pauli::Z)]), c),
    ]
}

fn draw_fields(n: usize, range: f64, r: &mut rng::Rng) -> Vec<f64> {
    (0..n).map(|_| rng::uniform(r, -range, range)).collect()
}

/// Nearest-neighbor Heisenberg chain with random `Z` fields, split even-odd.
///
/// With 1-based sites, group `A` holds the bonds `(2j-1, 2j)` and the fields
/// on odd sites; group `B` holds the bonds `(2j, 2j+1)` and the fields on
/// even sites.
pub fn heisenberg_1d(n: usize, seed: u64) -> Result<HamiltonianInstance> {
    if n < 2 {
        return Err(Error::arg("heisenberg chain needs n >= 2"));
    }
    let params = ModelParams {
        field_range: 1.0,
        ..ModelParams::default()
    };
    let mut r = rng::from_seed(seed);
    let h = draw_fields(n, params.field_range, &mut r);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for q in 0..n - 1 {
        // 0-based bond (q, q+1) is the 1-based bond (q+1, q+2)
        let dest = if q % 2 == 0 { &mut a } else { &mut b };
        dest.extend(bond(n, q, q + 1, 1.0));
    }
    for (q, &hq) in h.iter().enumerate() {
        let dest = if q % 2 == 0 { &mut a } else { &mut b };
        dest.push((string(n, &[(q, Pauli::Z)]), Complex64::new(hq, 0.0)));
    }
    Ok(HamiltonianInstance {
        n,
        model: Model::Heisenberg1d,
        params,
        seed,
        groups: vec![
            TermGroup {
                label: "A".into(),
                op: PauliSum::from_terms(n, a)?,
            },
            TermGroup {
                label: "B".into(),
                op: PauliSum::from_terms(n, b)?,
            },
        ],
    })
}

/// All-to-all Heisenberg couplings `|j-k|^{-α}` plus random `Z` fields,
/// grouped as `H_X`, `H_Y`, `H_Z` with the fields inside `H_Z`.
pub fn power_law(n: usize, alpha: f64, seed: u64) -> Result<HamiltonianInstance> {
    if n < 2 {
        return Err(Error::arg("power-law chain needs n >= 2"));
    }
    if !(alpha >= 0.0) {
        return Err(Error::arg("alpha must be >= 0"));
    }
    let params = ModelParams {
        alpha: Some(alpha),
        field_range: 1.0,
        ..ModelParams::default()
    };
    let mut r = rng::from_seed(seed);
    let h = draw_fields(n, params.field_range, &mut r);
    let mut parts: [Vec<(PauliString, Complex64)>; 3] = Default::default();
    for j in 0..n {
        for k in j + 1..n {
            let w = ((k - j) as f64).powf(-alpha);
            for (slot, term) in bond(n, j, k, w).into_iter().enumerate() {
                parts[slot].push(term);
            }
        }
    }
    for (q, &hq) in h.iter().enumerate() {
        parts[2].push((string(n, &[(q, Pauli::Z)]), Complex64::new(hq, 0.0)));
    }
    let labels = ["X", "Y", "Z"];
    let groups = parts
        .into_iter()
        .zip(labels)
        .map(|(terms, label)| {
            Ok(TermGroup {
                label: label.into(),
                op: PauliSum::from_terms(n, terms)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HamiltonianInstance {
        n,
        model: Model::PowerLaw,
        params,
        seed,
        groups,
    })
}

const MAX_SUPPORTS: u128 = 1_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// One group per `k`-subset of qubits, each holding `terms_per_support`
/// random strings supported exactly on that subset. Coefficients are
/// uniform in `[-1, 1] / terms_per_support`, so every group has norm at most 1.
pub fn k_local_random(
    n: usize,
    k: usize,
    terms_per_support: usize,
    seed: u64,
) -> Result<HamiltonianInstance> {
    if k == 0 || k > n {
        return Err(Error::arg(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    if terms_per_support == 0 {
        return Err(Error::arg("terms_per_support must be positive"));
    }
    if binomial(n, k) > MAX_SUPPORTS {
        return Err(Error::cap(format!("C({n}, {k}) supports is too many")));
    }
    let params = ModelParams {
        k: Some(k),
        terms_per_support: Some(terms_per_support),
        field_range: 1.0,
        ..ModelParams::default()
    };
    let scale = 1.0 / terms_per_support as f64;
    let mut r = rng::from_seed(seed);
    let letters = [Pauli::X, Pauli::Y, Pauli::Z];
    let mut combo: Vec<usize> = (0..k).collect();
    let mut groups = Vec::new();
    loop {
        let mut terms = Vec::with_capacity(terms_per_support);
        for _ in 0..terms_per_support {
            let sites: Vec<(usize, Pauli)> = combo
                .iter()
                .map(|&q| (q, letters[rng::below(&mut r, 3) as usize]))
                .collect();
            let c = scale * rng::uniform(&mut r, -1.0, 1.0);
            terms.push((string(n, &sites), Complex64::new(c, 0.0)));
        }
        let label = combo
            .iter()
            .map(|q| q.to_string())
            .collect::<Vec<_>>()
            .join(",");
        groups.push(TermGroup {
            label,
            op: PauliSum::from_terms(n, terms)?,
        });
        if !next_combination(&mut combo, n) {
            break;
        }
    }
    Ok(HamiltonianInstance {
        n,
        model: Model::KLocalRandom,
        params,
        seed,
        groups,
    })
}

impl HamiltonianInstance {
    /// A custom instance from explicit groups.
    pub fn custom(groups: Vec<TermGroup>) -> Result<Self> {
        let n = groups
            .first()
            .map(|g| g.op.n())
            .ok_or_else(|| Error::arg("no groups"))?;
        if let Some(g) = groups.iter().find(|g| g.op.n() != n) {
            return Err(Error::Dimension {
                expected: n,
                found: g.op.n(),
            });
        }
        let inst = HamiltonianInstance {
            n,
            model: Model::Custom,
            params: ModelParams {
                field_range: 1.0,
                ..ModelParams::default()
            },
            seed: 0,
            groups,
        };
        inst.validate_hermitian()?;
        Ok(inst)
    }

    pub fn build(model: Model, n: usize, params: &ModelParams, seed: u64) -> Result<Self> {
        match model {
            Model::Heisenberg1d => heisenberg_1d(n, seed),
            Model::PowerLaw => power_law(n, params.alpha.unwrap_or(0.0), seed),
            Model::KLocalRandom => k_local_random(
                n,
                params.k.ok_or_else(|| Error::arg("k-local model needs k"))?,
                params.terms_per_support.unwrap_or(1),
                seed,
            ),
            Model::Custom => Err(Error::arg("custom instances are built from explicit groups")),
        }
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    pub fn total(&self) -> PauliSum {
        PauliSum::sum(self.n, self.groups.iter().map(|g| &g.op)).expect("groups share n")
    }

    pub fn group_ops(&self) -> Vec<&PauliSum> {
        self.groups.iter().map(|g| &g.op).collect()
    }

    /// The same operator as a single group.
    pub fn merged(&self) -> HamiltonianInstance {
        HamiltonianInstance {
            groups: vec![TermGroup {
                label: "H".into(),
                op: self.total(),
            }],
            ..self.clone()
        }
    }

    pub fn validate_hermitian(&self) -> Result<()> {
        for g in &self.groups {
            if !g.op.is_hermitian(1e-12) {
                return Err(Error::Validation(format!(
                    "group {:?} has a non-real coefficient",
                    g.label
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&InstanceJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: InstanceJson = serde_json::from_str(text)?;
        let n = raw.n;
        let groups = raw
            .groups
            .into_iter()
            .map(|g| {
                let terms = g
                    .terms
                    .into_iter()
                    .map(|(re, im, label)| {
                        let p: PauliString = label.parse()?;
                        Ok((p, Complex64::new(re, im)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(TermGroup {
                    label: g.label,
                    op: PauliSum::from_terms(n, terms)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let inst = HamiltonianInstance {
            n,
            model: raw.model,
            params: raw.params,
            seed: raw.seed,
            groups,
        };
        inst.validate_hermitian()?;
        Ok(inst)
    }

    /// Interaction terms keyed by support: every string is assigned to the
    /// term on exactly its support.
    pub fn interaction_terms(&self) -> Vec<(Vec<usize>, PauliSum)> {
        let total = self.total();
        let mut by_support: std::collections::BTreeMap<Vec<usize>, Vec<(PauliString, Complex64)>> =
            Default::default();
        for &(p, c) in total.terms() {
            if p.is_identity() {
                continue;
            }
            by_support.entry(p.support()).or_default().push((p, c));
        }
        by_support
            .into_iter()
            .map(|(s, t)| (s, PauliSum::from_terms(self.n, t).expect("same n")))
            .collect()
    }

    pub fn norm_profile(&self) -> NormProfile {
        NormProfile::of(self)
    }
}

#[derive(Serialize, Deserialize)]
struct GroupJson {
    label: String,
    terms: Vec<(f64, f64, String)>,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    n: usize,
    model: Model,
    params: ModelParams,
    seed: u64,
    groups: Vec<GroupJson>,
}

impl From<&HamiltonianInstance> for InstanceJson {
    fn from(h: &HamiltonianInstance) -> Self {
        InstanceJson {
            n: h.n,
            model: h.model,
            params: h.params.clone(),
            seed: h.seed,
            groups: h
                .groups
                .iter()
                .map(|g| GroupJson {
                    label: g.label.clone(),
                    terms: g
                        .op
                        .terms()
                        .iter()
                        .map(|(p, c)| (c.re, c.im, p.label()))
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Exact spectral norm of an operator acting on few qubits.
fn local_norm(support: &[usize], op: &PauliSum) -> f64 {
    if support.is_empty() {
        return op.coefficient_sum();
    }
    linalg::spectral_norm(&op.restrict(support).to_dense())
}

const LOCAL_NORM_CAP: usize = 10;

/// Spectral norm of a Hermitian group, exact when every qubit-disjoint
/// block is small and the coefficient-sum bound otherwise.
pub fn group_norm(op: &PauliSum) -> f64 {
    if op.is_zero() {
        return 0.0;
    }
    let blocks = op.support_blocks();
    if blocks.iter().any(|(q, _)| q.len() > LOCAL_NORM_CAP) || !op.is_hermitian(1e-12) {
        return op.coefficient_sum();
    }
    let (mut lo, mut hi) = (0.0, 0.0);
    for (q, b) in &blocks {
        if q.is_empty() {
            let c: f64 = b.terms().iter().map(|(_, c)| c.re).sum();
            lo += c;
            hi += c;
            continue;
        }
        let (vals, _) = linalg::hermitian_eig(&b.restrict(q).to_dense());
        lo += vals[0];
        hi += vals[vals.len() - 1];
    }
    f64::max(f64::abs(lo), f64::abs(hi))
}

/// Norms of the interaction terms `H_S` (one per support `S`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormProfile {
    pub one_norm: f64,
    pub frob_one_normalized: f64,
    pub induced_one: f64,
    pub induced_per: f64,
    pub max_term_norm: f64,
    /// True when `induced_per` is the upper bound `sqrt(max_term × induced_one)`.
    pub induced_per_is_upper_bound: bool,
}

impl NormProfile {
    pub fn of(h: &HamiltonianInstance) -> Self {
        let n = h.n;
        let terms: Vec<(Vec<usize>, f64, f64)> = h
            .interaction_terms()
            .into_iter()
            .map(|(s, op)| {
                let norm = local_norm(&s, &op);
                (s, norm, op.frobenius_normalized())
            })
            .collect();
        let one_norm = terms.iter().map(|t| t.1).sum();
        let frob_one_normalized = terms.iter().map(|t| t.2).sum();
        let mut per_site = vec![0.0; n];
        for (s, norm, _) in &terms {
            for &q in s {
                per_site[q] += norm;
            }
        }
        let induced_one = per_site.iter().cloned().fold(0.0, f64::max);
        let max_term_norm = h.groups.iter().map(|g| group_norm(&g.op)).fold(0.0, f64::max);
        let locality = terms.iter().map(|t| t.0.len()).max().unwrap_or(0);
        let (induced_per, induced_per_is_upper_bound) = if locality <= 2 {
            (permutation_norm_2local(n, &terms).sqrt(), false)
        } else if locality == 3 {
            (permutation_norm_sets(&terms).sqrt(), false)
        } else {
            let biggest = terms.iter().map(|t| t.1).fold(0.0, f64::max);
            ((biggest * induced_one).sqrt(), true)
        };
        NormProfile {
            one_norm,
            frob_one_normalized,
            induced_one,
            induced_per,
            max_term_norm,
            induced_per_is_upper_bound,
        }
    }
}

/// `max_i Σ_j ‖H_ij‖ max_{i'} ‖H_{i'j}‖` with `H_ii` the single-site term.
fn permutation_norm_2local(n: usize, terms: &[(Vec<usize>, f64, f64)]) -> f64 {
    let mut w = vec![vec![0.0; n]; n];
    for (s, norm, _) in terms {
        match s.as_slice() {
            [i] => w[*i][*i] = *norm,
            [i, j] => {
                w[*i][*j] = *norm;
                w[*j][*i] = *norm;
            }
            _ => {}
        }
    }
    let col_max: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| w[i][j]).fold(0.0, f64::max))
        .collect();
    (0..n)
        .map(|i| (0..n).map(|j| w[i][j] * col_max[j]).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Set form for supports of size up to 3: for each site `i` and term `S ∋ i`,
/// the partner maximum runs over terms `(S \ {i}) ∪ {j'}`.
fn permutation_norm_sets(terms: &[(Vec<usize>, f64, f64)]) -> f64 {
    use std::collections::{BTreeSet, HashMap};
    let norm_of: HashMap<BTreeSet<usize>, f64> = terms
        .iter()
        .map(|(s, norm, _)| (s.iter().cloned().collect(), *norm))
        .collect();
    let mut best_by_rest: HashMap<BTreeSet<usize>, f64> = HashMap::new();
    for (s, &norm) in &norm_of {
        for &q in s {
            let mut rest = s.clone();
            rest.remove(&q);
            let e = best_by_rest.entry(rest).or_insert(0.0);
            *e = f64::max(*e, norm);
        }
    }
    let sites: BTreeSet<usize> = norm_of.keys().flatten().cloned().collect();
    sites
        .iter()
        .map(|&i| {
            norm_of
                .iter()
                .filter(|(s, _)| s.contains(&i))
                .map(|(s, &norm)| {
                    let mut rest = s.clone();
                    rest.remove(&i);
                    norm * best_by_rest.get(&rest).cloned().unwrap_or(0.0)
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(l: &str) -> PauliString {
        l.parse().unwrap()
    }

    #[test]
    fn two_site_chain() {
        let h = heisenberg_1d(2, 11).unwrap();
        let total = h.total();
        assert_eq!(total.len(), 5);
        let coupling = PauliSum::from_terms(
            2,
            total.terms().iter().filter(|(p, _)| p.weight() == 2).cloned(),
        )
        .unwrap();
        assert!((coupling.frobenius_normalized() - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn three_site_even_odd_split() {
        let h = heisenberg_1d(3, 5).unwrap();
        let a = &h.groups[0].op;
        let b = &h.groups[1].op;
        let mut a_labels: Vec<String> = a.terms().iter().map(|(p, _)| p.label()).collect();
        let mut b_labels: Vec<String> = b.terms().iter().map(|(p, _)| p.label()).collect();
        a_labels.sort();
        b_labels.sort();
        assert_eq!(a_labels, vec!["IIZ", "XXI", "YYI", "ZII", "ZZI"]);
        assert_eq!(b_labels, vec!["IXX", "IYY", "IZI", "IZZ"]);
        let mut r = rng::from_seed(5);
        let fields: Vec<f64> = (0..3).map(|_| rng::uniform(&mut r, -1.0, 1.0)).collect();
        assert_eq!(a.coeff(&s("ZII")).re, fields[0]);
        assert_eq!(b.coeff(&s("IZI")).re, fields[1]);
        assert_eq!(a.coeff(&s("IIZ")).re, fields[2]);
    }

    #[test]
    fn short_chain_rejected() {
        assert!(heisenberg_1d(1, 0).is_err());
        assert!(power_law(1, 1.0, 0).is_err());
        assert!(power_law(3, -1.0, 0).is_err());
    }

    #[test]
    fn power_law_coefficients() {
        let h = power_law(3, 0.0, 1).unwrap();
        assert_eq!(h.groups[0].op.coeff(&s("XIX")).re, 1.0);
        let h = power_law(3, 4.0, 1).unwrap();
        assert_eq!(h.groups[0].op.coeff(&s("XIX")).re, 0.0625);
        assert_eq!(h.groups[1].op.coeff(&s("YYI")).re, 1.0);
        for n in 2..7 {
            let h = power_law(n, 1.5, 2).unwrap();
            let couplings = h
                .total()
                .terms()
                .iter()
                .filter(|(p, _)| p.weight() == 2)
                .count();
            assert_eq!(couplings, 3 * n * (n - 1) / 2);
        }
    }

    #[test]
    fn k_local_groups() {
        let h = k_local_random(2, 1, 1, 3).unwrap();
        assert_eq!(h.groups.len(), 2);
        assert!(h.groups.iter().all(|g| g.op.len() == 1 && g.op.terms()[0].0.weight() == 1));
        let h = k_local_random(4, 4, 1, 3).unwrap();
        assert_eq!(h.groups.len(), 1);
        assert_eq!(h.groups[0].op.terms()[0].0.weight(), 4);
        let h = k_local_random(5, 3, 2, 9).unwrap();
        assert_eq!(h.groups.len(), 10);
        assert!(h.groups.iter().all(|g| group_norm(&g.op) <= 1.0 + 1e-12));
        assert!(k_local_random(3, 4, 1, 0).is_err());
    }

    #[test]
    fn unit_chain_induced_one_norm() {
        let n = 5;
        let groups = (0..n - 1)
            .map(|q| TermGroup {
                label: format!("b{q}"),
                op: PauliSum::from_terms(
                    n,
                    [(
                        PauliString::from_sites(n, &[(q, Pauli::Z), (q + 1, Pauli::Z)]).unwrap(),
                        Complex64::new(1.0, 0.0),
                    )],
                )
                .unwrap(),
            })
            .collect();
        let h = HamiltonianInstance::custom(groups).unwrap();
        let p = h.norm_profile();
        assert!((p.induced_one - 2.0).abs() < 1e-12);
        assert!((p.one_norm - 4.0).abs() < 1e-12);
        assert!((p.induced_per - 2f64.sqrt()).abs() < 1e-12);
        assert!((p.max_term_norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn heisenberg_group_norm_exact() {
        let h = heisenberg_1d(4, 3).unwrap();
        for g in &h.groups {
            let dense = linalg::spectral_norm(&g.op.to_dense());
            assert!((group_norm(&g.op) - dense).abs() < 1e-10);
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let h = power_law(4, 2.0, 17).unwrap();
        let back = HamiltonianInstance::from_json(&h.to_json().unwrap()).unwrap();
        assert_eq!(back, h);
        let bad = r#"{"n":1,"model":"custom","params":{"field_range":1.0},"seed":0,
            "groups":[{"label":"g","terms":[[1.0,0.5,"X"]]}]}"#;
        assert!(matches!(
            HamiltonianInstance::from_json(bad),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn model_names_parse() {
        assert_eq!("heisenberg1d".parse::<Model>().unwrap(), Model::Heisenberg1d);
        assert_eq!("power-law".parse::<Model>().unwrap(), Model::PowerLaw);
        assert!("ising".parse::<Model>().is_err());
    }
}

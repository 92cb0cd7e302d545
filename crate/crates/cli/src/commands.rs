use std::collections::HashMap;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use trotterr::bounds::{self, BoundReport, ConstantMode, HamiltonianNorm, DEFAULT_TERM_CAP};
use trotterr::ensembles::{self, EnsembleKind, ErrorSampleStats};
use trotterr::haar::{self, HaarRow, ScenarioKind};
use trotterr::otoc::{self, OtocConfig, OtocRow};
use trotterr::pauli::NormMethod;
use trotterr::search::{
    self, instance_seeds, minimal_r, Criterion, EmpiricalProblem, SearchOptions, SearchResult,
    SearchSummary,
};
use trotterr::{HamiltonianInstance, Model, ModelParams};

use crate::args::*;
use crate::error::{usage, CliError, CliResult};
use crate::output::{emit, emit_raw};

const DEFAULT_MEMORY_CAP_MB: f64 = 4096.0;
const AMP_BYTES: f64 = 16.0;

pub fn run(cmd: &Command) -> CliResult<()> {
    match cmd {
        Command::Hamiltonian(a) => hamiltonian(cmd, a),
        Command::Bounds(a) => emit(cmd, &bounds_rows(a)?),
        Command::Empirical(a) => emit(cmd, &empirical_rows(a)?),
        Command::TrotterSearch(a) => emit(cmd, &search_rows(a)?),
        Command::Figure1(a) => emit(cmd, &figure1_rows(a)?),
        Command::Figure2(a) => emit(cmd, &figure2_rows(a)?),
        Command::ErrorVsT(a) => emit(cmd, &error_vs_t_rows(a)?),
        Command::Otoc(a) => emit(cmd, &otoc_rows(a)?),
        Command::HaarD(a) => emit(cmd, &haar_rows(a)?),
        Command::SdScaling(a) => emit(cmd, &sd_rows(a)?),
    }
}

/// Parses `5`, `4,6,8`, `4..12` (inclusive) or `4..12:2`.
pub fn parse_ints(s: &str) -> CliResult<Vec<u64>> {
    let bad = || usage(format!("cannot parse integer list {s:?}"));
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        if let Some((lo, rest)) = item.split_once("..") {
            let (hi, step) = match rest.split_once(':') {
                Some((h, st)) => (h, st.parse::<u64>().map_err(|_| bad())?),
                None => (rest, 1),
            };
            let lo: u64 = lo.parse().map_err(|_| bad())?;
            let hi: u64 = hi.parse().map_err(|_| bad())?;
            if step == 0 || hi < lo {
                return Err(bad());
            }
            out.extend((lo..=hi).step_by(step as usize));
        } else {
            out.push(item.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

pub fn parse_sizes(s: &str) -> CliResult<Vec<usize>> {
    Ok(parse_ints(s)?.into_iter().map(|x| x as usize).collect())
}

pub fn parse_floats(s: &str) -> CliResult<Vec<f64>> {
    let v = s
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<f64>().map_err(|_| usage(format!("cannot parse number {x:?}"))))
        .collect::<CliResult<Vec<_>>>()?;
    if v.is_empty() {
        return Err(usage("empty number list"));
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeItem {
    EqualsN,
    Value(f64),
}

/// Time list where the token `n` means the current system size.
pub fn parse_times(s: &str) -> CliResult<Vec<TimeItem>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            if x == "n" {
                Ok(TimeItem::EqualsN)
            } else {
                x.parse::<f64>()
                    .map(TimeItem::Value)
                    .map_err(|_| usage(format!("cannot parse time {x:?}")))
            }
        })
        .collect()
}

fn time_at(item: TimeItem, n: usize) -> f64 {
    match item {
        TimeItem::EqualsN => n as f64,
        TimeItem::Value(t) => t,
    }
}

fn parse_list<T: FromStr<Err = trotterr::Error>>(s: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| T::from_str(x).map_err(|e| usage(e.to_string())))
        .collect()
}

fn memory_cap_bytes() -> f64 {
    std::env::var("TROTTERR_MEMORY_CAP_MB")
        .ok()
        .and_then(|v| v.parse::<f64>().ok())
        .unwrap_or(DEFAULT_MEMORY_CAP_MB)
        * 1024.0
        * 1024.0
}

/// Refuses runs whose estimated footprint exceeds the cap unless `--force`.
fn guard(common: &Common, bytes: f64, what: &str) -> CliResult<()> {
    let cap = memory_cap_bytes();
    if bytes > cap && !common.force {
        return Err(CliError::Capability(format!(
            "{what} needs about {:.0} MiB, above the {:.0} MiB cap; pass --force to run anyway",
            bytes / 1048576.0,
            cap / 1048576.0
        )));
    }
    Ok(())
}

fn dense_bytes(n: usize, copies: f64) -> f64 {
    let d = (1u64 << n.min(40)) as f64;
    copies * d * d * AMP_BYTES
}

fn state_bytes(n: usize, states: usize) -> f64 {
    let d = (1u64 << n.min(40)) as f64;
    3.0 * states.max(1) as f64 * d * AMP_BYTES
}

fn max_n(ns: &[usize]) -> usize {
    ns.iter().copied().max().unwrap_or(0)
}

struct Builder {
    model: Model,
    params: ModelParams,
}

impl Builder {
    fn new(m: &ModelArgs) -> CliResult<Self> {
        let model = Model::from_str(&m.model).map_err(|e| usage(e.to_string()))?;
        Ok(Builder {
            model,
            params: ModelParams {
                alpha: m.alpha,
                k: m.k,
                terms_per_support: m.terms_per_support,
                field_range: 1.0,
            },
        })
    }

    fn with_alpha(model: Model, alpha: f64) -> Self {
        Builder {
            model,
            params: ModelParams {
                alpha: Some(alpha),
                field_range: 1.0,
                ..ModelParams::default()
            },
        }
    }

    /// Instance `i` at size `n`, plus the seed of its input states.
    fn instance(&self, seed: u64, n: usize, i: usize) -> CliResult<(HamiltonianInstance, u64)> {
        let (hs, ss) = instance_seeds(seed, n, i);
        Ok((HamiltonianInstance::build(self.model, n, &self.params, hs)?, ss))
    }

    fn label(&self) -> String {
        match (self.model, self.params.alpha) {
            (Model::PowerLaw, Some(a)) => format!("power_law_{a}"),
            (m, _) => m.name().to_string(),
        }
    }
}

fn hamiltonian(cmd: &Command, a: &HamiltonianArgs) -> CliResult<()> {
    let (h, _) = Builder::new(&a.model)?.instance(a.common.seed, a.n, a.instance)?;
    match a.common.format {
        Format::Json => emit_raw(cmd, &(h.to_json()? + "\n")),
        Format::Csv => {
            let rows: Vec<TermRow> = h
                .groups
                .iter()
                .flat_map(|g| {
                    g.op.terms().iter().map(|(s, c)| TermRow {
                        model: h.model.name().into(),
                        n: h.n,
                        group: g.label.clone(),
                        pauli: s.label(),
                        coeff: c.re,
                        seed: a.common.seed,
                        instance: a.instance,
                    })
                })
                .collect();
            emit(cmd, &rows)
        }
    }
}

#[derive(Serialize)]
struct TermRow {
    model: String,
    n: usize,
    group: String,
    pauli: String,
    coeff: f64,
    seed: u64,
    instance: usize,
}

#[derive(Serialize)]
pub struct BoundRow {
    pub model: String,
    pub n: usize,
    pub p: usize,
    pub t: f64,
    pub r: u64,
    pub bound: String,
    pub value: f64,
    pub assumptions_ok: bool,
    pub flags: String,
    pub seed: u64,
    pub instance: usize,
}

const ALL_BOUNDS: &[&str] = &["triangle", "tp", "alpha_comm", "counting", "interference"];

fn counting_applies(h: &HamiltonianInstance, p: usize) -> bool {
    match h.model {
        Model::Heisenberg1d => p <= 2,
        Model::PowerLaw => p == 1,
        _ => false,
    }
}

fn bound_report(
    name: &str,
    h: &HamiltonianInstance,
    p: usize,
    t: f64,
    r: u64,
    a: &BoundsArgs,
) -> CliResult<Option<BoundReport>> {
    let mode = match a.constant {
        ConstantArg::Omitted => ConstantMode::Omitted,
        ConstantArg::Proof => ConstantMode::Proof,
    };
    let method = if h.n <= 8 {
        NormMethod::Dense
    } else {
        NormMethod::PowerIteration
    };
    let explicit = a.bounds != "all";
    let rep = match name {
        "triangle" if p <= 2 || explicit => bounds::triangle_bound(h, p, t, r)?,
        "tp" => bounds::tp_bound(h, p, t, r, DEFAULT_TERM_CAP, mode)?,
        "alpha_comm" | "worst" => bounds::worst_case_bound(h, p, t, r, method, DEFAULT_TERM_CAP, mode)?,
        "counting" if counting_applies(h, p) => match h.model {
            Model::Heisenberg1d => bounds::counting_bound_nn(h.n, t, r, p)?,
            _ => bounds::counting_bound_power_law(h.n, h.params.alpha.unwrap_or(0.0), t, r)?,
        },
        "counting" if explicit => {
            return Err(CliError::Capability(format!(
                "no counting bound for {} at p = {p}",
                h.model
            )))
        }
        "interference" if (p == 1 && h.groups.len() == 2) || explicit => {
            let norm = match a.h_norm {
                HNormArg::FourN => HamiltonianNorm::FourN,
                HNormArg::Computed => HamiltonianNorm::Computed,
            };
            if p != 1 {
                return Err(CliError::Capability("the interference bound is defined for p = 1".into()));
            }
            bounds::interference_bound(h, t, r, norm)?
        }
        "triangle" | "counting" | "interference" => return Ok(None),
        other => return Err(usage(format!("unknown bound {other:?}"))),
    };
    Ok(Some(rep))
}

fn bounds_rows(a: &BoundsArgs) -> CliResult<Vec<BoundRow>> {
    let b = Builder::new(&a.model)?;
    let ns = parse_sizes(&a.n)?;
    let ps = parse_sizes(&a.p)?;
    let ts = parse_times(&a.t)?;
    let rs = parse_ints(&a.r)?;
    let names: Vec<String> = if a.bounds == "all" {
        ALL_BOUNDS.iter().map(|s| s.to_string()).collect()
    } else {
        a.bounds.split(',').map(|s| s.trim().to_string()).collect()
    };
    guard(&a.common, dense_bytes(max_n(&ns).min(10), 4.0), "dense norms")?;
    let mut rows = Vec::new();
    for &n in &ns {
        for i in 0..a.instances.max(1) {
            let (h, _) = b.instance(a.common.seed, n, i)?;
            for &p in &ps {
                for &ti in &ts {
                    let t = time_at(ti, n);
                    for &r in &rs {
                        for name in &names {
                            if let Some(rep) = bound_report(name, &h, p, t, r, a)? {
                                rows.push(BoundRow {
                                    model: b.label(),
                                    n,
                                    p,
                                    t,
                                    r,
                                    bound: name.clone(),
                                    value: rep.value,
                                    assumptions_ok: rep.assumptions_ok,
                                    flags: rep.flags.join(";"),
                                    seed: a.common.seed,
                                    instance: i,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Ensemble statistics row with the instance index appended.
#[derive(Serialize)]
pub struct StatsRow {
    pub model: String,
    pub n: usize,
    pub t: f64,
    pub r: u64,
    pub p: usize,
    pub ensemble: String,
    #[serde(rename = "N")]
    pub samples: usize,
    #[serde(rename = "mean_sqrtS")]
    pub mean_sqrt_s: f64,
    #[serde(rename = "std_sqrtS")]
    pub std_sqrt_s: f64,
    #[serde(rename = "mean_S")]
    pub mean_s: f64,
    #[serde(rename = "var_S")]
    pub var_s: f64,
    pub seed: u64,
    pub instance: usize,
}

impl StatsRow {
    #[allow(clippy::too_many_arguments)]
    fn new(
        model: String,
        n: usize,
        t: f64,
        r: u64,
        p: usize,
        kind: EnsembleKind,
        st: &ErrorSampleStats,
        seed: u64,
        instance: usize,
    ) -> Self {
        StatsRow {
            model,
            n,
            t,
            r,
            p,
            ensemble: kind.name().into(),
            samples: st.samples,
            mean_sqrt_s: st.mean_sqrt_s,
            std_sqrt_s: st.std_sqrt_s,
            mean_s: st.mean_s,
            var_s: st.var_s,
            seed,
            instance,
        }
    }
}

fn ensemble(s: &str) -> CliResult<EnsembleKind> {
    EnsembleKind::from_str(s).map_err(|e| usage(e.to_string()))
}

fn reference_tol(eps: f64) -> f64 {
    (eps / 100.0).min(1e-10)
}

fn empirical_rows(a: &EmpiricalArgs) -> CliResult<Vec<StatsRow>> {
    let b = Builder::new(&a.model)?;
    let kind = ensemble(&a.ensemble)?;
    let ns = parse_sizes(&a.n)?;
    let ps = parse_sizes(&a.p)?;
    let ts = parse_times(&a.t)?;
    let rs = parse_ints(&a.r)?;
    let nmax = max_n(&ns);
    guard(&a.common, state_bytes(nmax, a.samples) + dense_bytes(nmax.min(8), 3.0), "statevector batch")?;
    let mut rows = Vec::new();
    for &n in &ns {
        let per: Vec<Vec<StatsRow>> = (0..a.instances.max(1))
            .into_par_iter()
            .map(|i| -> CliResult<Vec<StatsRow>> {
                let (h, ss) = b.instance(a.common.seed, n, i)?;
                let states = ensembles::sample_states(kind, n, a.samples, ss);
                let mut out = Vec::new();
                for &p in &ps {
                    for &ti in &ts {
                        let t = time_at(ti, n);
                        let prob = EmpiricalProblem::new(&h, p, t, &states, 1e-12)?;
                        for &r in &rs {
                            let st = prob.stats(r, a.common.seed)?;
                            out.push(StatsRow::new(b.label(), n, t, r, p, kind, &st, a.common.seed, i));
                        }
                    }
                }
                Ok(out)
            })
            .collect::<CliResult<_>>()?;
        rows.extend(per.into_iter().flatten());
    }
    Ok(rows)
}

struct Sweep<'a> {
    builder: &'a Builder,
    ps: Vec<usize>,
    ns: Vec<usize>,
    ts: Vec<TimeItem>,
    criteria: Vec<Criterion>,
    args: &'a SweepArgs,
    common: &'a Common,
}

fn check_criterion(c: Criterion, b: &Builder, p: usize) -> CliResult<()> {
    let ok = match c {
        Criterion::Interference => p == 1 && matches!(b.model, Model::Heisenberg1d | Model::PowerLaw),
        Criterion::Counting => match b.model {
            Model::Heisenberg1d => p <= 2,
            Model::PowerLaw => p == 1,
            _ => false,
        },
        Criterion::Triangle => p <= 2,
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        Err(CliError::Capability(format!(
            "criterion {c} is not available for {} at p = {p}",
            b.model
        )))
    }
}

fn sweep_guard(s: &Sweep<'_>) -> CliResult<()> {
    let nmax = max_n(&s.ns);
    let mut bytes = state_bytes(nmax, s.args.samples) + dense_bytes(nmax.min(8), 3.0);
    if s.criteria.contains(&Criterion::EmpiricalWorst) {
        bytes = bytes.max(dense_bytes(nmax, 6.0));
    }
    guard(s.common, bytes, "trotter search")
}

fn search_one(
    s: &Sweep<'_>,
    c: Criterion,
    h: &HamiltonianInstance,
    ss: u64,
    p: usize,
    t: f64,
    hint: Option<u64>,
) -> CliResult<SearchResult> {
    let opts = SearchOptions {
        cap: s.args.r_cap,
        hint,
    };
    let eps = s.args.eps;
    let res = match c {
        Criterion::EmpiricalAvg => {
            let kind = ensemble(&s.args.ensemble)?;
            search::search_r_empirical(h, p, t, eps, kind, s.args.samples, ss, opts)?
        }
        Criterion::EmpiricalWorst => search::search_r_worst(h, p, t, eps, opts)?,
        _ => search::search_r_from_bound(c, h, p, t, eps, opts)?,
    };
    Ok(res)
}

fn run_sweep(s: &Sweep<'_>) -> CliResult<Vec<SearchSummary>> {
    for &p in &s.ps {
        for &c in &s.criteria {
            check_criterion(c, s.builder, p)?;
        }
    }
    sweep_guard(s)?;
    let seed = s.common.seed;
    let instances = s.args.instances.max(1);
    let mut rows = Vec::new();
    for &p in &s.ps {
        for &ti in &s.ts {
            let mut prev: HashMap<Criterion, (usize, f64)> = HashMap::new();
            for &n in &s.ns {
                let t = time_at(ti, n);
                let hams = (0..instances)
                    .map(|i| s.builder.instance(seed, n, i))
                    .collect::<CliResult<Vec<_>>>()?;
                for &c in &s.criteria {
                    let hint = prev
                        .get(&c)
                        .map(|&(pn, r)| (r * (n as f64 / pn as f64).powf(1.5)).max(1.0) as u64);
                    let results = hams
                        .par_iter()
                        .map(|(h, ss)| search_one(s, c, h, *ss, p, t, hint))
                        .collect::<CliResult<Vec<_>>>()?;
                    let mut sum = search::summarize(s.builder.model, n, &results, seed)?;
                    sum.model = s.builder.label();
                    prev.insert(c, (n, sum.r_mean));
                    rows.push(sum);
                }
            }
        }
    }
    Ok(rows)
}

fn search_rows(a: &SearchArgs) -> CliResult<Vec<SearchSummary>> {
    let b = Builder::new(&a.model)?;
    run_sweep(&Sweep {
        builder: &b,
        ps: parse_sizes(&a.p)?,
        ns: parse_sizes(&a.n)?,
        ts: parse_times(&a.t)?,
        criteria: parse_list(&a.criteria)?,
        args: &a.sweep,
        common: &a.common,
    })
}

fn figure1_rows(a: &FigureArgs) -> CliResult<Vec<SearchSummary>> {
    let b = Builder {
        model: Model::Heisenberg1d,
        params: ModelParams {
            field_range: 1.0,
            ..ModelParams::default()
        },
    };
    let mut rows = Vec::new();
    for p in parse_sizes(&a.p)? {
        let mut criteria = vec![Criterion::EmpiricalAvg, Criterion::Triangle, Criterion::Counting];
        if p == 1 {
            criteria.push(Criterion::Interference);
        }
        rows.extend(run_sweep(&Sweep {
            builder: &b,
            ps: vec![p],
            ns: parse_sizes(&a.n)?,
            ts: vec![TimeItem::EqualsN],
            criteria,
            args: &a.sweep,
            common: &a.common,
        })?);
    }
    Ok(rows)
}

fn figure2_rows(a: &Figure2Args) -> CliResult<Vec<SearchSummary>> {
    let mut rows = Vec::new();
    for alpha in parse_floats(&a.alpha)? {
        let b = Builder::with_alpha(Model::PowerLaw, alpha);
        for p in parse_sizes(&a.p)? {
            let mut criteria = vec![Criterion::EmpiricalAvg, Criterion::Triangle];
            if p == 1 {
                criteria.push(Criterion::Counting);
            }
            rows.extend(run_sweep(&Sweep {
                builder: &b,
                ps: vec![p],
                ns: parse_sizes(&a.n)?,
                ts: vec![TimeItem::EqualsN],
                criteria,
                args: &a.sweep,
                common: &a.common,
            })?);
        }
    }
    Ok(rows)
}

fn error_vs_t_rows(a: &ErrorVsTArgs) -> CliResult<Vec<StatsRow>> {
    let b = Builder::new(&a.model)?;
    let kind = ensemble(&a.ensemble)?;
    let ts = parse_floats(&a.t)?;
    guard(&a.common, state_bytes(a.n, a.samples) + dense_bytes(a.n.min(8), 3.0), "statevector batch")?;
    let per: Vec<Vec<StatsRow>> = (0..a.instances.max(1))
        .into_par_iter()
        .map(|i| -> CliResult<Vec<StatsRow>> {
            let (h, ss) = b.instance(a.common.seed, a.n, i)?;
            let states = ensembles::sample_states(kind, a.n, a.samples, ss);
            ts.iter()
                .map(|&t| {
                    let st = EmpiricalProblem::new(&h, a.p, t, &states, 1e-12)?.stats(a.r, a.common.seed)?;
                    Ok(StatsRow::new(b.label(), a.n, t, a.r, a.p, kind, &st, a.common.seed, i))
                })
                .collect()
        })
        .collect::<CliResult<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

#[derive(Serialize)]
pub struct SeededOtocRow {
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
    pub seed: u64,
    pub instance: usize,
}

impl SeededOtocRow {
    fn new(row: OtocRow, model: String, seed: u64, instance: usize) -> Self {
        SeededOtocRow {
            model,
            n: row.n,
            t: row.t,
            p: row.p,
            r: row.r,
            otoc_exact: row.otoc_exact,
            otoc_trott: row.otoc_trott,
            gap: row.gap,
            bound_avg: row.bound_avg,
            bound_worst: row.bound_worst,
            seed,
            instance,
        }
    }
}

fn otoc_rows(a: &OtocArgs) -> CliResult<Vec<SeededOtocRow>> {
    let b = Builder::new(&a.model)?;
    let ns = parse_sizes(&a.n)?;
    let ts = parse_times(&a.t)?;
    let ps = parse_sizes(&a.p)?;
    let rs = parse_ints(&a.r)?;
    guard(&a.common, dense_bytes(max_n(&ns), 4.0), "dense OTOC")?;
    let mut rows = Vec::new();
    for &n in &ns {
        for i in 0..a.instances.max(1) {
            let (h, _) = b.instance(a.common.seed, n, i)?;
            for &ti in &ts {
                for &p in &ps {
                    for &r in &rs {
                        let cfg = OtocConfig::new(&h, time_at(ti, n), p, r)?;
                        let row = otoc::otoc_row(&cfg)?;
                        rows.push(SeededOtocRow::new(row, b.label(), a.common.seed, i));
                    }
                }
            }
        }
    }
    Ok(rows)
}

#[derive(Serialize)]
pub struct SeededHaarRow {
    pub scenario: String,
    pub d: usize,
    #[serde(rename = "D_value")]
    pub d_value: f64,
    pub method: String,
    pub samples: usize,
    pub std_err: f64,
    pub seed: u64,
}

fn haar_rows(a: &HaarArgs) -> CliResult<Vec<SeededHaarRow>> {
    let kinds: Vec<ScenarioKind> = if a.scenario == "all" {
        vec![
            ScenarioKind::OneNonzero,
            ScenarioKind::EquallySpaced,
            ScenarioKind::Degenerate,
            ScenarioKind::ExponentialRandom,
        ]
    } else {
        parse_list(&a.scenario)?
    };
    let ds = parse_sizes(&a.d)?;
    let jobs: Vec<(ScenarioKind, usize)> =
        kinds.iter().flat_map(|&k| ds.iter().map(move |&d| (k, d))).collect();
    jobs.par_iter()
        .map(|&(k, d)| {
            let row: HaarRow = haar::scenario_row(k, d, a.trials, a.mc_samples, a.common.seed)?;
            Ok(SeededHaarRow {
                scenario: row.scenario,
                d: row.d,
                d_value: row.d_value,
                method: row.method,
                samples: row.samples,
                std_err: row.std_err,
                seed: a.common.seed,
            })
        })
        .collect()
}

fn sd_rows(a: &SdArgs) -> CliResult<Vec<StatsRow>> {
    let b = Builder::new(&a.model)?;
    let kind = ensemble(&a.sweep.ensemble)?;
    let ps = parse_sizes(&a.p)?;
    let ns = parse_sizes(&a.n)?;
    let ts = parse_times(&a.t)?;
    let eps = a.sweep.eps;
    let seed = a.common.seed;
    let nmax = max_n(&ns);
    guard(&a.common, state_bytes(nmax, a.sweep.samples) + dense_bytes(nmax.min(8), 3.0), "statevector batch")?;
    let mut rows = Vec::new();
    for &p in &ps {
        for &ti in &ts {
            let mut prev: Option<(usize, f64)> = None;
            for &n in &ns {
                let t = time_at(ti, n);
                let hint = prev.map(|(pn, r)| (r * (n as f64 / pn as f64).powf(1.5)).max(1.0) as u64);
                let per = (0..a.sweep.instances.max(1))
                    .into_par_iter()
                    .map(|i| -> CliResult<StatsRow> {
                        let (h, ss) = b.instance(seed, n, i)?;
                        let states = ensembles::sample_states(kind, n, a.sweep.samples, ss);
                        let prob = EmpiricalProblem::new(&h, p, t, &states, reference_tol(eps))?;
                        let opts = SearchOptions {
                            cap: a.sweep.r_cap,
                            hint,
                        };
                        let tr = minimal_r(|r| prob.mean_error(r), eps, p as f64, opts)?;
                        let st = prob.stats(tr.r_min, seed)?;
                        Ok(StatsRow::new(b.label(), n, t, tr.r_min, p, kind, &st, seed, i))
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                let mean_r = per.iter().map(|r| r.r as f64).sum::<f64>() / per.len() as f64;
                prev = Some((n, mean_r));
                rows.extend(per);
            }
        }
    }
    Ok(rows)
}

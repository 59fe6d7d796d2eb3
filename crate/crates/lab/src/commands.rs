//! Subcommand implementations. Each returns a [`Table`]; `main` writes it.

use std::io::Read;
use std::path::Path;

use diolab_core::dioph::{
    ba_certificate, cf_convergents, cf_convergents_upto, i_eps_set, wa_witnesses, DeltaEngine, RegularPsi,
};
use diolab_core::mcfield::{randomized_group, randomized_summary, replicate_volume, LawSpec, McEstimate, Volume};
use diolab_core::real::{Frequencies, Surd};
use diolab_core::spectral::{
    level_variance, scaling_fit, structure_factor_atoms, structure_factor_ball_grid, variance_multi,
};
use diolab_core::walk::{
    pbar_n_k, recurrence_series, Evolution, Projector, SeriesRequest, SeriesWeights, Statistic, TailMode, TailedSum,
    WalkConfig,
};
use rayon::prelude::*;

use crate::cli::{
    DiophCmd, FitArgs, McArgs, ModeArg, PsiArgs, SeriesArgs, SfactorCmd, VarianceArgs, WalkArgs, WalkCmd,
};
use crate::config::{parse_list, ExperimentConfig};
use crate::error::{LabError, LabResult};
use crate::output::{Table, Value};

/// `splitmix64` finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable per-module, per-index seed: FNV-1a of the module name folded with
/// `splitmix64`.
pub fn derive_seed(seed: u64, module: &str, index: u64) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in module.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3);
    }
    mix(mix(seed ^ h) ^ index)
}

pub fn frequencies(cfg: &ExperimentConfig) -> LabResult<Frequencies> {
    Ok(Frequencies::parse(&cfg.omega, cfg.precision)?)
}

/// The single row of a `d = 1` descriptor block.
fn row(cfg: &ExperimentConfig) -> LabResult<Vec<Surd>> {
    let f = frequencies(cfg)?;
    if f.d() != 1 {
        return Err(LabError::Parse("expected a single axis of frequencies (no `;`)".into()));
    }
    Ok(f.row(0).to_vec())
}

fn psi(cfg: &ExperimentConfig, a: &PsiArgs) -> LabResult<RegularPsi> {
    Ok(RegularPsi::new(
        a.tau.unwrap_or(cfg.psi.tau),
        a.psi_c.unwrap_or(cfg.psi.c),
        a.psi_p.unwrap_or(cfg.psi.p),
    )?)
}

fn ints(key: &str, s: &str) -> LabResult<Vec<i64>> {
    parse_list(key, s)
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

pub fn dioph(cfg: &ExperimentConfig, cmd: &DiophCmd) -> LabResult<Table> {
    let bits = cfg.precision;
    match cmd {
        DiophCmd::Convergents { count, qmax } => {
            let omega = row(cfg)?;
            if omega.len() != 1 {
                return Err(LabError::Parse("convergents need a single frequency".into()));
            }
            let cs = match qmax {
                Some(q) => cf_convergents_upto(&omega[0], *q, bits)?,
                None => cf_convergents(&omega[0], *count, bits)?,
            };
            let mut t = Table::new("diolab.dioph.convergents", &["index", "p", "q"]).meta("omega", cfg.omega.clone());
            for (i, (p, q)) in cs.into_iter().enumerate() {
                t.push(vec![i.into(), p.into(), q.into()]);
            }
            Ok(t)
        }
        DiophCmd::Delta { q } => {
            let engine = DeltaEngine::new(&row(cfg)?, bits);
            let q = ints("q", q)?;
            if q.len() != engine.m() {
                return Err(LabError::Parse(format!("q needs {} entries", engine.m())));
            }
            let a = engine.delta(&q)?;
            let mut t =
                Table::new("diolab.dioph.delta", &["q", "p", "delta", "exact"]).meta("omega", cfg.omega.clone());
            t.push(vec![join(&a.q).into(), a.p.into(), a.delta.into(), a.exact.into()]);
            Ok(t)
        }
        DiophCmd::Iset {
            eps,
            qmax,
            with_psi,
            psi: pa,
        } => {
            let engine = DeltaEngine::new(&row(cfg)?, bits);
            let p = if *with_psi { Some(psi(cfg, pa)?) } else { None };
            let set = i_eps_set(&engine, *eps, *qmax, p.as_ref())?;
            let mut t = Table::new("diolab.dioph.iset", &["q", "p", "delta", "norm"])
                .meta("omega", cfg.omega.clone())
                .meta("eps", *eps)
                .meta("qmax", *qmax)
                .meta("incomplete", set.incomplete);
            if let Some(s) = &set.separation {
                t = t
                    .meta("rho", s.rho)
                    .meta("min_gap", s.min_gap)
                    .meta("separated", s.holds);
            }
            for e in &set.elements {
                t.push(vec![join(&e.q).into(), e.p.into(), e.delta.into(), e.norm().into()]);
            }
            Ok(t)
        }
        DiophCmd::BaCert { qmax, psi: pa } => {
            let engine = DeltaEngine::new(&row(cfg)?, bits);
            let c = ba_certificate(&engine, &psi(cfg, pa)?, *qmax)?;
            let mut t = Table::new(
                "diolab.dioph.ba_cert",
                &[
                    "holds",
                    "worst_ratio",
                    "worst_q",
                    "q0",
                    "qmax",
                    "scanned",
                    "empty_range",
                ],
            )
            .meta("omega", cfg.omega.clone());
            t.push(vec![
                c.holds.into(),
                c.worst_ratio.into(),
                join(&c.worst_q).into(),
                c.q0.into(),
                c.qmax.into(),
                c.scanned.into(),
                c.empty_range.into(),
            ]);
            Ok(t)
        }
        DiophCmd::Witnesses {
            qmax,
            count,
            cw,
            psi: pa,
        } => {
            let engine = DeltaEngine::new(&row(cfg)?, bits);
            let r = wa_witnesses(&engine, &psi(cfg, pa)?, *cw, *count, *qmax)?;
            let mut t = Table::new("diolab.dioph.witnesses", &["index", "p", "q", "err", "parity"])
                .meta("omega", cfg.omega.clone())
                .meta("reduced", r.reduced)
                .meta("shift", r.shift.map(|s| s.to_string()).unwrap_or_else(|| "none".into()));
            for (i, w) in r.witnesses.iter().enumerate() {
                let q: Vec<String> = w.q.iter().map(|x| join(x)).collect();
                t.push(vec![
                    i.into(),
                    join(&w.p).into(),
                    q.join(";").into(),
                    join(&w.err).into(),
                    (w.parity as u32).into(),
                ]);
            }
            Ok(t)
        }
    }
}

pub fn walk_config(cfg: &ExperimentConfig, w: &WalkArgs) -> LabResult<WalkConfig> {
    let f = frequencies(cfg)?;
    match &w.weights {
        None => Ok(WalkConfig::uniform(f)),
        Some(s) => Ok(WalkConfig::with_weights(f, parse_list("weights", s)?)?),
    }
}

fn mode(m: ModeArg) -> TailMode {
    match m {
        ModeArg::Crude => TailMode::Crude,
        ModeArg::Envelope => TailMode::Envelope,
        ModeArg::Asymptotic => TailMode::Asymptotic,
    }
}

fn series_table(schema: &str, eps: &[f64], sums: &[TailedSum]) -> Table {
    let mut t = Table::new(
        schema,
        &[
            "eps",
            "partial",
            "tail",
            "lo",
            "hi",
            "crude_tail",
            "envelope_tail",
            "asymptotic_tail",
            "lost_inflation",
            "n_truncation",
            "mode",
        ],
    );
    let mut rows: Vec<(f64, &TailedSum)> = eps.iter().copied().zip(sums).collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (e, s) in rows {
        t.push(vec![
            e.into(),
            s.partial.into(),
            s.tail().into(),
            s.lo().into(),
            s.hi().into(),
            s.crude_tail.into(),
            s.envelope_tail.into(),
            s.asymptotic_tail.map(Value::from).unwrap_or_else(|| "none".into()),
            s.lost_inflation.into(),
            s.n_truncation.into(),
            s.mode.name().into(),
        ]);
    }
    t
}

fn series(cfg: &ExperimentConfig, a: &SeriesArgs, stat: Statistic, schema: &str) -> LabResult<Table> {
    let wc = walk_config(cfg, &a.walk)?;
    let eps: Vec<f64> = parse_list("eps", &a.eps)?;
    let req = SeriesRequest {
        weights: SeriesWeights::Power { beta: a.beta },
        statistic: stat,
        eps: eps.clone(),
        n_eps: a.neps.unwrap_or(cfg.walk.n_eps),
        n_max: a.walk.nmax.unwrap_or(cfg.walk.n_max),
        mode: mode(a.mode),
        prune: a.walk.prune.unwrap_or(cfg.walk.prune),
    };
    let sums = recurrence_series(&wc, &req)?;
    Ok(series_table(schema, &eps, &sums)
        .meta("omega", cfg.omega.clone())
        .meta("beta", a.beta)
        .meta("n_eps", req.n_eps)
        .meta("n_max", req.n_max)
        .meta("prune", req.prune))
}

pub fn walk(cfg: &ExperimentConfig, cmd: &WalkCmd) -> LabResult<Table> {
    match cmd {
        WalkCmd::Dist { walk: w } => {
            let wc = walk_config(cfg, w)?;
            let n = w.nmax.unwrap_or(cfg.walk.n_max);
            let prune = w.prune.unwrap_or(cfg.walk.prune);
            let mut ev = Evolution::new(&wc, prune)?;
            ev.run_to(n)?;
            let dist = ev.current();
            let proj = Projector::new(&wc);
            let d = proj.d();
            let mut cols: Vec<String> = (1..=wc.dim()).map(|j| format!("q{j}")).collect();
            cols.extend((1..=d).map(|k| format!("u{k}")));
            cols.push("probability".into());
            let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
            let mut t = Table::new("diolab.walk.dist", &cols)
                .meta("omega", cfg.omega.clone())
                .meta("n", n)
                .meta("prune", prune)
                .meta("lost_mass", dist.lost_mass());
            let zero = vec![0i64; d];
            for (q, p) in dist.to_sorted_vec() {
                let pr = proj.project(&q, Some(&zero[..]));
                let mut r: Vec<Value> = q.iter().map(|&x| x.into()).collect();
                r.extend(pr.y.iter().map(|&y| y.into()));
                r.push(p.into());
                t.push(r);
            }
            Ok(t)
        }
        WalkCmd::Pbar { walk: w, eps, k } => {
            let wc = walk_config(cfg, w)?;
            let d = wc.freqs().d();
            let axes: Vec<usize> = match k {
                None => (0..d).collect(),
                Some(s) => {
                    let one: Vec<usize> = parse_list("k", s)?;
                    if one.iter().any(|&a| a == 0 || a > d) {
                        return Err(LabError::Parse(format!("axes in --k must lie in 1..={d}")));
                    }
                    one.iter().map(|a| a - 1).collect()
                }
            };
            let mut eps: Vec<f64> = parse_list("eps", eps)?;
            eps.sort_by(f64::total_cmp);
            let n_max = w.nmax.unwrap_or(cfg.walk.n_max);
            let prune = w.prune.unwrap_or(cfg.walk.prune);
            let mut t = Table::new("diolab.walk.pbar", &["n", "eps", "lo", "hi"])
                .meta("omega", cfg.omega.clone())
                .meta("k", join(&axes.iter().map(|a| a + 1).collect::<Vec<_>>()))
                .meta("prune", prune);
            let mut ev = Evolution::new(&wc, prune)?;
            for n in 0..=n_max {
                if n > 0 {
                    ev.step()?;
                }
                for &e in &eps {
                    let iv = pbar_n_k(&wc, ev.current(), e, &axes)?;
                    t.push(vec![n.into(), e.into(), iv.lo.into(), iv.hi.into()]);
                }
            }
            Ok(t)
        }
        WalkCmd::Jbeta(a) => series(cfg, a, Statistic::Real, "diolab.walk.jbeta"),
        WalkCmd::Ibeta(a) => series(cfg, a, Statistic::Torus, "diolab.walk.ibeta"),
    }
}

fn radii(cfg: &ExperimentConfig, t: &Option<String>) -> LabResult<Vec<f64>> {
    let mut ts = match t {
        Some(s) => parse_list("T", s)?,
        None => cfg.variance.t.clone(),
    };
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    Ok(ts)
}

pub fn variance(cfg: &ExperimentConfig, a: &VarianceArgs) -> LabResult<Table> {
    let wc = WalkConfig::uniform(frequencies(cfg)?);
    let ts = radii(cfg, &a.t)?;
    let n_max = a.nmax.unwrap_or(cfg.variance.n_max);
    let prune = a.prune.unwrap_or(cfg.walk.prune);
    let rep = if a.u == 0.0 {
        variance_multi(&wc, &ts, n_max, prune)?
    } else {
        level_variance(&wc, a.u, &ts, n_max, prune)?
    };
    let mut t = Table::new(
        "diolab.variance",
        &[
            "T",
            "V_lo",
            "V_hi",
            "V_est",
            "crude_tail",
            "asymptotic_tail",
            "lost_inflation",
        ],
    )
    .meta("omega", cfg.omega.clone())
    .meta("u", a.u)
    .meta("n_max", n_max)
    .meta("prune", prune)
    .meta("normalization", rep.normalization);
    for p in &rep.points {
        t.push(vec![
            p.t.into(),
            p.v_lo.into(),
            p.v_hi.into(),
            p.v_est.into(),
            p.crude_tail.into(),
            p.asymptotic_tail.into(),
            p.lost_inflation.into(),
        ]);
    }
    Ok(t)
}

pub fn sfactor(cfg: &ExperimentConfig, cmd: &SfactorCmd) -> LabResult<Table> {
    let wc = WalkConfig::uniform(frequencies(cfg)?);
    match cmd {
        SfactorCmd::Atoms { nmax, half_width } => {
            let d = wc.freqs().d();
            let atoms = structure_factor_atoms(&wc, *nmax, &vec![(-half_width, *half_width); d])?;
            let mut cols: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
            cols.push("weight".into());
            let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
            let mut t = Table::new("diolab.sfactor.atoms", &cols)
                .meta("omega", cfg.omega.clone())
                .meta("n_max", *nmax)
                .meta("half_width", *half_width);
            for a in atoms {
                let mut r: Vec<Value> = a.location.iter().map(|&x| x.into()).collect();
                r.push(a.weight.into());
                t.push(r);
            }
            Ok(t)
        }
        SfactorCmd::Ball {
            eps,
            nmax,
            prune,
            mode: m,
        } => {
            let eps: Vec<f64> = parse_list("eps", eps)?;
            let n_max = nmax.unwrap_or(cfg.walk.n_max);
            let prune = prune.unwrap_or(cfg.walk.prune);
            let sums = structure_factor_ball_grid(&wc, &eps, n_max, mode(*m), prune)?;
            Ok(series_table("diolab.sfactor.ball", &eps, &sums)
                .meta("omega", cfg.omega.clone())
                .meta("n_max", n_max)
                .meta("prune", prune))
        }
    }
}

fn law(cfg: &ExperimentConfig, a: &McArgs) -> LabResult<LawSpec> {
    let Some(s) = &a.law else {
        return Ok(LawSpec::Fixed(frequencies(cfg)?));
    };
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || LabError::Parse(format!("`{s}`: expected shared:LO:HI or tuple:LO:HI"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[1].parse().map_err(|_| bad())?;
    let hi: f64 = parts[2].parse().map_err(|_| bad())?;
    match parts[0] {
        "shared" => Ok(LawSpec::SharedUniform { m: a.m, lo, hi }),
        "tuple" => Ok(LawSpec::TupleUniform { m: a.m, lo, hi }),
        _ => Err(bad()),
    }
}

/// Replicate volumes of `reps` independent fields, in replication order.
pub fn parallel_volumes(f: &Frequencies, t: f64, reps: u64, grid: u32, seed: u64, u: f64) -> LabResult<Vec<Volume>> {
    let v: Result<Vec<Volume>, _> = (0..reps)
        .into_par_iter()
        .map(|r| replicate_volume(f, t, grid, seed, r, u))
        .collect();
    Ok(v?)
}

/// `variance_mc` with replications spread over threads; bit-identical to the sequential run.
pub fn parallel_variance_mc(f: &Frequencies, t: f64, reps: u64, grid: u32, seed: u64, u: f64) -> LabResult<McEstimate> {
    let v = parallel_volumes(f, t, reps, grid, seed, u)?;
    Ok(McEstimate::from_volumes(t, u, seed, grid, &v)?)
}

pub fn mc(cfg: &ExperimentConfig, a: &McArgs) -> LabResult<Table> {
    let ts = radii(cfg, &a.t)?;
    let reps = a.reps.unwrap_or(cfg.mc.reps);
    let grid = a.grid.unwrap_or(cfg.mc.grid);
    let seed = a.seed.unwrap_or(cfg.mc.seed);
    let spec = law(cfg, a)?;
    let d = match &spec {
        LawSpec::Fixed(f) => f.d(),
        _ => a.d,
    };
    let randomized = a.law.is_some() || a.inner > 1;
    let mut cols = vec![
        "T",
        "u",
        "reps",
        "grid",
        "seed",
        "mean",
        "var",
        "stderr",
        "max_error_bound",
        "unreliable",
    ];
    if randomized {
        cols.extend(["conditional_variance", "variance_of_conditional_mean", "expected_mean"]);
    }
    let mut t = Table::new("diolab.mc", &cols)
        .meta("law", a.law.clone().unwrap_or_else(|| format!("fixed:{}", cfg.omega)))
        .meta("master_seed", seed);
    let mut volume_rows = Vec::new();
    for (i, &radius) in ts.iter().enumerate() {
        let s = derive_seed(seed, "mc", i as u64);
        let (est, extra, vols) = if randomized {
            let groups: Result<Vec<Vec<Volume>>, _> = (0..reps)
                .into_par_iter()
                .map(|g| randomized_group(&spec, d, radius, a.inner, grid, s, g, a.u))
                .collect();
            let vols: Vec<Volume> = groups?.into_iter().flatten().collect();
            let r = randomized_summary(radius, a.u, s, grid, d, a.inner, &vols)?;
            let extra = vec![
                r.conditional_variance.into(),
                r.variance_of_conditional_mean.into(),
                r.expected_mean.into(),
            ];
            (r.total, extra, vols)
        } else {
            let LawSpec::Fixed(f) = &spec else { unreachable!() };
            let vols = parallel_volumes(f, radius, reps, grid, s, a.u)?;
            (McEstimate::from_volumes(radius, a.u, s, grid, &vols)?, Vec::new(), vols)
        };
        if est.unreliable() {
            eprintln!(
                "warning: {} replications at T = {radius}; standard errors are unreliable below 30",
                est.reps
            );
        }
        let mut r: Vec<Value> = vec![
            radius.into(),
            a.u.into(),
            est.reps.into(),
            grid.into(),
            Value::Text(s.to_string()),
            est.mean.into(),
            est.variance.into(),
            est.stderr.into(),
            est.max_error_bound.into(),
            est.unreliable().into(),
        ];
        r.extend(extra);
        t.push(r);
        if a.volumes.is_some() {
            volume_rows.extend(vols.iter().enumerate().map(|(k, v)| (radius, k, v.volume)));
        }
    }
    if let Some(path) = &a.volumes {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["T", "rep", "volume"])?;
        for (radius, k, v) in volume_rows {
            w.write_record([
                crate::output::format_float(radius),
                k.to_string(),
                crate::output::format_float(v),
            ])?;
        }
        w.flush()?;
    }
    Ok(t)
}

/// Reads `(x, y)` pairs: a diolab table, a headed CSV, or bare numeric rows.
pub fn read_pairs(text: &str, columns: Option<&str>) -> LabResult<Vec<(f64, f64)>> {
    let mut rd = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records: Vec<csv::StringRecord> = Vec::new();
    for r in rd.records() {
        let r = r?;
        if r.iter().all(|f| f.is_empty()) {
            continue;
        }
        records.push(r);
    }
    let Some(first) = records.first() else {
        return Err(LabError::Parse("no data rows".into()));
    };
    let headed = first.iter().take(2).any(|f| f.parse::<f64>().is_err());
    let (ix, iy) = match (columns, headed) {
        (Some(c), true) => {
            let names: Vec<&str> = c.split(',').map(str::trim).collect();
            if names.len() != 2 {
                return Err(LabError::Parse("--columns takes two names `x,y`".into()));
            }
            let find = |n: &str| {
                first
                    .iter()
                    .position(|h| h == n)
                    .ok_or_else(|| LabError::Parse(format!("no column `{n}`")))
            };
            (find(names[0])?, find(names[1])?)
        }
        (Some(_), false) => return Err(LabError::Parse("--columns needs a header row".into())),
        (None, _) => (0, 1),
    };
    let mut out = Vec::new();
    for (i, r) in records.iter().enumerate().skip(usize::from(headed)) {
        let get = |j: usize| -> LabResult<f64> {
            r.get(j)
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| LabError::Parse(format!("row {}: column {} is not a number", i + 1, j + 1)))
        };
        out.push((get(ix)?, get(iy)?));
    }
    Ok(out)
}

pub fn fit(a: &FitArgs) -> LabResult<Table> {
    let text = if a.input == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(&a.input)?
    };
    let pts = read_pairs(&text, a.columns.as_deref())?;
    let f = scaling_fit(&pts)?;
    let mut t = Table::new(
        "diolab.fit",
        &["slope", "intercept", "residual", "points", "decades", "spans_decade"],
    );
    t.push(vec![
        f.slope.into(),
        f.intercept.into(),
        f.residual.into(),
        f.points.into(),
        f.decades.into(),
        f.spans_decade().into(),
    ]);
    Ok(t)
}

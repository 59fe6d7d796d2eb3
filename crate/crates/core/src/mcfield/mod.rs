//! Monte Carlo oracle for the finite-rank field
//! `X(t) = (d(m+1))^{-1/2} sum_k sum_i (a_{k,i} cos(omega-bar_{k,i} t_k) + b_{k,i} sin(omega-bar_{k,i} t_k))`
//! and its excursion volumes over `B_d(0, T)`.
//!
//! Randomness comes from ChaCha8 keyed by the seed, one stream per
//! replication, so results do not depend on how replications are scheduled.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::numeric::unit_ball_volume;
use crate::real::Frequencies;
use crate::{Error, Result};

/// Replication counts below this are flagged as unreliable.
pub const MIN_RELIABLE_REPS: u64 = 30;

/// Grid points per unit length used when none is given.
pub const DEFAULT_GRID: u32 = 16;

/// Largest supported grid, in cells per axis.
const MAX_CELLS_PER_AXIS: f64 = 1e6;

/// Generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One realisation of the field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    pub d: usize,
    /// Frequencies per axis, including the unit base when present, axis-major.
    pub bar: Vec<f64>,
    /// `(cos, sin)` amplitude pairs, one per entry of `bar`.
    pub coefficients: Vec<f64>,
    pub normalization: f64,
}

impl FieldSample {
    /// Field with explicit per-axis frequencies and amplitudes.
    pub fn new(d: usize, bar: Vec<f64>, coefficients: Vec<f64>) -> Result<Self> {
        if d == 0 || bar.is_empty() || bar.len() % d != 0 {
            return Err(Error::Invalid(
                "frequency count must be a positive multiple of d".into(),
            ));
        }
        if coefficients.len() != 2 * bar.len() {
            return Err(Error::Invalid("need one (cos, sin) pair per frequency".into()));
        }
        let normalization = 1.0 / (bar.len() as f64).sqrt();
        Ok(FieldSample {
            d,
            bar,
            coefficients,
            normalization,
        })
    }

    fn per_axis(&self) -> usize {
        self.bar.len() / self.d
    }

    /// Axis-`k` contribution at coordinate `x`, normalised.
    fn axis_term(&self, k: usize, x: f64) -> f64 {
        let m1 = self.per_axis();
        let mut s = 0.0;
        for i in 0..m1 {
            let j = k * m1 + i;
            let (sn, cs) = (self.bar[j] * x).sin_cos();
            s += self.coefficients[2 * j] * cs + self.coefficients[2 * j + 1] * sn;
        }
        self.normalization * s
    }
}

fn gaussian_coefficients(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

/// Field with i.i.d. standard Gaussian amplitudes on stream 0 of `seed`.
pub fn sample_field(freqs: &Frequencies, seed: u64) -> FieldSample {
    sample_field_stream(freqs, seed, 0)
}

/// As [`sample_field`] on an explicit stream.
pub fn sample_field_stream(freqs: &Frequencies, seed: u64, stream: u64) -> FieldSample {
    let bar = freqs.bar_f64();
    let mut rng = stream_rng(seed, stream);
    let coefficients = gaussian_coefficients(&mut rng, 2 * bar.len());
    FieldSample::new(freqs.d(), bar, coefficients).expect("frequencies are well formed")
}

/// `X(t)`.
pub fn field_eval(s: &FieldSample, t: &[f64]) -> f64 {
    (0..s.d).map(|k| s.axis_term(k, t[k])).sum()
}

/// Excursion volume with its discretisation bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Volume {
    pub volume: f64,
    /// Volume of cells adjacent to a change of the indicator.
    pub error_bound: f64,
    pub step: f64,
}

/// Midpoint-rule measure of `{X > u} cap B_d(0, T)`.
///
/// The cube `[-T, T]^d` is split into `ceil(2 T grid)` cells per axis. The
/// bound counts cells whose indicator differs from a neighbour's; the
/// boundary of the set passes through or next to each of them.
pub fn excursion_volume(s: &FieldSample, t: f64, grid: u32, u: f64) -> Result<Volume> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Invalid("T must be positive".into()));
    }
    if grid < 8 {
        return Err(Error::Invalid(
            "the grid needs at least 8 points per unit length".into(),
        ));
    }
    if !(1..=3).contains(&s.d) {
        return Err(Error::Invalid(
            "excursion volumes are implemented for d in 1..=3".into(),
        ));
    }
    let cells = (2.0 * t * grid as f64).ceil();
    if cells > MAX_CELLS_PER_AXIS {
        return Err(Error::Invalid("grid too fine for this T".into()));
    }
    let n = cells as usize;
    let h = 2.0 * t / cells;
    let centre: Vec<f64> = (0..n).map(|i| -t + (i as f64 + 0.5) * h).collect();
    let tables: Vec<Vec<f64>> = (0..s.d)
        .map(|k| centre.iter().map(|&x| s.axis_term(k, x)).collect())
        .collect();
    let t2 = t * t;
    let cell = h.powi(s.d as i32);
    let (count, boundary) = match s.d {
        1 => {
            let ind: Vec<bool> = tables[0].iter().map(|&v| v > u).collect();
            count_1d(&ind)
        }
        2 => {
            let mut count = 0u64;
            let mut boundary = 0u64;
            let mut prev: Vec<bool> = vec![false; n];
            let mut row = vec![false; n];
            for i in 0..n {
                let xi2 = centre[i] * centre[i];
                for j in 0..n {
                    row[j] = xi2 + centre[j] * centre[j] <= t2 && tables[0][i] + tables[1][j] > u;
                }
                let (c, b) = count_1d(&row);
                count += c;
                boundary += b;
                if i > 0 {
                    boundary += (0..n).filter(|&j| row[j] != prev[j]).count() as u64 * 2;
                }
                core::mem::swap(&mut prev, &mut row);
            }
            (count, boundary)
        }
        _ => {
            let mut count = 0u64;
            let mut boundary = 0u64;
            let mut prev = vec![false; n * n];
            let mut plane = vec![false; n * n];
            for i in 0..n {
                let xi2 = centre[i] * centre[i];
                for j in 0..n {
                    let r2 = xi2 + centre[j] * centre[j];
                    let a = tables[0][i] + tables[1][j];
                    for l in 0..n {
                        plane[j * n + l] = r2 + centre[l] * centre[l] <= t2 && a + tables[2][l] > u;
                    }
                    let (c, b) = count_1d(&plane[j * n..(j + 1) * n]);
                    count += c;
                    boundary += b;
                    if j > 0 {
                        boundary += (0..n).filter(|&l| plane[j * n + l] != plane[(j - 1) * n + l]).count() as u64 * 2;
                    }
                }
                if i > 0 {
                    boundary += (0..n * n).filter(|&x| plane[x] != prev[x]).count() as u64 * 2;
                }
                core::mem::swap(&mut prev, &mut plane);
            }
            (count, boundary)
        }
    };
    Ok(Volume {
        volume: count as f64 * cell,
        error_bound: boundary as f64 * cell,
        step: h,
    })
}

/// Count of set cells and cells at an interior change along one line.
fn count_1d(ind: &[bool]) -> (u64, u64) {
    let count = ind.iter().filter(|&&b| b).count() as u64;
    let changes = ind.windows(2).filter(|w| w[0] != w[1]).count() as u64;
    (count, 2 * changes)
}

/// Variance of replicate volumes with a jackknife standard error.
#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub t: f64,
    pub u: f64,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
    pub reps: u64,
    pub seed: u64,
    pub grid: u32,
    /// Largest per-replicate discretisation bound.
    pub max_error_bound: f64,
}

impl McEstimate {
    /// Fewer than [`MIN_RELIABLE_REPS`] replications.
    pub fn unreliable(&self) -> bool {
        self.reps < MIN_RELIABLE_REPS
    }

    /// Summarises volumes listed in replication order.
    pub fn from_volumes(t: f64, u: f64, seed: u64, grid: u32, vols: &[Volume]) -> Result<Self> {
        let xs: Vec<f64> = vols.iter().map(|v| v.volume).collect();
        let (mean, variance, stderr) = jackknife_variance(&xs)?;
        Ok(McEstimate {
            t,
            u,
            mean,
            variance,
            stderr,
            reps: xs.len() as u64,
            seed,
            grid,
            max_error_bound: vols.iter().map(|v| v.error_bound).fold(0.0, f64::max),
        })
    }
}

/// `(mean, unbiased variance, jackknife stderr of the variance)`.
pub fn jackknife_variance(xs: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::Invalid("need at least two replications".into()));
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    // Centred sums keep the leave-one-out updates well conditioned.
    let c: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let s1: f64 = c.iter().sum();
    let s2: f64 = c.iter().map(|x| x * x).sum();
    let variance = (s2 - s1 * s1 / nf) / (nf - 1.0);
    if n == 2 {
        return Ok((mean, variance, f64::INFINITY));
    }
    let m = nf - 1.0;
    let loo: Vec<f64> = c
        .iter()
        .map(|&x| {
            let (a, b) = (s1 - x, s2 - x * x);
            (b - a * a / m) / (m - 1.0)
        })
        .collect();
    let lbar = loo.iter().sum::<f64>() / nf;
    let ss: f64 = loo.iter().map(|v| (v - lbar).powi(2)).sum();
    Ok((mean, variance, ((nf - 1.0) / nf * ss).sqrt()))
}

/// Excursion volume of replication `rep`: the field on stream `rep` of `seed`.
pub fn replicate_volume(freqs: &Frequencies, t: f64, grid: u32, seed: u64, rep: u64, u: f64) -> Result<Volume> {
    excursion_volume(&sample_field_stream(freqs, seed, rep), t, grid, u)
}

/// `Var(Leb({X > u} cap B_d(0, T)))` from `reps` replications, run in order.
///
/// Callers wanting parallelism map [`replicate_volume`] over `0..reps` and
/// pass the volumes in index order to [`McEstimate::from_volumes`].
pub fn variance_mc(freqs: &Frequencies, t: f64, reps: u64, grid: u32, seed: u64, u: f64) -> Result<McEstimate> {
    let vols: Result<Vec<Volume>> = (0..reps)
        .map(|r| replicate_volume(freqs, t, grid, seed, r, u))
        .collect();
    McEstimate::from_volumes(t, u, seed, grid, &vols?)
}

/// Law of the random frequencies.
#[derive(Clone, Debug)]
pub enum LawSpec {
    /// Deterministic frequencies.
    Fixed(Frequencies),
    /// Unit base plus `m` frequencies, each uniform on `[lo, hi]` and shared by all axes.
    SharedUniform { m: usize, lo: f64, hi: f64 },
    /// All `d (m+1)` frequencies i.i.d. uniform on `[lo, hi]`, without a unit base.
    TupleUniform { m: usize, lo: f64, hi: f64 },
}

impl LawSpec {
    fn validate(&self) -> Result<()> {
        match self {
            LawSpec::Fixed(_) => Ok(()),
            LawSpec::SharedUniform { lo, hi, .. } | LawSpec::TupleUniform { lo, hi, .. } => {
                if lo.is_finite() && hi.is_finite() && *lo > 0.0 && lo < hi {
                    Ok(())
                } else {
                    Err(Error::Invalid("need 0 < lo < hi".into()))
                }
            }
        }
    }

    /// Draws one frequency block, axis-major.
    fn draw(&self, d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            LawSpec::Fixed(f) => f.bar_f64(),
            LawSpec::SharedUniform { m, lo, hi } => {
                let dist = Uniform::new(*lo, *hi).expect("validated");
                let row: Vec<f64> = (0..*m).map(|_| dist.sample(rng)).collect();
                let mut out = Vec::with_capacity(d * (m + 1));
                for _ in 0..d {
                    out.push(1.0);
                    out.extend_from_slice(&row);
                }
                out
            }
            LawSpec::TupleUniform { m, lo, hi } => {
                let dist = Uniform::new(*lo, *hi).expect("validated");
                (0..d * (m + 1)).map(|_| dist.sample(rng)).collect()
            }
        }
    }
}

/// Total-variance decomposition of a randomised run.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomizedEstimate {
    /// All `groups * inner` volumes pooled.
    pub total: McEstimate,
    /// Mean within-group variance, estimating `E[Var(M_T | Omega)]`.
    pub conditional_variance: f64,
    /// Between-group variance of the group means minus its within-group share,
    /// estimating `Var(E[M_T | Omega])`.
    pub variance_of_conditional_mean: f64,
    /// `kappa_d T^d / 2`, the conditional mean for every `Omega`.
    pub expected_mean: f64,
    pub groups: u64,
    pub inner: u64,
}

/// Draws `groups` frequency blocks from `law`; for each, samples `inner`
/// fields and measures their excursion volumes.
///
/// Group `g` uses stream `g` of `seed` for the frequencies and the first
/// field, then continues on the same stream.
#[allow(clippy::too_many_arguments)]
pub fn randomized_run(
    law: &LawSpec,
    d: usize,
    t: f64,
    groups: u64,
    inner: u64,
    grid: u32,
    seed: u64,
    u: f64,
) -> Result<RandomizedEstimate> {
    law.validate()?;
    if let LawSpec::Fixed(f) = law {
        if f.d() != d {
            return Err(Error::Invalid("fixed frequencies have the wrong dimension".into()));
        }
    }
    if inner == 0 || groups == 0 {
        return Err(Error::Invalid("need at least one group and one field per group".into()));
    }
    let mut vols = Vec::with_capacity((groups * inner) as usize);
    for g in 0..groups {
        vols.extend(randomized_group(law, d, t, inner, grid, seed, g, u)?);
    }
    randomized_summary(t, u, seed, grid, d, inner, &vols)
}

/// The `inner` volumes of group `g`; see [`randomized_run`].
#[allow(clippy::too_many_arguments)]
pub fn randomized_group(
    law: &LawSpec,
    d: usize,
    t: f64,
    inner: u64,
    grid: u32,
    seed: u64,
    g: u64,
    u: f64,
) -> Result<Vec<Volume>> {
    let mut rng = stream_rng(seed, g);
    let bar = law.draw(d, &mut rng);
    (0..inner)
        .map(|_| {
            let coeffs = gaussian_coefficients(&mut rng, 2 * bar.len());
            excursion_volume(&FieldSample::new(d, bar.clone(), coeffs)?, t, grid, u)
        })
        .collect()
}

/// Pools group volumes (in group order, `inner` per group).
pub fn randomized_summary(
    t: f64,
    u: f64,
    seed: u64,
    grid: u32,
    d: usize,
    inner: u64,
    vols: &[Volume],
) -> Result<RandomizedEstimate> {
    let total = McEstimate::from_volumes(t, u, seed, grid, vols)?;
    let inner_n = inner as usize;
    let groups = (vols.len() / inner_n) as u64;
    let mut within = 0.0;
    let mut means = Vec::with_capacity(groups as usize);
    for chunk in vols.chunks(inner_n) {
        let xs: Vec<f64> = chunk.iter().map(|v| v.volume).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        means.push(m);
        if xs.len() > 1 {
            within += xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        }
    }
    let (conditional_variance, variance_of_conditional_mean) = if inner > 1 {
        let w = within / groups as f64;
        let between = if groups > 1 { jackknife_variance(&means)?.1 } else { 0.0 };
        (w, between - w / inner as f64)
    } else {
        (total.variance, f64::NAN)
    };
    Ok(RandomizedEstimate {
        expected_mean: unit_ball_volume(d) * t.powi(d as i32) / 2.0,
        total,
        conditional_variance,
        variance_of_conditional_mean,
        groups,
        inner,
    })
}

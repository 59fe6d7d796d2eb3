//! Dense orthant representation of the law of `S_n`.
//!
//! The step law is invariant under every coordinate sign flip, so only the
//! nonnegative orthant is stored; `P(S_n = x)` depends on `|x|` componentwise.
//! Values are per lattice point, and a cell `x` stands for its `2^{nnz(x)}`
//! sign images.

use alloc::vec;
use alloc::vec::Vec;

use super::WalkConfig;
use crate::{Error, Result};

/// Default cell budget per buffer (two buffers are kept).
pub const DEFAULT_CELL_BUDGET: usize = 1 << 24;

/// Law of `S_n` with pruned-mass bookkeeping.
#[derive(Clone, Debug)]
pub struct LatticeDistribution {
    n: u32,
    ext: Vec<u32>,
    cap: Vec<u32>,
    strides: Vec<usize>,
    values: Vec<f64>,
    lost_mass: f64,
}

fn strides_for(cap: &[u32]) -> (Vec<usize>, usize) {
    let mut s = vec![0usize; cap.len()];
    let mut acc = 1usize;
    for j in (0..cap.len()).rev() {
        s[j] = acc;
        acc *= cap[j] as usize + 1;
    }
    (s, acc)
}

impl LatticeDistribution {
    fn origin(dim: usize) -> Self {
        let cap = vec![2u32; dim];
        let (strides, len) = strides_for(&cap);
        let mut values = vec![0.0; len];
        values[0] = 1.0;
        LatticeDistribution {
            n: 0,
            ext: vec![0; dim],
            cap,
            strides,
            values,
            lost_mass: 0.0,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn parity(&self) -> u32 {
        self.n % 2
    }

    pub fn dim(&self) -> usize {
        self.ext.len()
    }

    pub fn lost_mass(&self) -> f64 {
        self.lost_mass
    }

    /// Largest `|x_j|` in the stored support, per axis.
    pub fn extents(&self) -> &[u32] {
        &self.ext
    }

    /// `P(S_n = q)` (zero off the stored support).
    pub fn get(&self, q: &[i64]) -> f64 {
        debug_assert_eq!(q.len(), self.dim());
        let mut idx = 0usize;
        for (j, &x) in q.iter().enumerate() {
            let a = x.unsigned_abs();
            if a > self.ext[j] as u64 {
                return 0.0;
            }
            idx += a as usize * self.strides[j];
        }
        self.values[idx]
    }

    /// Visits every stored cell `x >= 0` with positive mass, in row-major order.
    pub fn for_each_orbit<F: FnMut(&[u32], f64)>(&self, mut f: F) {
        let dim = self.dim();
        let mut x = vec![0u32; dim];
        loop {
            let idx: usize = x.iter().zip(&self.strides).map(|(&a, &s)| a as usize * s).sum();
            let v = self.values[idx];
            if v > 0.0 {
                f(&x, v);
            }
            let mut j = dim;
            loop {
                if j == 0 {
                    return;
                }
                j -= 1;
                if x[j] < self.ext[j] {
                    x[j] += 1;
                    break;
                }
                x[j] = 0;
            }
        }
    }

    /// Like [`LatticeDistribution::for_each_orbit`], also passing the flat index.
    pub(crate) fn for_each_orbit_indexed<F: FnMut(usize, &[u32], f64)>(&self, mut f: F) {
        let strides = &self.strides;
        self.for_each_orbit(|x, p| {
            let idx: usize = x.iter().zip(strides).map(|(&a, &s)| a as usize * s).sum();
            f(idx, x, p)
        });
    }

    /// Number of cells in the flat layout.
    pub(crate) fn layout_len(&self) -> usize {
        self.values.len()
    }

    /// Visits every support point with all sign images expanded.
    pub fn for_each_point<F: FnMut(&[i64], f64)>(&self, mut f: F) {
        let mut buf: Vec<i64> = vec![0; self.dim()];
        self.for_each_orbit(|x, p| {
            let nz: Vec<usize> = (0..x.len()).filter(|&j| x[j] != 0).collect();
            for mask in 0u32..(1u32 << nz.len()) {
                for (j, &a) in x.iter().enumerate() {
                    buf[j] = a as i64;
                }
                for (b, &j) in nz.iter().enumerate() {
                    if mask >> b & 1 == 1 {
                        buf[j] = -buf[j];
                    }
                }
                f(&buf, p);
            }
        });
    }

    /// Retained probability `sum_x P(S_n = x)`.
    pub fn total_mass(&self) -> f64 {
        let mut s = 0.0;
        self.for_each_orbit(|x, p| {
            let nnz = x.iter().filter(|&&a| a != 0).count();
            s += p * (1u64 << nnz) as f64;
        });
        s
    }

    /// Support points with probabilities, sorted by coordinates.
    pub fn to_sorted_vec(&self) -> Vec<(Vec<i64>, f64)> {
        let mut out = Vec::new();
        self.for_each_point(|q, p| out.push((q.to_vec(), p)));
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }
}

/// Step-by-step evolution of the lattice law.
#[derive(Clone, Debug)]
pub struct Evolution {
    half_weights: Vec<f64>,
    prune: f64,
    budget: usize,
    cur: LatticeDistribution,
    spare: Vec<f64>,
    spare_ext: Vec<u32>,
    layout_version: u64,
}

impl Evolution {
    pub fn new(cfg: &WalkConfig, prune: f64) -> Result<Self> {
        Evolution::with_budget(cfg, prune, DEFAULT_CELL_BUDGET)
    }

    pub fn with_budget(cfg: &WalkConfig, prune: f64, budget: usize) -> Result<Self> {
        if !(0.0..=1e-6).contains(&prune) {
            return Err(Error::Invalid("prune threshold must lie in [0, 1e-6]".into()));
        }
        let dim = cfg.dim();
        let cur = LatticeDistribution::origin(dim);
        let spare = vec![0.0; cur.values.len()];
        Ok(Evolution {
            half_weights: cfg.weights().iter().map(|t| t / 2.0).collect(),
            prune,
            budget,
            cur,
            spare,
            spare_ext: vec![0; dim],
            layout_version: 0,
        })
    }

    pub fn current(&self) -> &LatticeDistribution {
        &self.cur
    }

    /// Changes whenever the flat layout of the buffers changes.
    pub fn layout_version(&self) -> u64 {
        self.layout_version
    }

    fn ensure_capacity(&mut self) -> Result<()> {
        let dim = self.cur.dim();
        let need: Vec<u32> = self.cur.ext.iter().map(|&e| e + 2).collect();
        if need.iter().zip(&self.cur.cap).all(|(n, c)| n <= c) {
            return Ok(());
        }
        let cells = |cap: &[u32]| cap.iter().map(|&c| c as u128 + 1).product::<u128>();
        let generous: Vec<u32> = need
            .iter()
            .zip(&self.cur.cap)
            .map(|(&n, &c)| if n <= c { c } else { n + 4 + n / 2 })
            .collect();
        let new_cap = if cells(&generous) <= self.budget as u128 {
            generous
        } else if cells(&need) <= self.budget as u128 {
            need
        } else {
            let suggested = if self.prune == 0.0 {
                1e-16
            } else {
                (self.prune * 100.0).min(1e-6)
            };
            return Err(Error::MemoryBudget {
                n: self.cur.n + 1,
                cells: cells(&need),
                budget: self.budget,
                suggested_prune: suggested,
            });
        };
        let (strides, len) = strides_for(&new_cap);
        let mut values = vec![0.0; len];
        let mut x = vec![0u32; dim];
        loop {
            let old: usize = x.iter().zip(&self.cur.strides).map(|(&a, &s)| a as usize * s).sum();
            let new: usize = x.iter().zip(&strides).map(|(&a, &s)| a as usize * s).sum();
            values[new] = self.cur.values[old];
            let mut j = dim;
            let mut done = true;
            while j > 0 {
                j -= 1;
                if x[j] < self.cur.ext[j] {
                    x[j] += 1;
                    done = false;
                    break;
                }
                x[j] = 0;
            }
            if done {
                break;
            }
        }
        self.cur.values = values;
        self.cur.cap = new_cap;
        self.cur.strides = strides;
        self.spare = vec![0.0; len];
        self.spare_ext = vec![0; dim];
        self.layout_version += 1;
        Ok(())
    }

    /// Advances from `S_n` to `S_{n+1}`.
    pub fn step(&mut self) -> Result<()> {
        self.ensure_capacity()?;
        let dim = self.cur.dim();
        let new_ext: Vec<u32> = self.cur.ext.iter().map(|&e| e + 1).collect();
        let strides = self.cur.strides.clone();
        // Stale cells of S_{n-1} outside the new box must be cleared.
        if self.spare_ext.iter().zip(&new_ext).any(|(s, e)| s > e) {
            clear_outside(&mut self.spare, &strides, &self.spare_ext, &new_ext);
        }
        let src = &self.cur.values;
        let dst = &mut self.spare;
        let hw = &self.half_weights;
        let prune = self.prune;
        let parity = (self.cur.n + 1) % 2;
        let last = dim - 1;
        let mut lost = 0.0;
        let mut max_nz = vec![0u32; dim];
        let mut outer = vec![0u32; last];
        loop {
            let base: usize = outer.iter().zip(&strides).map(|(&a, &s)| a as usize * s).sum();
            let osum: u32 = outer.iter().sum();
            let onnz = outer.iter().filter(|&&a| a != 0).count() as u32;
            let start = (parity + osum) % 2;
            let mut x = start;
            let mut any = false;
            while x <= new_ext[last] {
                let idx = base + x as usize;
                let mut v = hw[last] * (src[idx + 1] + if x == 0 { src[idx + 1] } else { src[idx - 1] });
                for j in 0..last {
                    let s = strides[j];
                    let minus = if outer[j] == 0 { src[idx + s] } else { src[idx - s] };
                    v += hw[j] * (src[idx + s] + minus);
                }
                if v > 0.0 && v <= prune {
                    let nnz = onnz + (x != 0) as u32;
                    lost += v * (1u64 << nnz) as f64;
                    v = 0.0;
                }
                dst[idx] = v;
                if v > 0.0 {
                    any = true;
                    max_nz[last] = max_nz[last].max(x);
                }
                x += 2;
            }
            if any {
                for j in 0..last {
                    max_nz[j] = max_nz[j].max(outer[j]);
                }
            }
            let mut j = last;
            let mut done = true;
            while j > 0 {
                j -= 1;
                if outer[j] < new_ext[j] {
                    outer[j] += 1;
                    done = false;
                    break;
                }
                outer[j] = 0;
            }
            if done {
                break;
            }
        }
        // Cells between the shrunk extent and the computed box are already zero;
        // the spare buffer now holds S_n, nonzero only inside its old extent.
        core::mem::swap(&mut self.cur.values, &mut self.spare);
        self.spare_ext = core::mem::replace(&mut self.cur.ext, max_nz);
        self.cur.n += 1;
        self.cur.lost_mass += lost;
        Ok(())
    }

    pub fn run_to(&mut self, n: u32) -> Result<()> {
        while self.cur.n < n {
            self.step()?;
        }
        Ok(())
    }
}

fn clear_outside(buf: &mut [f64], strides: &[usize], stale: &[u32], keep: &[u32]) {
    let dim = stale.len();
    let mut x = vec![0u32; dim];
    loop {
        if x.iter().zip(keep).any(|(a, k)| a > k) {
            let idx: usize = x.iter().zip(strides).map(|(&a, &s)| a as usize * s).sum();
            buf[idx] = 0.0;
        }
        let mut j = dim;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            if x[j] < stale[j] {
                x[j] += 1;
                break;
            }
            x[j] = 0;
        }
    }
}

/// Distributions of `S_0, ..., S_{nMax}`.
pub fn evolve(cfg: &WalkConfig, n_max: u32, prune: f64) -> Result<Vec<LatticeDistribution>> {
    let mut ev = Evolution::new(cfg, prune)?;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(ev.current().clone());
    for _ in 0..n_max {
        ev.step()?;
        out.push(ev.current().clone());
    }
    Ok(out)
}

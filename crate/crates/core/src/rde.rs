//! Numerical solution of the distributional fixed-point equations for the messages.
//!
//! Functions are sampled on the uniform grid t_i = -T + i*delta, i < N,
//! delta = 2T/N, so that t_{N/2} = 0 exactly. Between grid points they are
//! linear; an atom at t = 0 (the mass of the message (0, 0)) is tracked apart.

use std::fmt::Write as _;

use rand::Rng;

use crate::bp::LexMsg;
use crate::error::{domain, Error, Result};
use crate::genfn::{f_pi, OffspringLaw};
use crate::randgraph::WeightLaw;
use crate::rng::RngSeed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t_max: f64,
    /// Even number of points.
    pub points: usize,
}

impl GridSpec {
    pub const DEFAULT_POINTS: usize = 4096;

    pub fn new(t_max: f64, points: usize) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) || points < 16 || points % 2 == 1 {
            return Err(domain(format!("bad grid T={t_max} N={points}")));
        }
        Ok(Self { t_max, points })
    }

    /// T = 8 (E[W] + 1) with the default resolution.
    pub fn for_mean_weight(mean: f64) -> Self {
        Self { t_max: 8.0 * (mean.abs() + 1.0), points: Self::DEFAULT_POINTS }
    }

    pub fn delta(&self) -> f64 {
        2.0 * self.t_max / self.points as f64
    }

    fn t(&self, i: usize) -> f64 {
        -self.t_max + i as f64 * self.delta()
    }
}

/// Non-decreasing function on the grid, flat outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCdf {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    /// Jump at t = 0 (only for the level-0 function).
    pub atom0: f64,
}

impl GridCdf {
    fn constant(grid: GridSpec, v: f64) -> Self {
        Self { grid, values: vec![v; grid.points], atom0: 0.0 }
    }

    fn zero_index(&self) -> usize {
        self.grid.points / 2
    }

    pub fn left_limit(&self) -> f64 {
        self.values[0]
    }

    pub fn right_limit(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Value at t (right-continuous).
    pub fn eval(&self, t: f64) -> f64 {
        let d = self.grid.delta();
        let x = (t + self.grid.t_max) / d;
        if x <= 0.0 {
            return self.left_limit();
        }
        let i = x.floor() as usize;
        if i + 1 >= self.values.len() {
            return self.right_limit();
        }
        let frac = x - i as f64;
        let mut right = self.values[i + 1];
        if i + 1 == self.zero_index() {
            right -= self.atom0;
        }
        self.values[i] + frac * (right - self.values[i])
    }

    /// Continuous increment of each cell [t_j, t_{j+1}].
    fn increments(&self) -> Vec<f64> {
        let z = self.zero_index();
        self.values
            .windows(2)
            .enumerate()
            .map(|(j, w)| w[1] - w[0] - if j + 1 == z { self.atom0 } else { 0.0 })
            .collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0] - 1e-13)
    }
}

/// E[h(X - t_i)] for every grid point, X with the given survival function.
struct Kernel {
    grid: GridSpec,
    /// Integral of the survival function over [x_m, x_{m+1}], x_m = -2T + m delta.
    cell: Vec<f64>,
    /// Survival at the grid points.
    surv: Vec<f64>,
    /// Cells below the support (integral exactly delta).
    m_one: usize,
    /// Cells from here on contribute nothing.
    m_zero: usize,
}

impl Kernel {
    fn new(grid: GridSpec, support: (f64, f64), s: impl Fn(f64) -> f64, is: impl Fn(f64) -> f64) -> Self {
        let d = grid.delta();
        let n = grid.points;
        let x = |m: usize| -2.0 * grid.t_max + m as f64 * d;
        let m_one = (0..2 * n).find(|&m| x(m + 1) > support.0).unwrap_or(2 * n);
        let m_zero = (m_one..2 * n).find(|&m| x(m) >= support.1 || s(x(m)) < 1e-18).unwrap_or(2 * n);
        let cell = (0..2 * n).map(|m| if m < m_one { d } else { is(x(m + 1)) - is(x(m)) }).collect();
        let surv = (0..n).map(|i| s(grid.t(i))).collect();
        Self { grid, cell, surv, m_one, m_zero }
    }

    fn for_weights(grid: GridSpec, w: WeightLaw) -> Self {
        Self::new(grid, w.support(), |x| w.survival(x), |x| w.integrated_survival(x))
    }

    /// Weights 1 + eps W.
    fn for_affine(grid: GridSpec, w: WeightLaw, eps: f64) -> Self {
        let (a, b) = w.support();
        let base = w.integrated_survival(-1.0 / eps);
        Self::new(
            grid,
            (1.0 + eps * a, 1.0 + eps * b),
            |x| w.survival((x - 1.0) / eps),
            |x| eps * (w.integrated_survival((x - 1.0) / eps) - base),
        )
    }

    fn expect(&self, h: &GridCdf) -> Vec<f64> {
        let n = self.grid.points;
        let d = self.grid.delta();
        let inc = h.increments();
        let mut prefix = vec![0.0; n];
        for j in 0..n - 1 {
            prefix[j + 1] = prefix[j] + inc[j];
        }
        (0..n)
            .map(|i| {
                // cells j with i + j + 1 <= m_one lie fully below the support
                let full = self.m_one.saturating_sub(i).min(n - 1);
                let mut acc = prefix[full];
                let hi = self.m_zero.saturating_sub(i).min(n - 1);
                for j in full..hi {
                    acc += inc[j] * self.cell[i + j] / d;
                }
                h.left_limit() + h.atom0 * self.surv[i] + acc
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Weight of the new iterate.
    pub damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 5000, damping: 0.5 }
    }
}

/// Fixed point of h(t) = 1{t >= 0} phi_hat(1 - E[h(1 + eps W - t)]).
pub fn solve_h_eps(
    law: &OffspringLaw,
    wlaw: WeightLaw,
    eps: f64,
    grid: GridSpec,
    opts: SolverOptions,
) -> Result<GridCdf> {
    if !(eps > 0.0) {
        return Err(domain(format!("eps must be positive, got {eps}")));
    }
    let kernel = Kernel::for_affine(grid, wlaw, eps);
    let z = grid.points / 2;
    let mut h = GridCdf::constant(grid, 0.0);
    for i in z..grid.points {
        h.values[i] = 1.0;
    }
    h.atom0 = 1.0;
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let e = kernel.expect(&h);
        let mut next = GridCdf::constant(grid, 0.0);
        for i in z..grid.points {
            next.values[i] = law.hat(1.0 - e[i].clamp(0.0, 1.0));
        }
        next.atom0 = next.values[z];
        residual = sup_diff(&h, &next);
        relax(&mut h, &next, opts.damping);
        check_monotone(&h)?;
        if residual < opts.tol {
            return Ok(h);
        }
    }
    Err(Error::NotConverged { iterations: opts.max_iter, residual })
}

fn sup_diff(a: &GridCdf, b: &GridCdf) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold((a.atom0 - b.atom0).abs(), f64::max)
}

fn relax(h: &mut GridCdf, next: &GridCdf, lam: f64) {
    for (x, y) in h.values.iter_mut().zip(&next.values) {
        *x = (1.0 - lam) * *x + lam * y;
    }
    h.atom0 = (1.0 - lam) * h.atom0 + lam * next.atom0;
}

fn check_monotone(h: &GridCdf) -> Result<()> {
    if h.is_monotone() {
        Ok(())
    } else {
        Err(Error::Inconsistent("iterate lost monotonicity".into()))
    }
}

/// Solution (h_0, ..., h_k) of the multi-level system.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfSystem {
    pub k: usize,
    pub levels: Vec<GridCdf>,
    /// Sup-norm residual after each iteration.
    pub residuals: Vec<f64>,
    /// Solved in the leafless form (no clamp at level 0).
    pub leafless: bool,
    /// Set when the law is not subcritical, so convergence is not guaranteed.
    pub regime_warning: Option<String>,
}

impl CdfSystem {
    /// Mass of the message (0, 0).
    pub fn beta(&self) -> f64 {
        self.levels[0].atom0
    }

    /// l_0 = 0, l_1, ..., l_k, l_{k+1} = 1, with l_j = lim_{t -> -inf} h_j.
    pub fn plateaus(&self) -> Vec<f64> {
        let mut l: Vec<f64> = self.levels.iter().map(|h| h.left_limit()).collect();
        l[0] = 0.0;
        l.push(1.0);
        l
    }

    /// Largest violation of the limit conditions: stitching of consecutive
    /// levels, h_0 vanishing at -inf and h_k reaching 1 at +inf.
    pub fn boundary_defect(&self) -> f64 {
        let last = self.levels[self.k].right_limit();
        self.stitching_defect().max(self.levels[0].left_limit().abs()).max((1.0 - last).abs())
    }

    /// Largest mismatch between right limit of h_j and left limit of h_{j+1}.
    pub fn stitching_defect(&self) -> f64 {
        self.levels.windows(2).map(|w| (w[0].right_limit() - w[1].left_limit()).abs()).fold(0.0, f64::max)
    }

    /// CSV with columns `level,t,h`, after `#` header lines.
    pub fn to_csv(&self) -> String {
        let g = self.levels[0].grid;
        let l: Vec<String> = self.plateaus()[1..=self.k].iter().map(|x| format!("{x:.12}")).collect();
        let mut s = format!(
            "# lexmatch-cdf v1\n# T={} delta={} beta={:.12} plateaus={}\nlevel,t,h\n",
            g.t_max,
            g.delta(),
            self.beta(),
            l.join(";")
        );
        for (j, h) in self.levels.iter().enumerate() {
            for (i, v) in h.values.iter().enumerate() {
                let _ = writeln!(s, "{j},{:.10},{:.12}", g.t(i), v);
            }
        }
        s
    }
}

/// Solve the system for k levels by damped iteration of the joint operator.
pub fn solve_system(
    law: &OffspringLaw,
    wlaw: WeightLaw,
    k: usize,
    grid: GridSpec,
    opts: SolverOptions,
) -> Result<CdfSystem> {
    let kernel = Kernel::for_weights(grid, wlaw);
    let leafless = law.leafless();
    let rho = crate::genfn::rho_subcritical(law, 100)?;
    let regime_warning = (rho >= 1.0).then(|| format!("rho = {rho:.4} >= 1, convergence not guaranteed"));
    let z = grid.points / 2;
    let plate = initial_plateaus(law, k);
    let mut levels: Vec<GridCdf> = (0..=k)
        .map(|j| {
            let (lo, hi) = (plate[j], plate[j + 1]);
            let mut h = GridCdf::constant(grid, lo);
            for i in 0..grid.points {
                let t = grid.t(i);
                h.values[i] = if j == 0 && !leafless {
                    if i >= z {
                        lo + 0.5 * (hi - lo) * (1.0 + (t / (1.0 + t)))
                    } else {
                        0.0
                    }
                } else {
                    lo + (hi - lo) / (1.0 + (-t).exp())
                };
            }
            if j == 0 && !leafless {
                h.atom0 = h.values[z];
            }
            h
        })
        .collect();

    let mut residuals = Vec::new();
    for _ in 0..opts.max_iter {
        let exps: Vec<Vec<f64>> = levels.iter().map(|h| kernel.expect(h)).collect();
        let mut res: f64 = 0.0;
        let next: Vec<GridCdf> = (0..=k)
            .map(|j| {
                let e = &exps[k - j];
                let mut h = GridCdf::constant(grid, 0.0);
                for i in 0..grid.points {
                    if j == 0 && !leafless && i < z {
                        continue;
                    }
                    h.values[i] = law.hat(1.0 - e[i].clamp(0.0, 1.0));
                }
                if j == 0 && !leafless {
                    h.atom0 = h.values[z];
                }
                h
            })
            .collect();
        for (h, n) in levels.iter_mut().zip(&next) {
            res = res.max(sup_diff(h, n));
            relax(h, n, opts.damping);
            check_monotone(h)?;
        }
        residuals.push(res);
        if res < opts.tol {
            return Ok(CdfSystem { k, levels, residuals, leafless, regime_warning });
        }
    }
    Err(Error::NotConverged { iterations: opts.max_iter, residual: residuals.last().copied().unwrap_or(f64::NAN) })
}

/// l_0 = 0, ..., l_{k+1} = 1 from the extreme fixed points.
fn initial_plateaus(law: &OffspringLaw, k: usize) -> Vec<f64> {
    let fp = crate::genfn::double_fixed_points(law, 1e-12).map(|f| f.points).unwrap_or_default();
    let g = crate::genfn::gamma(law);
    let lo = fp.first().copied().unwrap_or(g);
    let hi = fp.last().copied().unwrap_or(g);
    match k {
        0 => vec![0.0, 1.0],
        1 => vec![0.0, g, 1.0],
        _ => {
            let mut v = vec![0.0, lo];
            for j in 1..k - 1 {
                v.push(lo + (hi - lo) * j as f64 / (k - 1) as f64);
            }
            v.push(hi);
            v.push(1.0);
            v
        }
    }
}

/// Integral of 1 - phi_hat^{-1}(u) over the range swept by h, by the change
/// of variables u = h(t) cell by cell, starting at `from` and ending at `to`.
fn range_integral(law: &OffspringLaw, h: &GridCdf, from_index: usize, from: f64, to: f64) -> f64 {
    let f = |a: f64, b: f64| if b > a { (b - a) * (1.0 - law.hat_inv(0.5 * (a + b))) } else { 0.0 };
    let mut acc = 0.0;
    let mut prev = from;
    for &v in &h.values[from_index..] {
        if v > prev {
            acc += f(prev, v.min(to));
            prev = v.min(to);
        }
    }
    acc + f(prev, to)
}

/// Integral of 1 - phi_hat^{-1} over the u-range of level j, [l_j, l_{j+1}]
/// (or [beta, l_1] for j = 0).
fn level_integral(sys: &CdfSystem, law: &OffspringLaw, j: usize) -> f64 {
    let l = sys.plateaus();
    let h = &sys.levels[j];
    if j == 0 && !sys.leafless {
        range_integral(law, h, h.zero_index(), sys.beta(), l[1])
    } else {
        range_integral(law, h, 0, l[j], l[j + 1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConservationResiduals {
    /// beta(1 - phi_hat^{-1}(beta)) + int_beta^{l_1} = l_k l_1 + int_{l_k}^1.
    pub atom_zero: f64,
    /// Balance between levels j and k - j for 0 < j < k.
    pub balance: Vec<f64>,
}

impl ConservationResiduals {
    pub fn max_abs(&self) -> f64 {
        self.balance.iter().fold(self.atom_zero.abs(), |m, r| m.max(r.abs()))
    }
}

pub fn conservation_check(sys: &CdfSystem, law: &OffspringLaw) -> ConservationResiduals {
    let k = sys.k;
    if k == 0 {
        return ConservationResiduals { atom_zero: 0.0, balance: Vec::new() };
    }
    let l = sys.plateaus();
    let b = sys.beta();
    let lhs = b * (1.0 - law.hat_inv(b)) + level_integral(sys, law, 0);
    let rhs = l[k] * l[1] + level_integral(sys, law, k);
    let balance = (1..k)
        .map(|j| {
            let left = l[j] * l[k - j + 1] + level_integral(sys, law, j);
            let right = l[j + 1] * l[k - j] + level_integral(sys, law, k - j);
            left - right
        })
        .collect();
    ConservationResiduals { atom_zero: lhs - rhs, balance }
}

/// Edge matching probability from the solved system, two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeFormulas {
    /// beta(1 - phi_hat^{-1}(beta)) + int_beta^1 (1 - phi_hat^{-1}).
    pub atom_form: f64,
    /// (2 - F_pi(l_1)) / phi'(1).
    pub f_pi_form: f64,
}

pub fn size_from_system(sys: &CdfSystem, law: &OffspringLaw) -> Result<SizeFormulas> {
    let b = sys.beta();
    let integral: f64 = (0..=sys.k).map(|j| level_integral(sys, law, j)).sum();
    let atom_form = b * (1.0 - law.hat_inv(b)) + integral;
    let l1 = sys.plateaus()[1.min(sys.k + 1)];
    let f_pi_form = (2.0 - f_pi(law, l1)?) / law.mean();
    Ok(SizeFormulas { atom_form, f_pi_form })
}

/// Sampler of the boundary law zeta'.
#[derive(Debug, Clone)]
pub enum ZetaSampler {
    FromCdfSystem(CdfSystem),
    PopulationPool { k: u32, pool: Vec<LexMsg> },
}

impl ZetaSampler {
    pub fn k(&self) -> u32 {
        match self {
            ZetaSampler::FromCdfSystem(s) => s.k as u32,
            ZetaSampler::PopulationPool { k, .. } => *k,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> LexMsg {
        match self {
            ZetaSampler::PopulationPool { pool, .. } => pool[rng.random_range(0..pool.len())],
            ZetaSampler::FromCdfSystem(sys) => {
                let u: f64 = rng.random();
                let l = sys.plateaus();
                let j = (0..=sys.k).rev().find(|&j| u >= l[j]).unwrap_or(0);
                LexMsg::new(j as u32, inverse_cdf(&sys.levels[j], u, j == 0 && !sys.leafless))
            }
        }
    }

    /// P(level = j), j = 0..=k.
    pub fn level_masses(&self) -> Vec<f64> {
        match self {
            ZetaSampler::FromCdfSystem(sys) => sys.plateaus().windows(2).map(|w| w[1] - w[0]).collect(),
            ZetaSampler::PopulationPool { k, pool } => {
                let mut m = vec![0.0; *k as usize + 1];
                for msg in pool {
                    if let Some(l) = msg.level() {
                        m[l as usize] += 1.0 / pool.len() as f64;
                    }
                }
                m
            }
        }
    }
}

/// Smallest t with h(t) >= u, interpolating linearly inside a cell.
fn inverse_cdf(h: &GridCdf, u: f64, has_atom: bool) -> f64 {
    let g = h.grid;
    let z = h.zero_index();
    if has_atom && u < h.values[z] {
        return 0.0;
    }
    let start = if has_atom { z } else { 0 };
    let vals = &h.values[start..];
    let i = vals.partition_point(|&v| v < u);
    if i == 0 {
        return g.t(start);
    }
    if i >= vals.len() {
        return g.t(g.points - 1);
    }
    let (a, b) = (vals[i - 1], vals[i]);
    let frac = if b > a { (u - a) / (b - a) } else { 1.0 };
    g.t(start + i - 1) + frac * g.delta()
}

pub fn zeta_prime(sys: &CdfSystem) -> ZetaSampler {
    ZetaSampler::FromCdfSystem(sys.clone())
}

/// One step of the lexicographic recursion with N ~ pi_hat inputs drawn from `draw`.
pub fn recursion_step<R: Rng + ?Sized>(
    k: u32,
    children: usize,
    wlaw: WeightLaw,
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> LexMsg,
) -> LexMsg {
    let mut acc = LexMsg::ZERO;
    for _ in 0..children {
        let w = wlaw.sample(rng);
        let m = draw(rng);
        acc = acc.max_lex(m.offer(k, w));
    }
    acc
}

pub const MIN_POOL: usize = 10_000;

/// Pool-based approximation of zeta': `iters` sweeps of `pool_size` replacements.
pub fn population_dynamics(
    law: &OffspringLaw,
    wlaw: WeightLaw,
    k: u32,
    pool_size: usize,
    iters: usize,
    seed: RngSeed,
) -> Result<ZetaSampler> {
    if pool_size < MIN_POOL {
        return Err(domain(format!("pool size must be at least {MIN_POOL}, got {pool_size}")));
    }
    let mut rng = seed.rng();
    let kids = law.size_biased_sampler();
    let mut pool = vec![LexMsg::ZERO; pool_size];
    for _ in 0..iters * pool_size {
        let n = kids.sample(&mut rng);
        let new = recursion_step(k, n, wlaw, &mut rng, |r| pool[r.random_range(0..pool_size)]);
        let i = rng.random_range(0..pool_size);
        pool[i] = new;
    }
    Ok(ZetaSampler::PopulationPool { k, pool })
}

/// Total variation distance between two mass vectors (padded with zeros).
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    0.5 * (0..n).map(|i| (p.get(i).unwrap_or(&0.0) - q.get(i).unwrap_or(&0.0)).abs()).sum::<f64>()
}

/// Two-sample Kolmogorov distance.
pub fn kolmogorov_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.len() == b.len() { 0.0 } else { 1.0 };
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

//! Offspring laws, generating functions and the asymptotic formulas built on them.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{domain, Error, Result};

/// Largest support accepted for finite-support laws.
pub const MAX_FINITE_SUPPORT: usize = 64;

const SCAN_POINTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum LawFamily {
    Poisson {
        c: f64,
    },
    /// Leafless law whose size-biased version is geometric on {1, 2, ...}:
    /// phi_hat(x) = p x / (1 - (1 - p) x).
    Geometric {
        p: f64,
    },
    Binomial {
        n: u32,
        q: f64,
    },
    FiniteSupport {
        pmf: Vec<f64>,
    },
}

/// Offspring distribution pi on the non-negative integers.
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringLaw {
    family: LawFamily,
    mean: f64,
}

impl OffspringLaw {
    pub fn poisson(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(domain(format!("poisson parameter must be positive, got {c}")));
        }
        Ok(Self { family: LawFamily::Poisson { c }, mean: c })
    }

    pub fn geometric(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(domain(format!("geometric parameter must lie in (0,1), got {p}")));
        }
        let q = 1.0 - p;
        let mean = q * q / (p * geom_norm(p));
        Ok(Self { family: LawFamily::Geometric { p }, mean })
    }

    pub fn binomial(n: u32, q: f64) -> Result<Self> {
        if n == 0 || !(q > 0.0 && q <= 1.0) {
            return Err(domain(format!("binomial needs n >= 1 and q in (0,1], got n={n} q={q}")));
        }
        Ok(Self { family: LawFamily::Binomial { n, q }, mean: n as f64 * q })
    }

    /// Finite-support law from its pmf. The degenerate law delta_0 is
    /// accepted; its size-biased law is taken to be delta_0 as well.
    pub fn finite(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() || pmf.len() > MAX_FINITE_SUPPORT {
            return Err(domain(format!(
                "finite-support pmf needs 1..={MAX_FINITE_SUPPORT} entries, got {}",
                pmf.len()
            )));
        }
        if pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(domain("pmf entries must be finite and non-negative"));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(domain(format!("pmf sums to {total}, expected 1")));
        }
        let mean = pmf.iter().enumerate().map(|(j, p)| j as f64 * p).sum();
        Ok(Self { family: LawFamily::FiniteSupport { pmf }, mean })
    }

    pub fn family(&self) -> &LawFamily {
        &self.family
    }

    /// phi'(1).
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// phi(x), phi'(x) or phi''(x) without domain checks.
    pub(crate) fn phi_raw(&self, x: f64, order: u8) -> f64 {
        match &self.family {
            LawFamily::Poisson { c } => c.powi(order as i32) * (c * (x - 1.0)).exp(),
            LawFamily::Binomial { n, q } => {
                let n = *n as i32;
                let base = 1.0 - q + q * x;
                match order {
                    0 => base.powi(n),
                    1 => n as f64 * q * base.powi(n - 1),
                    _ if n < 2 => 0.0,
                    _ => (n * (n - 1)) as f64 * q * q * base.powi(n - 2),
                }
            }
            LawFamily::Geometric { p } => {
                let q = 1.0 - p;
                let l = geom_norm(*p);
                let d = 1.0 - q * x;
                match order {
                    0 => (-d.ln() - q * x) / l,
                    1 => q * q * x / (d * l),
                    _ => q * q / (d * d * l),
                }
            }
            LawFamily::FiniteSupport { pmf } => {
                // Horner on the order-th derivative
                let mut acc = 0.0;
                for j in (order as usize..pmf.len()).rev() {
                    let mut coef = pmf[j];
                    for r in 0..order as usize {
                        coef *= (j - r) as f64;
                    }
                    acc = acc * x + coef;
                }
                acc
            }
        }
    }

    /// phi_hat(x) or phi_hat'(x), no domain checks.
    pub(crate) fn hat_raw(&self, x: f64, order: u8) -> f64 {
        if self.mean == 0.0 {
            return if order == 0 { 1.0 } else { 0.0 };
        }
        match &self.family {
            LawFamily::Poisson { c } => c.powi(order as i32) * (c * (x - 1.0)).exp(),
            LawFamily::Geometric { p } => {
                let d = 1.0 - (1.0 - p) * x;
                if order == 0 {
                    p * x / d
                } else {
                    p / (d * d)
                }
            }
            _ => self.phi_raw(x, order + 1) / self.mean,
        }
    }

    /// phi_hat(x).
    pub fn hat(&self, x: f64) -> f64 {
        self.hat_raw(x, 0)
    }

    /// phi_hat'(x).
    pub fn hat_prime(&self, x: f64) -> f64 {
        self.hat_raw(x, 1)
    }

    /// Inverse of phi_hat on [phi_hat(0), 1] by bisection; clamps outside.
    pub fn hat_inv(&self, u: f64) -> f64 {
        if u <= self.hat(0.0) {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        bisect(|x| self.hat(x) - u, 0.0, 1.0, 1e-12)
    }

    /// pi_j.
    pub fn pmf(&self, j: usize) -> f64 {
        match &self.family {
            LawFamily::Poisson { c } => {
                let lf: f64 = (1..=j).map(|i| (i as f64).ln()).sum();
                (-c + j as f64 * c.ln() - lf).exp()
            }
            LawFamily::Binomial { n, q } => {
                let n = *n as usize;
                if j > n {
                    return 0.0;
                }
                if *q == 1.0 {
                    return if j == n { 1.0 } else { 0.0 };
                }
                let lc: f64 = (0..j).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum();
                (lc + j as f64 * q.ln() + (n - j) as f64 * (1.0 - q).ln()).exp()
            }
            LawFamily::Geometric { p } => {
                if j < 2 {
                    0.0
                } else {
                    (1.0 - p).powi(j as i32) / (j as f64 * geom_norm(*p))
                }
            }
            LawFamily::FiniteSupport { pmf } => pmf.get(j).copied().unwrap_or(0.0),
        }
    }

    /// pi_hat_j = (j+1) pi_{j+1} / m.
    pub fn size_biased_pmf(&self, j: usize) -> f64 {
        if self.mean == 0.0 {
            return if j == 0 { 1.0 } else { 0.0 };
        }
        (j + 1) as f64 * self.pmf(j + 1) / self.mean
    }

    /// Inverse-CDF sampler for pi.
    pub fn sampler(&self) -> DiscreteSampler {
        DiscreteSampler::from_fn(|j| self.pmf(j))
    }

    /// Inverse-CDF sampler for the size-biased law.
    pub fn size_biased_sampler(&self) -> DiscreteSampler {
        DiscreteSampler::from_fn(|j| self.size_biased_pmf(j))
    }

    /// True when the tree has no leaves below the root, i.e. phi_hat(0) = 0.
    pub fn leafless(&self) -> bool {
        self.hat(0.0) == 0.0
    }
}

fn geom_norm(p: f64) -> f64 {
    -p.ln() - (1.0 - p)
}

impl fmt::Display for OffspringLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            LawFamily::Poisson { c } => write!(f, "poisson:{c}"),
            LawFamily::Geometric { p } => write!(f, "geom:{p}"),
            LawFamily::Binomial { n, q } => write!(f, "binom:{n}:{q}"),
            LawFamily::FiniteSupport { pmf } => {
                let parts: Vec<String> = pmf.iter().map(|p| p.to_string()).collect();
                write!(f, "pmf:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for OffspringLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |detail: &str| Error::Parse { what: "offspring law", detail: format!("{s:?}: {detail}") };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("expected a number"));
        let (name, rest) = s.split_once(':').ok_or_else(|| bad("expected <family>:<params>"))?;
        match name.trim() {
            "poisson" => Self::poisson(num(rest)?),
            "geom" => Self::geometric(num(rest)?),
            "binom" => {
                let (n, q) = rest.split_once(':').ok_or_else(|| bad("expected binom:<n>:<q>"))?;
                let n = n.trim().parse::<u32>().map_err(|_| bad("n must be a non-negative integer"))?;
                Self::binomial(n, num(q)?)
            }
            "pmf" => Self::finite(rest.split(',').map(num).collect::<Result<Vec<_>>>()?),
            _ => Err(bad("unknown family")),
        }
    }
}

/// Cumulative table sampler over {0, 1, ...}, truncated where the tail drops below 1e-15.
#[derive(Debug, Clone)]
pub struct DiscreteSampler {
    cdf: Vec<f64>,
}

impl DiscreteSampler {
    fn from_fn(pmf: impl Fn(usize) -> f64) -> Self {
        let mut cdf = Vec::new();
        let mut acc = 0.0;
        for j in 0..100_000 {
            acc += pmf(j);
            cdf.push(acc);
            if acc > 1.0 - 1e-15 && j > 0 {
                break;
            }
        }
        let total = acc;
        for c in &mut cdf {
            *c /= total;
        }
        Self { cdf }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }

    pub fn support_len(&self) -> usize {
        self.cdf.len()
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(domain(format!("argument {x} outside [0,1]")))
    }
}

fn check_order(order: u8) -> Result<()> {
    if order <= 1 {
        Ok(())
    } else {
        Err(domain(format!("derivative order {order} not supported")))
    }
}

/// phi(x) (order 0) or phi'(x) (order 1).
pub fn pgf_eval(law: &OffspringLaw, x: f64, order: u8) -> Result<f64> {
    check_unit(x)?;
    check_order(order)?;
    Ok(law.phi_raw(x, order))
}

/// phi_hat(x) (order 0) or phi_hat'(x) (order 1).
pub fn size_biased_pgf(law: &OffspringLaw, x: f64, order: u8) -> Result<f64> {
    check_unit(x)?;
    check_order(order)?;
    Ok(law.hat_raw(x, order))
}

pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn double_map(law: &OffspringLaw, t: f64) -> f64 {
    law.hat(1.0 - law.hat(1.0 - t))
}

/// Fixed points of t -> phi_hat(1 - phi_hat(1 - t)).
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleFixedPoints {
    /// Sorted; empty when `degenerate`.
    pub points: Vec<f64>,
    /// The map is the identity on a subinterval.
    pub degenerate: bool,
}

pub fn double_fixed_points(law: &OffspringLaw, tol: f64) -> Result<DoubleFixedPoints> {
    if !(tol > 0.0) {
        return Err(domain("tolerance must be positive"));
    }
    let g = |t: f64| double_map(law, t) - t;
    let degenerate = (1..=10).all(|i| g(i as f64 / 11.0).abs() < 10.0 * tol);
    if degenerate {
        return Ok(DoubleFixedPoints { points: Vec::new(), degenerate: true });
    }
    let btol = tol.min(1e-12);
    let mut points: Vec<f64> = Vec::new();
    let push = |t: f64, pts: &mut Vec<f64>| {
        if pts.last().is_none_or(|&l| t - l > 1e-9) {
            pts.push(t);
        }
    };
    let grid: Vec<f64> = (0..=SCAN_POINTS).map(|i| i as f64 / SCAN_POINTS as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| g(t)).collect();
    for i in 0..=SCAN_POINTS {
        if vals[i].abs() < 1e-14 {
            push(grid[i], &mut points);
        } else if i < SCAN_POINTS && vals[i + 1].abs() >= 1e-14 && vals[i] * vals[i + 1] < 0.0 {
            push(bisect(g, grid[i], grid[i + 1], btol), &mut points);
        }
    }
    Ok(DoubleFixedPoints { points, degenerate: false })
}

/// The unique fixed point of t -> phi_hat(1 - t).
pub fn gamma(law: &OffspringLaw) -> f64 {
    bisect(|t| law.hat(1.0 - t) - t, 0.0, 1.0, 1e-15)
}

/// F_pi(x) = phi(1-x) + phi(1 - phi_hat(1-x)) + phi'(1) x phi_hat(1-x).
pub fn f_pi(law: &OffspringLaw, x: f64) -> Result<f64> {
    check_unit(x)?;
    Ok(f_pi_raw(law, x))
}

fn f_pi_raw(law: &OffspringLaw, x: f64) -> f64 {
    let h = law.hat(1.0 - x);
    law.phi_raw(1.0 - x, 0) + law.phi_raw(1.0 - h, 0) + law.mean * x * h
}

fn max_f_pi(law: &OffspringLaw, fixed: &[f64]) -> f64 {
    let grid = (0..=SCAN_POINTS).map(|i| i as f64 / SCAN_POINTS as f64);
    fixed.iter().copied().chain(grid).map(|x| f_pi_raw(law, x)).fold(f64::NEG_INFINITY, f64::max)
}

/// Asymptotic fraction of matched vertices, 2 - max F_pi; 1 for degenerate laws.
pub fn matching_vertex_density(law: &OffspringLaw) -> f64 {
    let fp = double_fixed_points(law, 1e-12).expect("positive tolerance");
    if fp.degenerate {
        return 1.0;
    }
    (2.0 - max_f_pi(law, &fp.points)).max(0.0)
}

/// Karp-Sipser quantities for Poisson(c) offspring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KarpSipser {
    pub gamma_low: f64,
    pub gamma_high: f64,
    pub beta: f64,
    pub edge_density: f64,
    pub vertex_density: f64,
}

pub fn karp_sipser_poisson(c: f64) -> Result<KarpSipser> {
    let law = OffspringLaw::poisson(c)?;
    let fp = double_fixed_points(&law, 1e-13)?;
    let gl = *fp.points.first().ok_or_else(|| domain("no fixed point found"))?;
    let gh = (-c * gl).exp();
    let beta = c * gl * gh + gl + gh - 1.0;
    let edge_density = (2.0 - gh - gl - c * gl * gh) / c;
    Ok(KarpSipser { gamma_low: gl, gamma_high: gh, beta, edge_density, vertex_density: c * edge_density })
}

fn rho_objective(law: &OffspringLaw, x1: f64, x2: f64, lam: f64) -> f64 {
    let a = lam * law.hat_prime(1.0 - x1) + (1.0 - lam) * law.hat_prime(1.0 - x2);
    let y = lam * law.hat(1.0 - x1) + (1.0 - lam) * law.hat(1.0 - x2);
    a * law.hat_prime(1.0 - y)
}

/// rho_pi = sup_X E[phi_hat'(1-X)] phi_hat'(1 - E[phi_hat(1-X)]) over laws on [0,1],
/// searched over two-point laws.
pub fn rho_subcritical(law: &OffspringLaw, grid: usize) -> Result<f64> {
    if grid < 100 {
        return Err(domain(format!("grid must be at least 100, got {grid}")));
    }
    let lam_n = (grid / 4).max(2);
    let xs: Vec<f64> = (0..grid).map(|i| i as f64 / (grid - 1) as f64).collect();
    let hp: Vec<f64> = xs.iter().map(|&x| law.hat_prime(1.0 - x)).collect();
    let h: Vec<f64> = xs.iter().map(|&x| law.hat(1.0 - x)).collect();

    let mut best: Vec<(f64, [f64; 3])> = Vec::new();
    for i in 0..grid {
        for j in i..grid {
            for l in 0..lam_n {
                let lam = l as f64 / (lam_n - 1) as f64;
                let a = lam * hp[i] + (1.0 - lam) * hp[j];
                let y = lam * h[i] + (1.0 - lam) * h[j];
                let v = a * law.hat_prime(1.0 - y);
                if best.len() < 8 || v > best[best.len() - 1].0 {
                    best.push((v, [xs[i], xs[j], lam]));
                    best.sort_by(|a, b| b.0.total_cmp(&a.0));
                    best.truncate(8);
                }
            }
        }
    }
    let obj = |p: &[f64; 3]| {
        let c = p.map(|v| v.clamp(0.0, 1.0));
        rho_objective(law, c[0], c[1], c[2])
    };
    let step = 1.0 / grid as f64;
    let refined = best.iter().map(|(v, p)| nelder_mead_max(obj, *p, step).max(*v)).fold(f64::NEG_INFINITY, f64::max);
    Ok(refined)
}

/// Maximise f from start with a simplex of the given scale.
fn nelder_mead_max(f: impl Fn(&[f64; 3]) -> f64, start: [f64; 3], scale: f64) -> f64 {
    let mut simplex: Vec<([f64; 3], f64)> = (0..4)
        .map(|i| {
            let mut p = start;
            if i > 0 {
                p[i - 1] += if p[i - 1] + scale <= 1.0 { scale } else { -scale };
            }
            (p, f(&p))
        })
        .collect();
    for _ in 0..2000 {
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        if (simplex[0].1 - simplex[3].1).abs() < 1e-15 {
            break;
        }
        let mut centroid = [0.0; 3];
        for (p, _) in &simplex[..3] {
            for d in 0..3 {
                centroid[d] += p[d] / 3.0;
            }
        }
        let worst = simplex[3];
        let along = |t: f64| {
            let mut q = [0.0; 3];
            for d in 0..3 {
                q[d] = centroid[d] + t * (worst.0[d] - centroid[d]);
            }
            q
        };
        let r = along(-1.0);
        let fr = f(&r);
        if fr > simplex[0].1 {
            let e = along(-2.0);
            let fe = f(&e);
            simplex[3] = if fe > fr { (e, fe) } else { (r, fr) };
        } else if fr > simplex[2].1 {
            simplex[3] = (r, fr);
        } else {
            let c = along(0.5);
            let fc = f(&c);
            if fc > worst.1 {
                simplex[3] = (c, fc);
            } else {
                let b = simplex[0].0;
                for s in simplex.iter_mut().skip(1) {
                    for d in 0..3 {
                        s.0[d] = b[d] + 0.5 * (s.0[d] - b[d]);
                    }
                    s.1 = f(&s.0);
                }
            }
        }
    }
    simplex.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max)
}

/// Macroscopic regime of a law.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    /// Number of macroscopic levels above 0.
    pub k: usize,
    /// Law of the level i: P(i = j) for j = 0..=k.
    pub atoms: Vec<f64>,
    pub fixed_points: Vec<f64>,
    /// Fixed point of t -> phi_hat(1 - t).
    pub gamma: f64,
    pub rho: f64,
    pub unique_double_fp: bool,
    pub subcritical: bool,
    pub degenerate_family: bool,
}

impl RegimeReport {
    /// Plateau levels l_1..l_k.
    pub fn plateaus(&self) -> Vec<f64> {
        self.atoms
            .iter()
            .take(self.k)
            .scan(0.0, |acc, a| {
                *acc += a;
                Some(*acc)
            })
            .collect()
    }
}

pub fn macroscopic_law(law: &OffspringLaw) -> Result<RegimeReport> {
    let fp = double_fixed_points(law, 1e-12)?;
    let rho = rho_subcritical(law, 200)?;
    let g = gamma(law);
    if fp.degenerate {
        return Ok(RegimeReport {
            k: 0,
            atoms: vec![1.0],
            fixed_points: Vec::new(),
            gamma: g,
            rho,
            unique_double_fp: false,
            subcritical: rho < 1.0,
            degenerate_family: true,
        });
    }
    let vals: Vec<f64> = fp.points.iter().map(|&t| f_pi_raw(law, t)).collect();
    let top = max_f_pi(law, &fp.points);
    let argmax: Vec<f64> = fp.points.iter().zip(&vals).filter(|(_, v)| **v >= top - 1e-9).map(|(t, _)| *t).collect();
    let (k, atoms) = match argmax.as_slice() {
        [t] => (1, vec![*t, 1.0 - t]),
        [lo, hi] => (2, vec![*lo, hi - lo, 1.0 - hi]),
        _ => (0, vec![1.0]),
    };
    let unique = fp.points.len() == 1;
    Ok(RegimeReport {
        k,
        atoms,
        fixed_points: fp.points,
        gamma: g,
        rho,
        unique_double_fp: unique,
        subcritical: rho < 1.0 && unique,
        degenerate_family: false,
    })
}

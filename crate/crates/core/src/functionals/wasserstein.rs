//! Wasserstein-1 distance between nonnegative densities on the torus.
//!
//! Common mass is cancelled first (exact for a metric cost). Small grids
//! use successive shortest paths on the bipartite transport graph, larger
//! ones a log-domain Sinkhorn solver with ε-scaling, regularization
//! `1e-3 × diameter`, and debiasing
//! `S = OT(a, b) - ½ OT(a, a) - ½ OT(b, b)`, where `OT` is the transport
//! cost of the entropic plan.

use std::f64::consts::PI;

use crate::error::{Result, VnsError};
use crate::grid_spectral::{TorusField, TorusGrid};

/// Regularization of the entropic route, relative to the torus diameter.
pub const ENTROPIC_REG_FACTOR: f64 = 1e-3;
/// Largest `n` per axis handled by the exact route in automatic mode.
pub const EXACT_MAX_N: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum W1Method {
    Auto,
    Exact,
    Entropic,
}

/// Geodesic distance on the 2π-torus.
pub fn torus_distance(x: &[f64], y: &[f64]) -> f64 {
    let p = 2.0 * PI;
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = (a - b).rem_euclid(p);
            let d = d.min(p - d);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Diameter of the `d`-torus.
pub fn torus_diameter(d: usize) -> f64 {
    PI * (d as f64).sqrt()
}

pub fn wasserstein1(mu: &TorusField, nu: &TorusField) -> Result<f64> {
    wasserstein1_with(mu, nu, W1Method::Auto)
}

fn checked_values(f: &TorusField, what: &str) -> Result<Vec<f64>> {
    if f.components() != 1 {
        return Err(VnsError::InvalidArgument(format!("{what} must be a scalar field")));
    }
    f.check_finite()?;
    let max = f.values(0).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if f.min(0) < -1e-12 * max {
        return Err(VnsError::InvalidArgument(format!("{what} has negative values")));
    }
    Ok(f.values(0).iter().map(|x| x.max(0.0)).collect())
}

pub fn wasserstein1_with(mu: &TorusField, nu: &TorusField, method: W1Method) -> Result<f64> {
    mu.same_layout(nu)?;
    let grid = mu.grid();
    let a = checked_values(mu, "mu")?;
    let b = checked_values(nu, "nu")?;
    let len = grid.len() as f64;
    let ma: f64 = a.iter().sum::<f64>() / len;
    let mb: f64 = b.iter().sum::<f64>() / len;
    if !(ma > 0.0) || (ma - mb).abs() > 1e-8 * ma.max(mb) {
        return Err(VnsError::MassMismatch(ma, mb));
    }
    let rescale = ma / mb;
    let mut supply = Vec::new();
    let mut demand = Vec::new();
    for i in 0..grid.len() {
        let diff = (a[i] - b[i] * rescale) / len;
        if diff > 0.0 {
            supply.push((i, diff));
        } else if diff < 0.0 {
            demand.push((i, -diff));
        }
    }
    if supply.is_empty() || demand.is_empty() {
        return Ok(0.0);
    }
    let table = DistanceTable::new(grid);
    let sa: Vec<f64> = supply.iter().map(|s| s.1).collect();
    let db: Vec<f64> = demand.iter().map(|s| s.1).collect();
    let si: Vec<usize> = supply.iter().map(|s| s.0).collect();
    let ti: Vec<usize> = demand.iter().map(|s| s.0).collect();
    let exact = match method {
        W1Method::Exact => true,
        W1Method::Entropic => false,
        W1Method::Auto => grid.n() <= EXACT_MAX_N,
    };
    if exact {
        Ok(w1_exact_points(&sa, &db, |s, t| table.get(si[s], ti[t])))
    } else {
        let reg = ENTROPIC_REG_FACTOR * torus_diameter(grid.dim());
        Ok(w1_entropic_indexed(&sa, &si, &db, &ti, &table, reg))
    }
}

/// Torus distances between grid nodes, indexed by periodic offset.
struct DistanceTable {
    grid: TorusGrid,
    table: Vec<f64>,
}

impl DistanceTable {
    fn new(grid: &TorusGrid) -> Self {
        let h = grid.spacing();
        let n = grid.n();
        let table = (0..grid.len())
            .map(|i| {
                let m = grid.multi_index(i);
                (0..grid.dim())
                    .map(|a| {
                        let k = m[a].min(n - m[a]) as f64 * h;
                        k * k
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        Self { grid: grid.clone(), table }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        let n = self.grid.n();
        let (mi, mj) = (self.grid.multi_index(i), self.grid.multi_index(j));
        let mut flat = 0;
        for a in 0..self.grid.dim() {
            flat = flat * n + (mi[a] + n - mj[a]) % n;
        }
        self.table[flat]
    }
}

/// Exact optimal transport cost between weighted point sets by successive
/// shortest paths. `a` and `b` must have equal totals.
pub fn w1_exact_points(a: &[f64], b: &[f64], cost: impl Fn(usize, usize) -> f64) -> f64 {
    let (ns, nt) = (a.len(), b.len());
    if ns == 0 || nt == 0 {
        return 0.0;
    }
    let c: Vec<f64> = (0..ns).flat_map(|s| (0..nt).map(move |t| (s, t))).map(|(s, t)| cost(s, t)).collect();
    let total: f64 = a.iter().sum();
    let tol = 1e-15 * total;
    let mut sa = a.to_vec();
    let mut db = b.to_vec();
    let mut flow = vec![0.0; ns * nt];
    let mut pi_s = vec![0.0; ns];
    let mut pi_t = vec![0.0; nt];
    const NONE: usize = usize::MAX;
    let mut dist_s = vec![0.0; ns];
    let mut dist_t = vec![0.0; nt];
    let mut done_s = vec![false; ns];
    let mut done_t = vec![false; nt];
    let mut prev_t = vec![NONE; nt];
    let mut prev_s = vec![NONE; ns];
    loop {
        if !sa.iter().any(|&x| x > tol) || !db.iter().any(|&x| x > tol) {
            break;
        }
        for s in 0..ns {
            dist_s[s] = if sa[s] > tol { 0.0 } else { f64::INFINITY };
            done_s[s] = false;
            prev_s[s] = NONE;
        }
        dist_t.iter_mut().for_each(|x| *x = f64::INFINITY);
        done_t.iter_mut().for_each(|x| *x = false);
        prev_t.iter_mut().for_each(|x| *x = NONE);
        let sink = loop {
            // dense Dijkstra: pick the closest unfinished node
            let mut best = f64::INFINITY;
            let mut pick = None;
            for s in 0..ns {
                if !done_s[s] && dist_s[s] < best {
                    best = dist_s[s];
                    pick = Some((true, s));
                }
            }
            for t in 0..nt {
                if !done_t[t] && dist_t[t] < best {
                    best = dist_t[t];
                    pick = Some((false, t));
                }
            }
            match pick {
                None => break None,
                Some((true, s)) => {
                    done_s[s] = true;
                    let row = &c[s * nt..(s + 1) * nt];
                    for t in 0..nt {
                        if done_t[t] {
                            continue;
                        }
                        let nd = best + (row[t] + pi_s[s] - pi_t[t]).max(0.0);
                        if nd < dist_t[t] {
                            dist_t[t] = nd;
                            prev_t[t] = s;
                        }
                    }
                }
                Some((false, t)) => {
                    done_t[t] = true;
                    if db[t] > tol {
                        break Some(t);
                    }
                    for s in 0..ns {
                        if done_s[s] || flow[s * nt + t] <= tol {
                            continue;
                        }
                        let nd = best + (-c[s * nt + t] + pi_t[t] - pi_s[s]).max(0.0);
                        if nd < dist_s[s] {
                            dist_s[s] = nd;
                            prev_s[s] = t;
                        }
                    }
                }
            }
        };
        let Some(sink) = sink else { break };
        let reach = dist_t[sink];
        for s in 0..ns {
            pi_s[s] += dist_s[s].min(reach);
        }
        for t in 0..nt {
            pi_t[t] += dist_t[t].min(reach);
        }
        // walk back to the root source, collecting the bottleneck
        let mut delta = db[sink];
        let mut t = sink;
        let root = loop {
            let s = prev_t[t];
            match prev_s[s] {
                NONE => break s,
                tp => {
                    delta = delta.min(flow[s * nt + tp]);
                    t = tp;
                }
            }
        };
        delta = delta.min(sa[root]);
        let mut t = sink;
        loop {
            let s = prev_t[t];
            flow[s * nt + t] += delta;
            match prev_s[s] {
                NONE => break,
                tp => {
                    flow[s * nt + tp] -= delta;
                    if flow[s * nt + tp] < tol {
                        flow[s * nt + tp] = 0.0;
                    }
                    t = tp;
                }
            }
        }
        sa[root] -= delta;
        db[sink] -= delta;
    }
    flow.iter().zip(&c).map(|(f, c)| f * c).sum()
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Transport cost of the entropic plan between `a` (rows) and `b`
/// (columns) for the dense cost `c`; `symmetric` when `a == b`.
fn sinkhorn_cost(a: &[f64], b: &[f64], c: &[f64], reg: f64, symmetric: bool) -> f64 {
    let (ns, nt) = (a.len(), b.len());
    let la: Vec<f64> = a.iter().map(|x| x.ln()).collect();
    let lb: Vec<f64> = b.iter().map(|x| x.ln()).collect();
    let cmax = c.iter().copied().fold(0.0, f64::max).max(reg);
    let mut f = vec![0.0; ns];
    let mut g = vec![0.0; nt];
    let mass: f64 = a.iter().sum();
    let mut eps = cmax;
    loop {
        eps = (eps * 0.5).max(reg);
        let last = eps <= reg;
        let max_iter = if last { 5000 } else { 200 };
        for it in 0..max_iter {
            if symmetric {
                let t: Vec<f64> = (0..ns)
                    .map(|i| -eps * log_sum_exp((0..ns).map(|j| la[j] + (f[j] - c[i * ns + j]) / eps)))
                    .collect();
                f.iter_mut().zip(&t).for_each(|(x, y)| *x = 0.5 * (*x + y));
            } else {
                // column update with row-major traversal
                let mut m = vec![f64::NEG_INFINITY; nt];
                for i in 0..ns {
                    for j in 0..nt {
                        m[j] = m[j].max(la[i] + (f[i] - c[i * nt + j]) / eps);
                    }
                }
                let mut s = vec![0.0; nt];
                for i in 0..ns {
                    for j in 0..nt {
                        s[j] += (la[i] + (f[i] - c[i * nt + j]) / eps - m[j]).exp();
                    }
                }
                for j in 0..nt {
                    g[j] = -eps * (m[j] + s[j].ln());
                }
                for i in 0..ns {
                    f[i] = -eps * log_sum_exp((0..nt).map(|j| lb[j] + (g[j] - c[i * nt + j]) / eps));
                }
            }
            if it % 10 == 9 || it + 1 == max_iter {
                // column marginal error (rows are exact after the f update)
                let (gg, lbb, ncol) = if symmetric { (&f, &la, ns) } else { (&g, &lb, nt) };
                let mut col = vec![0.0; ncol];
                for i in 0..ns {
                    for j in 0..ncol {
                        col[j] += (la[i] + lbb[j] + (f[i] + gg[j] - c[i * ncol + j]) / eps).exp();
                    }
                }
                let target = if symmetric { a } else { b };
                let err: f64 = col.iter().zip(target).map(|(x, y)| (x - y).abs()).sum();
                let tol = if last { 1e-10 } else { 1e-6 };
                if err <= tol * mass {
                    break;
                }
            }
        }
        if last {
            break;
        }
    }
    let (gg, lbb, ncol) = if symmetric { (&f, &la, ns) } else { (&g, &lb, nt) };
    let mut total = 0.0;
    for i in 0..ns {
        for j in 0..ncol {
            let cij = c[i * ncol + j];
            total += cij * (la[i] + lbb[j] + (f[i] + gg[j] - cij) / eps).exp();
        }
    }
    total
}

/// Debiased entropic transport cost between weighted point sets.
pub fn w1_entropic_points(
    a: &[f64],
    b: &[f64],
    cost_ab: impl Fn(usize, usize) -> f64,
    cost_aa: impl Fn(usize, usize) -> f64,
    cost_bb: impl Fn(usize, usize) -> f64,
    reg: f64,
) -> f64 {
    let (ns, nt) = (a.len(), b.len());
    let dense = |n: usize, m: usize, f: &dyn Fn(usize, usize) -> f64| -> Vec<f64> {
        (0..n * m).map(|k| f(k / m, k % m)).collect()
    };
    let ab = sinkhorn_cost(a, b, &dense(ns, nt, &cost_ab), reg, false);
    let aa = sinkhorn_cost(a, a, &dense(ns, ns, &cost_aa), reg, true);
    let bb = sinkhorn_cost(b, b, &dense(nt, nt, &cost_bb), reg, true);
    ab - 0.5 * aa - 0.5 * bb
}

fn w1_entropic_indexed(
    a: &[f64],
    ai: &[usize],
    b: &[f64],
    bi: &[usize],
    table: &DistanceTable,
    reg: f64,
) -> f64 {
    w1_entropic_points(
        a,
        b,
        |s, t| table.get(ai[s], bi[t]),
        |s, t| table.get(ai[s], ai[t]),
        |s, t| table.get(bi[s], bi[t]),
        reg,
    )
}

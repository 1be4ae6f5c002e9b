//! Dense positive elimination and preconditioned conjugate gradients.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Gaussian elimination of a continuous-time chain in the
/// Grassmann–Taksar–Heyman form: exit rates are recomputed as sums of the
/// surviving off-diagonal rates, so no subtraction ever occurs and the
/// result stays accurate across hundreds of orders of magnitude.
///
/// Eliminating node `k` reroutes `i → k → j` into `q(i,j) += q(i,k)q(k,j)/R_k`
/// and additive costs `s_i += q(i,k) s_k / R_k`. After every free node is gone
/// the surviving rates are those of the trace chain on the kept nodes.
pub(crate) struct Elimination {
    n: usize,
    q: Vec<f64>,
    kept: Vec<bool>,
    /// Position in the elimination order; `usize::MAX` for kept nodes.
    pos: Vec<usize>,
    order: Vec<usize>,
    exit: Vec<f64>,
    sources: Vec<Vec<f64>>,
}

impl Elimination {
    /// `rates(i)` lists `(k, q(i,k))`; the sparsity pattern must be symmetric.
    pub fn run(
        n: usize,
        rates: impl Fn(usize) -> Vec<(usize, f64)>,
        kept: &[bool],
        sources: Vec<Vec<f64>>,
    ) -> Self {
        let mut q = vec![0.0; n * n];
        let mut degree = vec![0_usize; n];
        for i in 0..n {
            for (k, r) in rates(i) {
                debug_assert!(k != i && r > 0.0);
                q[i * n + k] += r;
            }
        }
        for i in 0..n {
            degree[i] = (0..n).filter(|&k| q[i * n + k] > 0.0).count();
        }
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
            (0..n).filter(|&i| !kept[i]).map(|i| Reverse((degree[i], i))).collect();
        let mut alive = vec![true; n];
        let mut pos = vec![usize::MAX; n];
        let mut order = Vec::new();
        let mut exit = vec![0.0; n];
        let mut sources = sources;
        let mut nbrs = Vec::new();

        while let Some(Reverse((d, k))) = heap.pop() {
            if !alive[k] || d != degree[k] {
                continue;
            }
            alive[k] = false;
            pos[k] = order.len();
            order.push(k);
            nbrs.clear();
            let row_k = k * n;
            let mut r_k = 0.0;
            for j in 0..n {
                let v = q[row_k + j];
                if v > 0.0 && alive[j] {
                    nbrs.push(j);
                    r_k += v;
                }
            }
            exit[k] = r_k;
            if r_k == 0.0 {
                continue;
            }
            for &i in &nbrs {
                degree[i] -= 1;
                let a = q[i * n + k] / r_k;
                if a == 0.0 {
                    continue;
                }
                for s in sources.iter_mut() {
                    s[i] += a * s[k];
                }
                let row_i = i * n;
                for &j in &nbrs {
                    if j != i {
                        let add = a * q[row_k + j];
                        let cell = &mut q[row_i + j];
                        if *cell == 0.0 && add > 0.0 {
                            degree[i] += 1;
                        }
                        *cell += add;
                    }
                }
                if !kept[i] {
                    heap.push(Reverse((degree[i], i)));
                }
            }
        }
        Self { n, q, kept: kept.to_vec(), pos, order, exit, sources }
    }

    /// Solves `R_i u_i − Σ_k q(i,k) u_k = s_i` on free nodes with `u` pinned on
    /// kept nodes. `source` indexes the vectors passed to [`Elimination::run`].
    pub fn back_substitute(&self, pinned: &[f64], source: Option<usize>) -> Vec<f64> {
        let n = self.n;
        let mut u: Vec<f64> = (0..n).map(|i| if self.kept[i] { pinned[i] } else { 0.0 }).collect();
        for &k in self.order.iter().rev() {
            let r_k = self.exit[k];
            if r_k == 0.0 {
                continue;
            }
            let p = self.pos[k];
            let mut acc = source.map_or(0.0, |s| self.sources[s][k]);
            let row = &self.q[k * n..(k + 1) * n];
            for (j, &v) in row.iter().enumerate() {
                if v > 0.0 && self.pos[j] > p {
                    acc += v * u[j];
                }
            }
            u[k] = acc / r_k;
        }
        u
    }

    /// Rate between two kept nodes in the trace chain.
    pub fn trace_rate(&self, i: usize, j: usize) -> f64 {
        debug_assert!(self.kept[i] && self.kept[j]);
        self.q[i * self.n + j]
    }
}

pub(crate) struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// definite operator; `residual` is `‖b − Ax‖ / ‖b‖`.
pub(crate) fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    tolerance: f64,
    max_iterations: usize,
) -> Result<CgOutcome> {
    let n = b.len();
    let norm_b = norm(b);
    if norm_b == 0.0 {
        return Ok(CgOutcome { x: vec![0.0; n], iterations: 0 });
    }
    let mut x: Vec<f64> = b.iter().zip(diag).map(|(bi, d)| bi / d).collect();
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, a)| bi - a).collect();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut residual = norm(&r) / norm_b;
    let mut it = 0;
    while residual > tolerance {
        if it >= max_iterations {
            return Err(Error::NoConvergence { iterations: it, residual });
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::NoConvergence { iterations: it, residual });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        it += 1;
        // Recompute the true residual periodically to keep rounding from drifting.
        if it % 50 == 0 {
            apply(&x, &mut ax);
            for i in 0..n {
                r[i] = b[i] - ax[i];
            }
        }
        residual = norm(&r) / norm_b;
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let ratio = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + ratio * p[i];
        }
    }
    Ok(CgOutcome { x, iterations: it })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Birth–death chain on `0..n` with unit rates.
    fn path_rates(n: usize) -> impl Fn(usize) -> Vec<(usize, f64)> {
        move |i| {
            let mut v = Vec::new();
            if i > 0 {
                v.push((i - 1, 1.0));
            }
            if i + 1 < n {
                v.push((i + 1, 1.0));
            }
            v
        }
    }

    #[test]
    fn hitting_probability_on_a_path_is_linear() {
        let n = 6;
        let mut kept = vec![false; n];
        kept[0] = true;
        kept[n - 1] = true;
        let e = Elimination::run(n, path_rates(n), &kept, vec![]);
        let mut pinned = vec![0.0; n];
        pinned[n - 1] = 1.0;
        let h = e.back_substitute(&pinned, None);
        for (i, v) in h.iter().enumerate() {
            assert!((v - i as f64 / 5.0).abs() < 1e-14);
        }
        // Trace chain on the endpoints: rate (1/n-1) = escape probability times unit exit rate.
        assert!((e.trace_rate(0, n - 1) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn mean_exit_time_of_reflected_walk() {
        // Absorb at 0, reflect at n−1, unit rates.
        let n = 5;
        let mut kept = vec![false; n];
        kept[0] = true;
        let e = Elimination::run(n, path_rates(n), &kept, vec![vec![1.0; n]]);
        let u = e.back_substitute(&vec![0.0; n], Some(0));
        // Direct recursion oracle: u_{n-1} = 1 + u_{n-2}; u_i = (1 + u_{i-1} + u_{i+1})/2.
        let mut d = vec![0.0; n];
        let mut diff = vec![0.0; n];
        diff[n - 1] = 1.0;
        for i in (1..n - 1).rev() {
            diff[i] = diff[i + 1] + 1.0;
        }
        for i in 1..n {
            d[i] = d[i - 1] + diff[i];
        }
        for i in 0..n {
            assert!((u[i] - d[i]).abs() < 1e-12, "{i}: {} vs {}", u[i], d[i]);
        }
    }

    #[test]
    fn pcg_solves_a_tridiagonal_system() {
        let n = 50;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut v = 3.0 * x[i];
                if i > 0 {
                    v -= x[i - 1];
                }
                if i + 1 < n {
                    v -= x[i + 1];
                }
                y[i] = v;
            }
        };
        let b = vec![1.0; n];
        let out = pcg(apply, &vec![3.0; n], &b, 1e-13, 1000).unwrap();
        let mut y = vec![0.0; n];
        apply(&out.x, &mut y);
        assert!(y.iter().zip(&b).all(|(a, b)| (a - b).abs() < 1e-11));
    }
}

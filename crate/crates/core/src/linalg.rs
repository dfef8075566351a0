//! Small numerical kernels shared by the spectral and fitting code.

use crate::error::{Error, Result};

pub(crate) const RAYLEIGH_TOL: f64 = 1e-13;
pub(crate) const VECTOR_TOL: f64 = 1e-12;
pub(crate) const MAX_ITERATIONS: usize = 100_000;

/// Compressed sparse rows of a nonnegative matrix.
#[derive(Debug, Clone)]
pub(crate) struct Csr {
    n: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    fn from_triples(n: usize, triples: &[(usize, usize, f64)], transpose: bool) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(i, j, _) in triples {
            let r = if transpose { j } else { i };
            counts[r + 1] += 1;
        }
        for r in 0..n {
            counts[r + 1] += counts[r];
        }
        let mut fill = counts.clone();
        let mut cols = vec![0usize; triples.len()];
        let mut vals = vec![0.0; triples.len()];
        for &(i, j, v) in triples {
            let (r, c) = if transpose { (j, i) } else { (i, j) };
            cols[fill[r]] = c;
            vals[fill[r]] = v;
            fill[r] += 1;
        }
        Csr {
            n,
            row_start: counts,
            cols,
            vals,
        }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for r in 0..self.n {
            let mut acc = 0.0;
            for idx in self.row_start[r]..self.row_start[r + 1] {
                acc += self.vals[idx] * x[self.cols[idx]];
            }
            out[r] = acc;
        }
    }
}

/// Perron data of a nonnegative matrix: log of the spectral radius with
/// right and left eigenvectors normalized so that `sum(left * right) = 1`.
#[derive(Debug, Clone)]
pub(crate) struct Perron {
    pub log_lambda: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
}

/// Spectral radius of the matrix whose nonzero entries are `exp(logw)`.
///
/// Entries are rescaled by the largest weight, and the iteration runs on
/// `M + I` so that periodic (bipartite) matrices converge as well; the
/// Perron root of `M + I` is exactly one more than that of `M`.
pub(crate) fn perron_log(n: usize, log_entries: &[(usize, usize, f64)]) -> Result<Perron> {
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let scale = log_entries.iter().map(|e| e.2).fold(f64::NEG_INFINITY, f64::max);
    if !scale.is_finite() {
        // No entries at all: the zero matrix.
        return Ok(Perron {
            log_lambda: f64::NEG_INFINITY,
            right: vec![1.0 / (n as f64).sqrt(); n],
            left: vec![1.0 / (n as f64).sqrt(); n],
        });
    }
    let triples: Vec<(usize, usize, f64)> = log_entries
        .iter()
        .map(|&(i, j, lw)| (i, j, (lw - scale).exp()))
        .collect();
    let m = Csr::from_triples(n, &triples, false);
    let mt = Csr::from_triples(n, &triples, true);
    let right = dominant_vector(&m)?;
    let left = dominant_vector(&mt)?;

    let mut mv = vec![0.0; n];
    m.apply(&right, &mut mv);
    let num = kahan_sum(left.iter().zip(&mv).map(|(u, v)| u * v));
    let den = kahan_sum(left.iter().zip(&right).map(|(u, v)| u * v));
    if !(den > 0.0) || !(num > 0.0) {
        return Ok(Perron {
            log_lambda: f64::NEG_INFINITY,
            right,
            left,
        });
    }
    let lambda = num / den;
    let left = left.into_iter().map(|u| u / den).collect();
    Ok(Perron {
        log_lambda: lambda.ln() + scale,
        right,
        left,
    })
}

fn dominant_vector(m: &Csr) -> Result<Vec<f64>> {
    let n = m.n;
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut previous = f64::NAN;
    for _ in 0..MAX_ITERATIONS {
        m.apply(&x, &mut y);
        let xx: f64 = x.iter().map(|v| v * v).sum();
        let xmx: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rayleigh = xmx / xx;
        // shifted step
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += xi;
        }
        let norm = y.iter().cloned().fold(0.0, f64::max);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NoConvergence { iterations: 0 });
        }
        let mut change: f64 = 0.0;
        for (xi, yi) in x.iter_mut().zip(&y) {
            let next = yi / norm;
            change = change.max((next - *xi).abs());
            *xi = next;
        }
        if (rayleigh - previous).abs() < RAYLEIGH_TOL && change < VECTOR_TOL {
            let total: f64 = x.iter().sum();
            return Ok(x.into_iter().map(|v| v / total).collect());
        }
        previous = rayleigh;
    }
    squared_dominant(m)
}

/// Largest matrix handled by [`squared_dominant`].
pub(crate) const DENSE_LIMIT: usize = 256;

/// Fallback for a tiny spectral gap: repeated normalized squaring of
/// `M + I` converges to a rank-one matrix whose row sums are the Perron
/// vector. Products of nonnegative matrices have no cancellation, so
/// every entry keeps its relative accuracy.
fn squared_dominant(m: &Csr) -> Result<Vec<f64>> {
    let n = m.n;
    let fail = Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
    });
    if n > DENSE_LIMIT {
        return fail;
    }
    let mut a = vec![0.0; n * n];
    for r in 0..n {
        a[r * n + r] = 1.0;
        for idx in m.row_start[r]..m.row_start[r + 1] {
            a[r * n + m.cols[idx]] += m.vals[idx];
        }
    }
    let row_sums = |a: &[f64]| -> Vec<f64> {
        let v: Vec<f64> = (0..n).map(|r| a[r * n..(r + 1) * n].iter().sum()).collect();
        let total: f64 = v.iter().sum();
        v.into_iter().map(|x| x / total).collect()
    };
    let mut v = row_sums(&a);
    for _ in 0..80 {
        let mut sq = vec![0.0; n * n];
        for i in 0..n {
            for l in 0..n {
                let x = a[i * n + l];
                if x == 0.0 {
                    continue;
                }
                for j in 0..n {
                    sq[i * n + j] += x * a[l * n + j];
                }
            }
        }
        let top = sq.iter().cloned().fold(0.0, f64::max);
        if !(top > 0.0) || !top.is_finite() {
            return fail;
        }
        sq.iter_mut().for_each(|x| *x /= top);
        a = sq;
        let next = row_sums(&a);
        let change = v
            .iter()
            .zip(&next)
            .map(|(p, q)| (p - q).abs() / q.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        v = next;
        if change < 1e-14 {
            return Ok(v);
        }
    }
    fail
}

/// Compensated summation.
pub(crate) fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Solves the dense system `a x = b` (row-major `a`) by Gaussian
/// elimination with partial pivoting. Returns `None` when singular.
pub(crate) fn solve(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))?;
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for c in 0..n {
                a.swap(pivot * n + c, col * n + c);
            }
            b.swap(pivot, col);
        }
        for r in col + 1..n {
            let factor = a[r * n + col] / a[col * n + col];
            if factor != 0.0 {
                for c in col..n {
                    a[r * n + c] -= factor * a[col * n + c];
                }
                b[r] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in r + 1..n {
            acc -= a[r * n + c] * x[c];
        }
        x[r] = acc / a[r * n + r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Ordinary least squares by modified Gram-Schmidt on the design columns.
/// Returns the coefficients and the root-mean-square residual.
pub(crate) fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let p = columns.len();
    let m = y.len();
    if m < p {
        return None;
    }
    let mut q: Vec<Vec<f64>> = columns.to_vec();
    let mut r = vec![0.0; p * p];
    for j in 0..p {
        for i in 0..j {
            let dot: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
            r[i * p + j] = dot;
            let qi = q[i].clone();
            for (v, u) in q[j].iter_mut().zip(&qi) {
                *v -= dot * u;
            }
        }
        let norm = q[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return None;
        }
        r[j * p + j] = norm;
        for v in q[j].iter_mut() {
            *v /= norm;
        }
    }
    let qty: Vec<f64> = (0..p).map(|j| q[j].iter().zip(y).map(|(a, b)| a * b).sum()).collect();
    let mut coef = vec![0.0; p];
    for j in (0..p).rev() {
        let mut acc = qty[j];
        for c in j + 1..p {
            acc -= r[j * p + c] * coef[c];
        }
        coef[j] = acc / r[j * p + j];
    }
    let sse: f64 = (0..m)
        .map(|i| {
            let fit: f64 = (0..p).map(|j| columns[j][i] * coef[j]).sum();
            (y[i] - fit).powi(2)
        })
        .sum();
    Some((coef, (sse / m as f64).sqrt()))
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Möbius function by trial division.
pub(crate) fn mobius(mut n: usize) -> i64 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_mean_root() {
        let entries = [(0, 0, 0.0), (0, 1, 0.0), (1, 0, 0.0)];
        let p = perron_log(2, &entries).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((p.log_lambda - phi.ln()).abs() < 1e-14);
        let dot: f64 = p.left.iter().zip(&p.right).map(|(a, b)| a * b).sum();
        assert!((dot - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nearly_decoupled_blocks() {
        // Loops of weights 1 and 1 - 1e-12 joined by e^-40 edges; the
        // Perron vector is close to (1, e^-40 / 1e-12).
        let entries = [(0, 0, 0.0), (1, 1, (-1e-12f64).ln_1p()), (0, 1, -40.0), (1, 0, -40.0)];
        let triples: Vec<_> = entries.iter().map(|&(i, j, w)| (i, j, f64::exp(w))).collect();
        let v = squared_dominant(&Csr::from_triples(2, &triples, false)).unwrap();
        let ratio = v[1] / v[0];
        let expected = (-40f64).exp() / 1e-12;
        assert!((ratio / expected - 1.0).abs() < 1e-3, "{ratio} vs {expected}");
        assert!(perron_log(2, &entries).unwrap().log_lambda.abs() < 1e-12);
    }

    #[test]
    fn bipartite_matrix_converges() {
        let entries = [(0, 1, 0.0), (1, 0, 0.0)];
        let p = perron_log(2, &entries).unwrap();
        assert!(p.log_lambda.abs() < 1e-13);
    }

    #[test]
    fn solve_and_fit() {
        let x = solve(vec![2.0, 1.0, 1.0, 3.0], vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
        assert!(solve(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 2.0]).is_none());

        let ns: Vec<f64> = (10..20).map(|n| n as f64).collect();
        let y: Vec<f64> = ns.iter().map(|n| 0.7 * n - 0.5 * n.ln() + 2.0).collect();
        let cols = vec![ns.clone(), ns.iter().map(|n| n.ln()).collect(), vec![1.0; ns.len()]];
        let (c, rms) = least_squares(&cols, &y).unwrap();
        assert!((c[0] - 0.7).abs() < 1e-9 && (c[1] + 0.5).abs() < 1e-8 && rms < 1e-9);
    }

    #[test]
    fn mobius_values() {
        let expected = [1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0];
        for (n, &m) in (1..=12).zip(expected.iter()) {
            assert_eq!(mobius(n), m, "mu({n})");
        }
    }
}

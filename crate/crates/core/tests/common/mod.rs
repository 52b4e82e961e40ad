#![allow(dead_code)]

use georeg::Matrix;
use rand::Rng;

pub const EXAMPLE_N: usize = 53;
pub const EXAMPLE_OMEGA: [f64; 4] = [0.1158, 0.1106, -0.1720, -0.2776];
pub const EXAMPLE_THETA: [[f64; 4]; 4] = [
    [1.0000, 0.2956, 0.4333, -0.0199],
    [0.2956, 1.0000, 0.0275, 0.1866],
    [0.4333, 0.0275, 1.0000, 0.1287],
    [-0.0199, 0.1866, 0.1287, 1.0000],
];

pub const EXAMPLE_FILE: &str = "\
n 53
# omega, then theta
0.1158 0.1106 -0.1720 -0.2776
1.0000 0.2956 0.4333 -0.0199
0.2956 1.0000 0.0275 0.1866
0.4333 0.0275 1.0000 0.1287
-0.0199 0.1866 0.1287 1.0000
";

pub fn example_theta() -> Matrix {
    Matrix::from_rows(&EXAMPLE_THETA).unwrap()
}

/// Standard normal draw (Box-Muller).
pub fn gauss<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.gen::<f64>();
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

pub fn gauss_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| gauss(rng)).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Orthonormal basis of `R^n` whose first vector is `1/√n`; the rest span
/// the centered subspace.
pub fn helmert(n: usize) -> Vec<Vec<f64>> {
    let mut basis = vec![vec![1.0 / (n as f64).sqrt(); n]];
    for k in 1..n {
        let s = ((k * (k + 1)) as f64).sqrt();
        let mut h = vec![0.0; n];
        for v in h.iter_mut().take(k) {
            *v = 1.0 / s;
        }
        h[k] = -(k as f64) / s;
        basis.push(h);
    }
    basis
}

/// Modified Gram-Schmidt; panics on a rank-deficient input.
pub fn orthonormalize(mut vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for i in 0..vs.len() {
        for j in 0..i {
            let p = dot(&vs[i], &vs[j]);
            let (head, tail) = vs.split_at_mut(i);
            for (a, b) in tail[0].iter_mut().zip(&head[j]) {
                *a -= p * b;
            }
        }
        let len = dot(&vs[i], &vs[i]).sqrt();
        assert!(len > 1e-8, "rank deficient");
        vs[i].iter_mut().for_each(|a| *a /= len);
    }
    vs
}

/// Random `k × k` orthogonal matrix, as rows.
pub fn random_orthogonal<R: Rng>(rng: &mut R, k: usize) -> Vec<Vec<f64>> {
    orthonormalize((0..k).map(|_| gauss_vec(rng, k)).collect())
}

/// A random rotation of `R^n` that fixes the all-ones direction, so it
/// commutes with centering.
pub struct MeanPreservingRotation {
    basis: Vec<Vec<f64>>,
    inner: Vec<Vec<f64>>,
}

impl MeanPreservingRotation {
    pub fn new<R: Rng>(rng: &mut R, n: usize) -> Self {
        Self {
            basis: helmert(n),
            inner: random_orthogonal(rng, n - 1),
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let coords: Vec<f64> = self.basis.iter().map(|h| dot(h, v)).collect();
        let mut rotated = vec![coords[0]];
        rotated.extend(self.inner.iter().map(|row| dot(row, &coords[1..])));
        let mut out = vec![0.0; v.len()];
        for (c, h) in rotated.iter().zip(&self.basis) {
            for (o, x) in out.iter_mut().zip(h) {
                *o += c * x;
            }
        }
        out
    }
}

/// Random regression data: `m` columns with offsets and scales drawn over
/// `10^[-scale_exp, scale_exp]`, response linear in them plus noise.
pub fn random_dataset<R: Rng>(rng: &mut R, n: usize, m: usize, scale_exp: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let xs: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            let scale = 10f64.powf(rng.gen_range(-scale_exp..=scale_exp));
            let offset = rng.gen_range(-5.0..5.0) * scale;
            (0..n).map(|_| offset + scale * gauss(rng)).collect()
        })
        .collect();
    let y_scale = 10f64.powf(rng.gen_range(-scale_exp..=scale_exp));
    let coefs: Vec<f64> = (0..m).map(|_| gauss(rng)).collect();
    let intercept = rng.gen_range(-3.0..3.0);
    let standardized: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| {
            let mu = mean(x);
            let sd = (x.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n as f64).sqrt();
            x.iter().map(|v| (v - mu) / sd).collect()
        })
        .collect();
    let y = (0..n)
        .map(|i| {
            let signal: f64 = standardized.iter().zip(&coefs).map(|(z, c)| c * z[i]).sum();
            y_scale * (intercept + signal + gauss(rng))
        })
        .collect();
    (y, xs)
}

/// Random correlation matrix from normalized random Gram vectors.
pub fn random_correlation<R: Rng>(rng: &mut R, dim: usize) -> Matrix {
    let n = dim + 3;
    let vs: Vec<Vec<f64>> = (0..dim)
        .map(|_| {
            let v = gauss_vec(rng, n);
            let len = dot(&v, &v).sqrt();
            v.into_iter().map(|x| x / len).collect()
        })
        .collect();
    Matrix::from_fn(dim, dim, |i, j| if i == j { 1.0 } else { dot(&vs[i], &vs[j]) })
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// `∫_lo^hi f` by adaptive Simpson with a Richardson correction. `rel_tol`
/// is relative to the peak of `|f|` times the interval length.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, rel_tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    if hi <= lo {
        return 0.0;
    }
    let peak = (0..=256)
        .map(|i| f(lo + (hi - lo) * i as f64 / 256.0).abs())
        .fold(0.0, f64::max);
    let tol = rel_tol * peak * (hi - lo);
    let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
    let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, lo, hi, fa, fm, fb, whole, tol, 48)
}

/// `∫_lo^hi t^(a-1) (1-t)^(b-1) dt` for `0 ≤ lo ≤ hi ≤ 1`. Each half of the
/// interval is mapped so that an endpoint singularity becomes smooth.
pub fn beta_integral(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    let split = 0.5f64.clamp(lo, hi);
    let left = if a < 1.0 {
        // t = s^(1/a)
        simpson(&|s: f64| (1.0 - s.powf(1.0 / a)).powf(b - 1.0) / a, lo.powf(a), split.powf(a), 1e-14)
    } else {
        simpson(&|t: f64| t.powf(a - 1.0) * (1.0 - t).powf(b - 1.0), lo, split, 1e-14)
    };
    let right = if b < 1.0 {
        // 1 - t = s^(1/b)
        simpson(
            &|s: f64| (1.0 - s.powf(1.0 / b)).powf(a - 1.0) / b,
            (1.0 - hi).powf(b),
            (1.0 - split).powf(b),
            1e-14,
        )
    } else {
        simpson(&|t: f64| t.powf(a - 1.0) * (1.0 - t).powf(b - 1.0), split, hi, 1e-14)
    };
    left + right
}

/// CSV text of `n` rows whose sample correlation matrix is exactly `phi`
/// (response first), up to rounding: the Cholesky factor of `phi` applied
/// to orthonormal centered columns, then shifted and scaled.
pub fn csv_with_correlation<R: Rng>(rng: &mut R, phi: &Matrix, n: usize, names: &[&str]) -> String {
    let dim = phi.rows();
    let basis = helmert(n);
    let raw: Vec<Vec<f64>> = (0..dim)
        .map(|_| {
            let mut v = vec![0.0; n];
            for h in &basis[1..] {
                let c = gauss(rng);
                v.iter_mut().zip(h).for_each(|(a, b)| *a += c * b);
            }
            v
        })
        .collect();
    let q = orthonormalize(raw);
    let l = georeg::linalg::Cholesky::new(phi).unwrap();
    let l = l.factor();
    let cols: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let scale = 10f64.powf(rng.gen_range(-1.0..2.0));
            let shift = rng.gen_range(-100.0..100.0);
            (0..n)
                .map(|r| shift + scale * (0..=i).map(|j| l[(i, j)] * q[j][r]).sum::<f64>())
                .collect()
        })
        .collect();
    let mut out = names.join(",");
    out.push('\n');
    for r in 0..n {
        let row: Vec<String> = cols.iter().map(|c| format!("{:e}", c[r])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

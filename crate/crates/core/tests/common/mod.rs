//! Reference computations that share no code with the library.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};

pub type C64 = Complex<f64>;

pub const A: f64 = -6.0;
pub const B: f64 = 3.0;
pub const C: f64 = 3.0;
pub const D: f64 = -6.0;
pub const THETA_U: f64 = 0.1;
pub const THETA_V: f64 = 0.2;
pub const DELTA: f64 = 40.0;

pub fn reference_params() -> delayed_wc::model::ModelParams {
    delayed_wc::model::ModelParams { a: A, b: B, c: C, d: D, theta_u: THETA_U, theta_v: THETA_V }
}

pub fn reference_activation() -> delayed_wc::model::Activation {
    delayed_wc::model::Activation::new(DELTA).unwrap()
}

// ---------------------------------------------------------------- quadrature

fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, m: f64, fm: f64, b: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    // split into panels first so narrow features are not missed
    let panels = 64;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let (x0, x1) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            let xm = 0.5 * (x0 + x1);
            let (f0, fm, f1) = (f(x0), f(xm), f(x1));
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            simpson_step(&f, x0, f0, xm, fm, x1, f1, whole, tol / panels as f64, 40)
        })
        .sum()
}

fn ln_gamma_int(k: u32) -> f64 {
    (1..k).map(|j| (j as f64).ln()).sum()
}

/// Gamma density of integer order `p` and mean `tau`.
pub fn gamma_pdf(p: u32, tau: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return if p == 1 && t == 0.0 { 1.0 / tau } else { 0.0 };
    }
    let rate = p as f64 / tau;
    (p as f64 * rate.ln() + (p as f64 - 1.0) * t.ln() - rate * t - ln_gamma_int(p)).exp()
}

/// Uniform density on `[tau(1-eps), tau(1+eps)]`.
pub fn uniform_pdf(eps: f64, tau: f64, t: f64) -> f64 {
    if t >= tau * (1.0 - eps) && t <= tau * (1.0 + eps) {
        1.0 / (2.0 * eps * tau)
    } else {
        0.0
    }
}

/// Support `[lo, hi]` carrying all but a negligible fraction of the mass.
pub fn effective_support(kernel: &str, param: f64, tau: f64) -> (f64, f64) {
    match kernel {
        "uniform" => (tau * (1.0 - param), tau * (1.0 + param)),
        _ => (0.0, tau * (60.0 / param).max(40.0)),
    }
}

/// `∫ h(t) e^{-i ω t} dt` by quadrature.
pub fn fourier_by_quadrature(pdf: &dyn Fn(f64) -> f64, lo: f64, hi: f64, omega: f64) -> C64 {
    let re = integrate(|t| pdf(t) * (omega * t).cos(), lo, hi, 1e-12);
    let im = integrate(|t| -pdf(t) * (omega * t).sin(), lo, hi, 1e-12);
    C64::new(re, im)
}

// ------------------------------------------------------------- polynomials

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

fn poly_add(p: &[f64], q: &[f64]) -> Vec<f64> {
    let n = p.len().max(q.len());
    (0..n).map(|k| p.get(k).copied().unwrap_or(0.0) + q.get(k).copied().unwrap_or(0.0)).collect()
}

fn poly_pow(p: &[f64], k: u32) -> Vec<f64> {
    (0..k).fold(vec![1.0], |acc, _| poly_mul(&acc, p))
}

/// Ascending coefficients of `Δ(z)·(1 + τz/p)^{2p}` for the Gamma kernel of order `p`.
pub fn gamma_characteristic_polynomial(alpha: f64, beta: f64, tau: f64, p: u32) -> Vec<f64> {
    let q = poly_pow(&[1.0, tau / p as f64], p);
    let z1 = [1.0, 1.0];
    let term1 = poly_mul(&poly_mul(&z1, &z1), &poly_mul(&q, &q));
    let term2: Vec<f64> = poly_mul(&z1, &q).iter().map(|c| -alpha * c).collect();
    poly_add(&poly_add(&term1, &term2), &[beta])
}

/// All complex roots of a polynomial via the companion matrix.
pub fn poly_roots(coeffs: &[f64]) -> Vec<C64> {
    let mut c = coeffs.to_vec();
    while c.len() > 1 && c.last().unwrap().abs() == 0.0 {
        c.pop();
    }
    let n = c.len() - 1;
    let lead = c[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    m.complex_eigenvalues().iter().copied().collect()
}

/// Rightmost root real part for a Gamma kernel of order `p`.
pub fn gamma_rightmost(alpha: f64, beta: f64, tau: f64, p: u32) -> f64 {
    poly_roots(&gamma_characteristic_polynomial(alpha, beta, tau, p))
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

// --------------------------------------------------------- Dirac quasi-polynomial

pub fn dirac_delta(alpha: f64, beta: f64, tau: f64, z: C64) -> C64 {
    let e = (-z * tau).exp();
    let z1 = z + 1.0;
    z1 * z1 - alpha * e * z1 + beta * e * e
}

pub fn dirac_delta_prime(alpha: f64, beta: f64, tau: f64, z: C64) -> C64 {
    let e = (-z * tau).exp();
    let z1 = z + 1.0;
    2.0 * z1 - alpha * e * (1.0 - tau * z1) - 2.0 * tau * beta * e * e
}

/// Number of zeros of the Dirac characteristic function with `Re z > 0`,
/// by the argument principle on a half-disc. `None` when the contour
/// passes too close to a zero.
pub fn dirac_rhp_zero_count(alpha: f64, beta: f64, tau: f64) -> Option<i64> {
    let r = alpha.abs() + beta.abs().sqrt() + 2.0;
    let f = |z: C64| dirac_delta(alpha, beta, tau, z);
    // contour parametrised by s in [0, 2]: s<1 semicircle -iR → iR, s>=1 axis iR → -iR
    let point = |s: f64| -> C64 {
        if s < 1.0 {
            let phi = -PI / 2.0 + PI * s;
            C64::new(r * phi.cos(), r * phi.sin())
        } else {
            C64::new(0.0, r * (1.0 - 2.0 * (s - 1.0)))
        }
    };
    let scale = 1.0 + alpha.abs() + beta.abs();
    let mut total = 0.0;
    let n = 20_000;
    let mut stack: Vec<(f64, f64, C64, C64, u32)> = Vec::new();
    for k in 0..n {
        let (s0, s1) = (2.0 * k as f64 / n as f64, 2.0 * (k + 1) as f64 / n as f64);
        stack.push((s0, s1, f(point(s0)), f(point(s1)), 0));
        while let Some((a, b, fa, fb, depth)) = stack.pop() {
            if fa.norm() < 1e-9 * scale || fb.norm() < 1e-9 * scale {
                return None;
            }
            let d = (fb / fa).arg();
            if d.abs() > 0.2 && depth < 40 {
                let m = 0.5 * (a + b);
                let fm = f(point(m));
                stack.push((m, b, fm, fb, depth + 1));
                stack.push((a, m, fa, fm, depth + 1));
            } else {
                total += d;
            }
        }
    }
    Some((total / (2.0 * PI)).round() as i64)
}

/// Newton iteration on the Dirac characteristic function.
pub fn dirac_newton(alpha: f64, beta: f64, tau: f64, mut z: C64) -> Option<C64> {
    for _ in 0..100 {
        let step = dirac_delta(alpha, beta, tau, z) / dirac_delta_prime(alpha, beta, tau, z);
        z -= step;
        if step.norm() < 1e-14 * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    None
}

/// Smallest delay at which the Dirac system with real characteristic
/// roots `λ` of `λ² − αλ + β` loses stability, from `cos ω = 1/λ` and
/// `τ = −ω cos ω / sin ω`, minimised over both roots and all branches.
pub fn dirac_direct_tau(alpha: f64, beta: f64) -> Option<f64> {
    let disc = alpha * alpha - 4.0 * beta;
    if disc < 0.0 {
        return None;
    }
    let mut best: Option<f64> = None;
    for lambda in [(alpha + disc.sqrt()) / 2.0, (alpha - disc.sqrt()) / 2.0] {
        if lambda.abs() < 1.0 {
            continue;
        }
        let base = (1.0 / lambda).acos();
        for k in 0..20 {
            for omega in [base + 2.0 * PI * k as f64, 2.0 * PI * (k + 1) as f64 - base] {
                let tau = -omega * omega.cos() / omega.sin();
                if tau > 0.0 && best.map_or(true, |b| tau < b) {
                    best = Some(tau);
                }
            }
        }
    }
    best
}

// ------------------------------------------------------------- equilibria

fn logistic(delta: f64, x: f64) -> f64 {
    0.5 * (1.0 + (0.5 * delta * x).tanh())
}

fn residuals(p: &delayed_wc::model::ModelParams, delta: f64, u: f64, v: f64) -> (f64, f64) {
    (
        -u + logistic(delta, p.theta_u + p.a * u + p.b * v),
        -v + logistic(delta, p.theta_v + p.c * u + p.d * v),
    )
}

/// Equilibria located by sign changes on an `n × n` lattice of the unit
/// square, each polished by Newton with a finite-difference Jacobian.
pub fn brute_force_equilibria(p: &delayed_wc::model::ModelParams, delta: f64, n: usize) -> Vec<(f64, f64)> {
    let h = 1.0 / n as f64;
    let mut grid = vec![(0.0, 0.0); (n + 1) * (n + 1)];
    for i in 0..=n {
        for j in 0..=n {
            grid[i * (n + 1) + j] = residuals(p, delta, i as f64 * h, j as f64 * h);
        }
    }
    let mut found: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let corners = [
                grid[i * (n + 1) + j],
                grid[(i + 1) * (n + 1) + j],
                grid[i * (n + 1) + j + 1],
                grid[(i + 1) * (n + 1) + j + 1],
            ];
            let mixed = |sel: fn(&(f64, f64)) -> f64| {
                let lo = corners.iter().map(sel).fold(f64::INFINITY, f64::min);
                let hi = corners.iter().map(sel).fold(f64::NEG_INFINITY, f64::max);
                lo <= 0.0 && hi >= 0.0
            };
            if !(mixed(|c| c.0) && mixed(|c| c.1)) {
                continue;
            }
            let (mut u, mut v) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            let mut ok = false;
            for _ in 0..60 {
                let (f1, f2) = residuals(p, delta, u, v);
                let e = 1e-7;
                let (a1, a2) = residuals(p, delta, u + e, v);
                let (b1, b2) = residuals(p, delta, u, v + e);
                let (j11, j21, j12, j22) = ((a1 - f1) / e, (a2 - f2) / e, (b1 - f1) / e, (b2 - f2) / e);
                let det = j11 * j22 - j12 * j21;
                if det == 0.0 {
                    break;
                }
                let du = (f1 * j22 - f2 * j12) / det;
                let dv = (j11 * f2 - j21 * f1) / det;
                u -= du;
                v -= dv;
                if du.abs().max(dv.abs()) < 1e-14 {
                    ok = true;
                    break;
                }
            }
            let (r1, r2) = residuals(p, delta, u, v);
            if ok && r1.abs().max(r2.abs()) < 1e-10 && !found.iter().any(|q| (q.0 - u).abs().max((q.1 - v).abs()) < 1e-7) {
                found.push((u, v));
            }
        }
    }
    found.sort_by(|x, y| x.partial_cmp(y).unwrap());
    found
}

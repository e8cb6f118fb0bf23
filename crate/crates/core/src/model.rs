//! Model parameters, the logistic activation and equilibria.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Connection weights and background drives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub theta_u: f64,
    pub theta_v: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.c, self.d, self.theta_u, self.theta_v];
        if all.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument("model parameters must be finite".into()))
        }
    }

    /// Parameters with the two populations exchanged.
    pub fn swapped(&self) -> Self {
        ModelParams {
            a: self.d,
            b: self.c,
            c: self.b,
            d: self.a,
            theta_u: self.theta_v,
            theta_v: self.theta_u,
        }
    }

    /// Arguments of the activation at state `(u, v)` when the delayed
    /// inputs equal the current state.
    pub fn arguments(&self, u: f64, v: f64) -> (f64, f64) {
        (
            self.theta_u + self.a * u + self.b * v,
            self.theta_v + self.c * u + self.d * v,
        )
    }
}

/// Logistic activation `f(x) = 1 / (1 + exp(-δ x))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Activation {
    pub delta: f64,
}

impl Activation {
    pub fn new(delta: f64) -> Result<Self> {
        if delta > 0.0 && delta.is_finite() {
            Ok(Activation { delta })
        } else {
            Err(Error::InvalidArgument(format!("sigmoid steepness must be positive, got {delta}")))
        }
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        activation_value(self, x)
    }

    #[inline]
    pub fn slope(&self, x: f64) -> f64 {
        activation_slope(self, x)
    }
}

/// The on-disk model description: parameters plus sigmoid steepness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub theta_u: f64,
    pub theta_v: f64,
    pub delta: f64,
}

impl ModelSpec {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            a: self.a,
            b: self.b,
            c: self.c,
            d: self.d,
            theta_u: self.theta_u,
            theta_v: self.theta_v,
        }
    }

    pub fn activation(&self) -> Result<Activation> {
        Activation::new(self.delta)
    }
}

#[inline]
pub fn activation_value(act: &Activation, x: f64) -> f64 {
    let y = act.delta * x;
    if y >= 0.0 {
        1.0 / (1.0 + (-y).exp())
    } else {
        let e = y.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn activation_slope(act: &Activation, x: f64) -> f64 {
    let e = (-(act.delta * x).abs()).exp();
    act.delta * e / ((1.0 + e) * (1.0 + e))
}

/// A fixed point of the system together with its characteristic data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub u_star: f64,
    pub v_star: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Equilibrium {
    /// Fills slopes and characteristic parameters for a point, without
    /// checking that it is a fixed point.
    pub fn at(params: &ModelParams, act: &Activation, u: f64, v: f64) -> Self {
        let (x1, x2) = params.arguments(u, v);
        let phi1 = act.slope(x1);
        let phi2 = act.slope(x2);
        Equilibrium {
            u_star: u,
            v_star: v,
            phi1,
            phi2,
            alpha: params.a * phi1 + params.d * phi2,
            beta: (params.a * params.d - params.b * params.c) * phi1 * phi2,
        }
    }
}

/// Sup-norm of the fixed-point residual `(u - f(..), v - f(..))`.
pub fn residual(params: &ModelParams, act: &Activation, u: f64, v: f64) -> f64 {
    let (r1, r2) = residual_vec(params, act, u, v);
    r1.abs().max(r2.abs())
}

fn residual_vec(params: &ModelParams, act: &Activation, u: f64, v: f64) -> (f64, f64) {
    let (x1, x2) = params.arguments(u, v);
    (u - act.value(x1), v - act.value(x2))
}

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 100;
const MAX_HALVINGS: usize = 20;
const DEDUP_TOL: f64 = 1e-8;

/// Damped Newton iteration on the fixed-point residual.
pub fn newton_refine(params: &ModelParams, act: &Activation, u0: f64, v0: f64) -> Option<(f64, f64)> {
    let (mut u, mut v) = (u0, v0);
    let (mut r1, mut r2) = residual_vec(params, act, u, v);
    let mut norm = r1.abs().max(r2.abs());
    for _ in 0..NEWTON_MAX_ITER {
        if norm < NEWTON_TOL {
            return Some(polish(params, act, u, v));
        }
        let (x1, x2) = params.arguments(u, v);
        let (s1, s2) = (act.slope(x1), act.slope(x2));
        let j11 = 1.0 - params.a * s1;
        let j12 = -params.b * s1;
        let j21 = -params.c * s2;
        let j22 = 1.0 - params.d * s2;
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let du = -(j22 * r1 - j12 * r2) / det;
        let dv = -(-j21 * r1 + j11 * r2) / det;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let (un, vn) = (u + step * du, v + step * dv);
            let (n1, n2) = residual_vec(params, act, un, vn);
            let n = n1.abs().max(n2.abs());
            if n < norm || n < NEWTON_TOL {
                u = un;
                v = vn;
                r1 = n1;
                r2 = n2;
                norm = n;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return (norm < NEWTON_TOL).then(|| polish(params, act, u, v));
        }
    }
    (norm < NEWTON_TOL).then(|| polish(params, act, u, v))
}

/// One application of the fixed-point map, which lands in `[0, 1]^2`;
/// near saturation a Newton step can overshoot to the wrong side of 0 or 1.
fn polish(params: &ModelParams, act: &Activation, u: f64, v: f64) -> (f64, f64) {
    let (x1, x2) = params.arguments(u, v);
    let (pu, pv) = (act.value(x1), act.value(x2));
    if residual(params, act, pu, pv) < NEWTON_TOL {
        (pu, pv)
    } else {
        (u, v)
    }
}

/// Outcome of an equilibrium search, including seeds that failed to converge.
#[derive(Clone, Debug)]
pub struct EquilibriumScan {
    pub equilibria: Vec<Equilibrium>,
    pub seeds: usize,
    pub failed_seeds: usize,
}

/// Grid scan of `(0,1)^2` followed by Newton refinement of every cell in
/// which both residual components change sign.
pub fn scan_equilibria(params: &ModelParams, act: &Activation, grid_n: usize) -> Result<EquilibriumScan> {
    if grid_n < 16 {
        return Err(Error::InvalidArgument(format!("grid_n must be >= 16, got {grid_n}")));
    }
    params.validate()?;
    let n = grid_n;
    let h = 1.0 / n as f64;
    // residual signs on the (n+1)^2 lattice of corners
    let corners: Vec<(f64, f64)> = (0..=n)
        .into_par_iter()
        .flat_map_iter(|i| (0..=n).map(move |j| (i, j)))
        .map(|(i, j)| residual_vec(params, act, i as f64 * h, j as f64 * h))
        .collect();
    let at = |i: usize, j: usize| corners[i * (n + 1) + j];
    let mixed = |vals: [f64; 4]| {
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        lo <= 0.0 && hi >= 0.0
    };
    let mut seeds = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let c = [at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)];
            if mixed(c.map(|r| r.0)) && mixed(c.map(|r| r.1)) {
                seeds.push(((i as f64 + 0.5) * h, (j as f64 + 0.5) * h));
            }
        }
    }
    if seeds.is_empty() {
        seeds = (1..4)
            .flat_map(|i| (1..4).map(move |j| (i as f64 * 0.25, j as f64 * 0.25)))
            .collect();
    }
    let refined: Vec<Option<(f64, f64)>> = seeds
        .par_iter()
        .map(|&(u, v)| newton_refine(params, act, u, v))
        .collect();
    let failed_seeds = refined.iter().filter(|r| r.is_none()).count();
    let mut points: Vec<(f64, f64)> = refined.into_iter().flatten().collect();
    points.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    let mut unique: Vec<(f64, f64)> = Vec::new();
    for p in points {
        if !unique
            .iter()
            .any(|q| (p.0 - q.0).abs() < DEDUP_TOL && (p.1 - q.1).abs() < DEDUP_TOL)
        {
            unique.push(p);
        }
    }
    Ok(EquilibriumScan {
        equilibria: unique
            .into_iter()
            .map(|(u, v)| Equilibrium::at(params, act, u, v))
            .collect(),
        seeds: seeds.len(),
        failed_seeds,
    })
}

/// All equilibria in `(0,1)^2`, sorted by `(u*, v*)`.
pub fn find_equilibria(params: &ModelParams, act: &Activation, grid_n: usize) -> Result<Vec<Equilibrium>> {
    let scan = scan_equilibria(params, act, grid_n)?;
    if scan.equilibria.is_empty() {
        return Err(Error::NoConvergence(format!(
            "newton failed from all {} seeds",
            scan.seeds
        )));
    }
    Ok(scan.equilibria)
}

pub const CHARACTERISTIC_RESIDUAL_TOL: f64 = 1e-8;

/// `(alpha, beta) = (a φ1 + d φ2, (ad - bc) φ1 φ2)` at a fixed point.
pub fn characteristic_params(params: &ModelParams, act: &Activation, u_star: f64, v_star: f64) -> Result<(f64, f64)> {
    let r = residual(params, act, u_star, v_star);
    if !(r < CHARACTERISTIC_RESIDUAL_TOL) {
        return Err(Error::Precondition(format!(
            "({u_star}, {v_star}) is not an equilibrium (residual {r:.3e})"
        )));
    }
    let eq = Equilibrium::at(params, act, u_star, v_star);
    Ok((eq.alpha, eq.beta))
}

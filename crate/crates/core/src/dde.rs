//! Time integration of the delayed system and trajectory diagnosis.
//!
//! Three engines share the classical fourth-order Runge-Kutta step with a
//! fixed step size:
//!
//! - [`simulate_dirac`]: method of steps for a discrete delay. The step is
//!   shrunk so the delay is an integer number of steps; delayed values at
//!   half steps come from the cubic Hermite interpolant of the stored
//!   solution and its derivative.
//! - [`simulate_gamma_chain`]: the exact linear chain reduction of a Gamma
//!   kernel of order `p` to a `(2 + 2p)`-dimensional ordinary system.
//! - [`simulate_quadrature`]: literal evaluation of the convolution integrals
//!   with a product trapezoidal rule over the stored past.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kernel::{self, KernelSpec};
use crate::model::{Activation, Equilibrium, ModelParams};
use crate::{Error, Result};

/// Initial function on `(-∞, 0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum HistoryFunction {
    Constant { u0: f64, v0: f64 },
    /// Samples at increasing times `<= 0`, joined by cubic Hermite pieces
    /// and extended as a constant to the left of the earliest sample.
    Sampled { times: Vec<f64>, u: Vec<f64>, v: Vec<f64> },
}

impl HistoryFunction {
    /// Constant history displaced from an equilibrium by `eps` in both components.
    pub fn perturbed(eq: &Equilibrium, eps: f64) -> Self {
        HistoryFunction::Constant { u0: eq.u_star + eps, v0: eq.v_star + eps }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            HistoryFunction::Constant { u0, v0 } => {
                if u0.is_finite() && v0.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config("history values must be finite".into()))
                }
            }
            HistoryFunction::Sampled { times, u, v } => {
                if times.len() < 2 || u.len() != times.len() || v.len() != times.len() {
                    return Err(Error::Config("sampled history needs >= 2 aligned samples".into()));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) || *times.last().unwrap() > 0.0 {
                    return Err(Error::Config("history times must increase and end at or before 0".into()));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, t: f64) -> (f64, f64) {
        match self {
            HistoryFunction::Constant { u0, v0 } => (*u0, *v0),
            HistoryFunction::Sampled { times, u, v } => {
                let n = times.len();
                if t <= times[0] {
                    return (u[0], v[0]);
                }
                if t >= times[n - 1] {
                    return (u[n - 1], v[n - 1]);
                }
                let i = times.partition_point(|&s| s <= t) - 1;
                (catmull_rom(times, u, i, t), catmull_rom(times, v, i, t))
            }
        }
    }
}

/// Cubic Hermite interpolation on `[times[i], times[i+1]]` with
/// finite-difference slopes.
fn catmull_rom(times: &[f64], y: &[f64], i: usize, t: f64) -> f64 {
    let n = times.len();
    let slope = |k: usize| {
        let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
        (y[b] - y[a]) / (times[b] - times[a])
    };
    hermite(times[i], y[i], slope(i), times[i + 1], y[i + 1], slope(i + 1), t)
}

#[inline]
fn hermite(t0: f64, y0: f64, f0: f64, t1: f64, y1: f64, f1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * f0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * f1
}

/// Midpoint of the cubic Hermite interpolant.
#[inline]
fn hermite_mid(y0: f64, f0: f64, y1: f64, f1: f64, h: f64) -> f64 {
    0.5 * (y0 + y1) + h * (f0 - f1) / 8.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    pub record_stride: usize,
    /// Kernel tail mass beyond which the convolution history is truncated.
    pub quadrature_cutoff_mass: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { dt: 1e-3, t_end: 100.0, record_stride: 10, quadrature_cutoff_mass: 1e-8 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.record_stride == 0 {
            return Err(Error::Config("record_stride must be >= 1".into()));
        }
        if !(self.quadrature_cutoff_mass > 0.0 && self.quadrature_cutoff_mass < 1.0) {
            return Err(Error::Config("quadrature_cutoff_mass must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Chain states `x1..xp, y1..yp` per recorded time.
    pub aux: Option<Vec<Vec<f64>>>,
    /// `None` for the non-delayed system.
    pub kernel: Option<KernelSpec>,
    pub tau: f64,
    pub params: ModelParams,
    pub activation: Activation,
    /// Step size actually used.
    pub dt: f64,
}

impl Trajectory {
    fn new(kernel: Option<KernelSpec>, tau: f64, params: &ModelParams, act: &Activation, dt: f64) -> Self {
        Trajectory {
            times: Vec::new(),
            u: Vec::new(),
            v: Vec::new(),
            aux: None,
            kernel,
            tau,
            params: *params,
            activation: *act,
            dt,
        }
    }

    fn push(&mut self, t: f64, u: f64, v: f64) {
        self.times.push(t);
        self.u.push(u);
        self.v.push(v);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sup-norm distance to another trajectory over the common recorded
    /// times up to `t_max` (times must coincide).
    pub fn sup_distance(&self, other: &Trajectory, t_max: f64) -> f64 {
        self.times
            .iter()
            .zip(&other.times)
            .take_while(|(t, _)| **t <= t_max + 1e-12)
            .enumerate()
            .map(|(k, _)| (self.u[k] - other.u[k]).abs().max((self.v[k] - other.v[k]).abs()))
            .fold(0.0, f64::max)
    }

    /// CSV with header `t,u,v[,x1..xp,y1..yp]`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t,u,v")?;
        let p = self.aux.as_ref().and_then(|a| a.first()).map_or(0, |row| row.len() / 2);
        for k in 1..=p {
            write!(w, ",x{k}")?;
        }
        for k in 1..=p {
            write!(w, ",y{k}")?;
        }
        writeln!(w)?;
        for i in 0..self.len() {
            write!(w, "{},{},{}", self.times[i], self.u[i], self.v[i])?;
            if let Some(aux) = &self.aux {
                for x in &aux[i] {
                    write!(w, ",{x}")?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[inline]
fn rhs_pair(params: &ModelParams, act: &Activation, u: f64, v: f64, in_u: f64, in_v: f64) -> (f64, f64) {
    (
        -u + act.value(params.theta_u + in_u),
        -v + act.value(params.theta_v + in_v),
    )
}

/// Delay-free system (`H ≡ 1`).
pub fn simulate_ode(params: &ModelParams, act: &Activation, u0: f64, v0: f64, cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let f = |u: f64, v: f64| rhs_pair(params, act, u, v, params.a * u + params.b * v, params.c * u + params.d * v);
    let steps = (cfg.t_end / cfg.dt).ceil() as usize;
    let dt = cfg.dt;
    let mut traj = Trajectory::new(None, 0.0, params, act, dt);
    let (mut u, mut v) = (u0, v0);
    traj.push(0.0, u, v);
    for n in 0..steps {
        let k1 = f(u, v);
        let k2 = f(u + 0.5 * dt * k1.0, v + 0.5 * dt * k1.1);
        let k3 = f(u + 0.5 * dt * k2.0, v + 0.5 * dt * k2.1);
        let k4 = f(u + dt * k3.0, v + dt * k3.1);
        u += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        v += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if (n + 1) % cfg.record_stride == 0 {
            traj.push((n + 1) as f64 * dt, u, v);
        }
    }
    Ok(traj)
}

/// Discrete delay `tau` (Dirac kernel) by the method of steps.
pub fn simulate_dirac(
    params: &ModelParams,
    act: &Activation,
    tau: f64,
    history: &HistoryFunction,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    history.validate()?;
    if !(tau > 0.0) {
        return Err(Error::Config(format!("delay must be positive, got {tau}")));
    }
    if cfg.dt > tau {
        return Err(Error::StepExceedsDelay { dt: cfg.dt, tau });
    }
    let m = ((tau / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = tau / m as f64;
    let steps = (cfg.t_end / dt - 1e-9).ceil() as usize;

    let f = |u: f64, v: f64, ud: f64, vd: f64| {
        rhs_pair(params, act, u, v, params.a * ud + params.b * vd, params.c * ud + params.d * vd)
    };
    let (u0, v0) = history.eval(0.0);
    let mut ys: Vec<(f64, f64)> = Vec::with_capacity(steps + 1);
    let mut fs: Vec<(f64, f64)> = Vec::with_capacity(steps + 1);
    ys.push((u0, v0));

    // value at node index i (may be negative: history)
    let node = |ys: &[(f64, f64)], i: isize| -> (f64, f64) {
        if i >= 0 {
            ys[i as usize]
        } else {
            history.eval(i as f64 * dt)
        }
    };

    let mut traj = Trajectory::new(Some(KernelSpec::Dirac), tau, params, act, dt);
    traj.push(0.0, u0, v0);
    for n in 0..steps {
        let (u, v) = ys[n];
        let lag = n as isize - m as isize;
        let d0 = node(&ys, lag);
        let dh = if lag >= 0 {
            let (i, j) = (lag as usize, lag as usize + 1);
            (
                hermite_mid(ys[i].0, fs[i].0, ys[j].0, fs[j].0, dt),
                hermite_mid(ys[i].1, fs[i].1, ys[j].1, fs[j].1, dt),
            )
        } else {
            history.eval((lag as f64 + 0.5) * dt)
        };
        let d1 = node(&ys, lag + 1);
        let k1 = f(u, v, d0.0, d0.1);
        fs.push(k1);
        let k2 = f(u + 0.5 * dt * k1.0, v + 0.5 * dt * k1.1, dh.0, dh.1);
        let k3 = f(u + 0.5 * dt * k2.0, v + 0.5 * dt * k2.1, dh.0, dh.1);
        let k4 = f(u + dt * k3.0, v + dt * k3.1, d1.0, d1.1);
        let un = u + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        let vn = v + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        ys.push((un, vn));
        if (n + 1) % cfg.record_stride == 0 {
            traj.push((n + 1) as f64 * dt, un, vn);
        }
    }
    Ok(traj)
}

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        sum += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

/// Gamma kernel of integer order `p` via the linear chain reduction.
pub fn simulate_gamma_chain(
    params: &ModelParams,
    act: &Activation,
    tau: f64,
    p: u32,
    history: &HistoryFunction,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    history.validate()?;
    if !(tau > 0.0) {
        return Err(Error::Config(format!("mean delay must be positive, got {tau}")));
    }
    if p == 0 {
        return Err(Error::InvalidKernel("gamma order must be >= 1".into()));
    }
    let pu = p as usize;
    let rate = f64::from(p) / tau;
    let dim = 2 + 2 * pu;

    // stage k holds the history filtered by the Gamma(k, rate) density
    let mut y = vec![0.0; dim];
    let (u0, v0) = history.eval(0.0);
    y[0] = u0;
    y[1] = v0;
    for k in 1..=pu {
        let (xa, xc) = match history {
            HistoryFunction::Constant { u0, v0 } => {
                (params.a * u0 + params.b * v0, params.c * u0 + params.d * v0)
            }
            HistoryFunction::Sampled { .. } => {
                let s_max = {
                    let mut s = tau;
                    while kernel::gamma_tail(k as u32, rate, s) > 1e-14 {
                        s *= 1.5;
                    }
                    s
                };
                let feed = |s: f64, w: (f64, f64)| (w.0 * params.a + w.1 * params.b, w.0 * params.c + w.1 * params.d, s);
                let fa = |s: f64| {
                    let (ga, _, _) = feed(s, history.eval(-s));
                    kernel::gamma_density(k as u32, rate, s) * ga
                };
                let fc = |s: f64| {
                    let (_, gc, _) = feed(s, history.eval(-s));
                    kernel::gamma_density(k as u32, rate, s) * gc
                };
                (simpson(fa, 0.0, s_max, 20_000), simpson(fc, 0.0, s_max, 20_000))
            }
        };
        y[1 + k] = xa;
        y[1 + pu + k] = xc;
    }

    let rhs = |y: &[f64], out: &mut [f64]| {
        let (du, dv) = rhs_pair(params, act, y[0], y[1], y[1 + pu], y[1 + 2 * pu]);
        out[0] = du;
        out[1] = dv;
        out[2] = rate * (params.a * y[0] + params.b * y[1] - y[2]);
        out[2 + pu] = rate * (params.c * y[0] + params.d * y[1] - y[2 + pu]);
        for k in 1..pu {
            out[2 + k] = rate * (y[1 + k] - y[2 + k]);
            out[2 + pu + k] = rate * (y[1 + pu + k] - y[2 + pu + k]);
        }
    };

    let dt = cfg.dt;
    let steps = (cfg.t_end / dt - 1e-9).ceil() as usize;
    let mut traj = Trajectory::new(Some(KernelSpec::Gamma { order: p }), tau, params, act, dt);
    let mut aux = Vec::new();
    traj.push(0.0, y[0], y[1]);
    aux.push(y[2..].to_vec());
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    for n in 0..steps {
        rhs(&y, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * dt * k1[i];
        }
        rhs(&tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * dt * k2[i];
        }
        rhs(&tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + dt * k3[i];
        }
        rhs(&tmp, &mut k4);
        for i in 0..dim {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if (n + 1) % cfg.record_stride == 0 {
            traj.push((n + 1) as f64 * dt, y[0], y[1]);
            aux.push(y[2..].to_vec());
        }
    }
    traj.aux = Some(aux);
    Ok(traj)
}

/// Product trapezoidal weights `w_j` such that
/// `∫ h(s) g(T - s) ds ≈ Σ w_j g(T - j dt)` for `g` piecewise linear.
fn convolution_weights(kernel: KernelSpec, tau: f64, dt: f64, cutoff: f64) -> Result<Vec<f64>> {
    let s_max = kernel::truncation_point(kernel, tau, cutoff)?;
    let j_max = (s_max / dt).ceil() as usize;
    let mut w = vec![0.0; j_max + 1];
    for j in 0..j_max {
        let (s0, s1) = (j as f64 * dt, (j + 1) as f64 * dt);
        let (m0, m1) = kernel::interval_moments(kernel, tau, s0, s1)?;
        w[j] += (s1 * m0 - m1) / dt;
        w[j + 1] += (m1 - s0 * m0) / dt;
    }
    Ok(w)
}

/// Distributed delay evaluated by direct convolution over the stored past.
pub fn simulate_quadrature(
    params: &ModelParams,
    act: &Activation,
    kernel: KernelSpec,
    tau: f64,
    history: &HistoryFunction,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    history.validate()?;
    kernel.validate()?;
    if matches!(kernel, KernelSpec::Dirac) {
        return Err(Error::UnsupportedKernel("use simulate_dirac for the dirac kernel".into()));
    }
    if !(tau > 0.0) {
        return Err(Error::Config(format!("mean delay must be positive, got {tau}")));
    }
    let dt = cfg.dt;
    let w = convolution_weights(kernel, tau, dt, cfg.quadrature_cutoff_mass)?;
    let jm = w.len() - 1;
    let steps = (cfg.t_end / dt - 1e-9).ceil() as usize;

    let feed = |u: f64, v: f64| (params.a * u + params.b * v, params.c * u + params.d * v);
    // node values g(t_i) for i in [-jm, steps], stored at offset jm
    let mut ga = Vec::with_capacity(jm + steps + 1);
    let mut gc = Vec::with_capacity(jm + steps + 1);
    // half-node values g(t_{i+1/2}) for i in [-jm-1, steps-1], stored at offset jm+1
    let mut ha = Vec::with_capacity(jm + steps + 1);
    let mut hc = Vec::with_capacity(jm + steps + 1);
    for i in -(jm as isize)..0 {
        let (a, c) = {
            let (u, v) = history.eval(i as f64 * dt);
            feed(u, v)
        };
        ga.push(a);
        gc.push(c);
    }
    for i in -(jm as isize) - 1..0 {
        let (u, v) = history.eval((i as f64 + 0.5) * dt);
        let (a, c) = feed(u, v);
        ha.push(a);
        hc.push(c);
    }
    let (u0, v0) = history.eval(0.0);
    let (a0, c0) = feed(u0, v0);
    ga.push(a0);
    gc.push(c0);

    let dot = |w: &[f64], g: &[f64], newest: usize| -> f64 {
        // Σ_j w[j] g[newest - j]
        w.iter().enumerate().map(|(j, wj)| wj * g[newest - j]).sum()
    };

    let mut traj = Trajectory::new(Some(kernel), tau, params, act, dt);
    traj.push(0.0, u0, v0);
    let (mut u, mut v) = (u0, v0);
    let mut prev: Option<((f64, f64), (f64, f64))> = None; // (state, derivative) at t_{n-1}
    let w_tail = &w[1..];
    for n in 0..steps {
        let idx = jm + n; // index of t_n in ga
        // stage 1 at t_n
        let in1 = (dot(&w, &ga, idx), dot(&w, &gc, idx));
        let k1 = rhs_pair(params, act, u, v, in1.0, in1.1);
        // half node between t_{n-1} and t_n
        if let Some(((up, vp), (fu, fv))) = prev {
            let (hu, hv) = (hermite_mid(up, fu, u, k1.0, dt), hermite_mid(vp, fv, v, k1.1, dt));
            let (a, c) = feed(hu, hv);
            ha.push(a);
            hc.push(c);
        } else {
            // n = 0: t_{-1/2} is history, already stored
        }
        let hidx = jm + n; // index of t_{n-1/2} in ha
        let past_half = (
            w_tail.iter().enumerate().map(|(j, wj)| wj * ha[hidx - j]).sum::<f64>(),
            w_tail.iter().enumerate().map(|(j, wj)| wj * hc[hidx - j]).sum::<f64>(),
        );
        let (u2, v2) = (u + 0.5 * dt * k1.0, v + 0.5 * dt * k1.1);
        let g2 = feed(u2, v2);
        let k2 = rhs_pair(params, act, u2, v2, w[0] * g2.0 + past_half.0, w[0] * g2.1 + past_half.1);
        let (u3, v3) = (u + 0.5 * dt * k2.0, v + 0.5 * dt * k2.1);
        let g3 = feed(u3, v3);
        let k3 = rhs_pair(params, act, u3, v3, w[0] * g3.0 + past_half.0, w[0] * g3.1 + past_half.1);
        let (u4, v4) = (u + dt * k3.0, v + dt * k3.1);
        let g4 = feed(u4, v4);
        let past_node = (dot(w_tail, &ga, idx), dot(w_tail, &gc, idx));
        let k4 = rhs_pair(params, act, u4, v4, w[0] * g4.0 + past_node.0, w[0] * g4.1 + past_node.1);
        prev = Some(((u, v), k1));
        u += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        v += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        let (a, c) = feed(u, v);
        ga.push(a);
        gc.push(c);
        if (n + 1) % cfg.record_stride == 0 {
            traj.push((n + 1) as f64 * dt, u, v);
        }
    }
    Ok(traj)
}

/// Integration engine for distributed kernels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Method of steps for Dirac, chain reduction for Gamma, quadrature for Uniform.
    #[default]
    Auto,
    Quadrature,
}

/// Dispatches to the engine matching the kernel. `tau == 0` integrates the
/// delay-free system.
pub fn simulate(
    params: &ModelParams,
    act: &Activation,
    kernel: KernelSpec,
    tau: f64,
    history: &HistoryFunction,
    cfg: &SimConfig,
    engine: Engine,
) -> Result<Trajectory> {
    if tau == 0.0 {
        let (u0, v0) = history.eval(0.0);
        return simulate_ode(params, act, u0, v0, cfg);
    }
    match (kernel, engine) {
        (KernelSpec::Dirac, _) => simulate_dirac(params, act, tau, history, cfg),
        (KernelSpec::Gamma { order }, Engine::Auto) => simulate_gamma_chain(params, act, tau, order, history, cfg),
        _ => simulate_quadrature(params, act, kernel, tau, history, cfg),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BehaviorVerdict {
    Decay,
    LimitCycle,
    Irregular,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehaviorReport {
    pub verdict: BehaviorVerdict,
    /// Half the peak-to-peak range of `u` after the settle window.
    pub amplitude: f64,
    pub period: Option<f64>,
    pub final_distance_to_equilibrium: f64,
    pub peaks: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BehaviorThresholds {
    pub decay_tol: f64,
    pub min_peaks: usize,
    pub period_variation: f64,
    pub amplitude_variation: f64,
}

impl Default for BehaviorThresholds {
    fn default() -> Self {
        BehaviorThresholds { decay_tol: 1e-6, min_peaks: 5, period_variation: 0.01, amplitude_variation: 0.02 }
    }
}

/// Local maxima of `y`, refined by a parabola through three samples.
fn peaks(t: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] {
            let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
            let denom = a - 2.0 * b + c;
            let (shift, height) = if denom < 0.0 {
                let s = 0.5 * (a - c) / denom;
                (s, b - 0.25 * (a - c) * s)
            } else {
                (0.0, b)
            };
            let h = t[i + 1] - t[i];
            out.push((t[i] + shift * h, height));
        }
    }
    out
}

/// Classifies the long-time behaviour of a trajectory relative to an equilibrium.
pub fn detect_behavior(traj: &Trajectory, equilibrium: (f64, f64), settle_fraction: f64) -> Result<BehaviorReport> {
    detect_behavior_with(traj, equilibrium, settle_fraction, &BehaviorThresholds::default())
}

pub fn detect_behavior_with(
    traj: &Trajectory,
    equilibrium: (f64, f64),
    settle_fraction: f64,
    th: &BehaviorThresholds,
) -> Result<BehaviorReport> {
    if !(0.0..1.0).contains(&settle_fraction) {
        return Err(Error::InvalidArgument(format!("settle_fraction must lie in [0, 1), got {settle_fraction}")));
    }
    let start = (settle_fraction * traj.len() as f64).floor() as usize;
    if traj.len() < start + 3 {
        return Err(Error::TrajectoryTooShort(format!(
            "{} samples, settle window discards {start}",
            traj.len()
        )));
    }
    let (t, u) = (&traj.times[start..], &traj.u[start..]);
    let last = traj.len() - 1;
    let final_distance = (traj.u[last] - equilibrium.0).hypot(traj.v[last] - equilibrium.1);
    let (lo, hi) = u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let amplitude = 0.5 * (hi - lo);
    let pk = peaks(t, u);
    let mut report = BehaviorReport {
        verdict: BehaviorVerdict::Irregular,
        amplitude,
        period: None,
        final_distance_to_equilibrium: final_distance,
        peaks: pk.len(),
    };
    if final_distance < th.decay_tol {
        report.verdict = BehaviorVerdict::Decay;
        return Ok(report);
    }
    if pk.len() >= th.min_peaks && amplitude > 0.0 {
        let periods: Vec<f64> = pk.windows(2).map(|w| w[1].0 - w[0].0).collect();
        let mean = periods.iter().sum::<f64>() / periods.len() as f64;
        let (pmin, pmax) = periods.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let (hmin, hmax) = pk.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
        let period_ok = (pmax - pmin) / mean < th.period_variation;
        let amp_ok = (hmax - hmin) / (2.0 * amplitude) < th.amplitude_variation;
        if period_ok && amp_ok {
            report.verdict = BehaviorVerdict::LimitCycle;
            report.period = Some(mean);
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepEntry {
    pub tau: f64,
    pub report: BehaviorReport,
    pub trajectory: Trajectory,
}

/// Simulates the perturbed equilibrium for each delay in `taus` (in
/// parallel, output in input order) and diagnoses each run.
#[allow(clippy::too_many_arguments)]
pub fn tau_sweep(
    params: &ModelParams,
    act: &Activation,
    kernel: KernelSpec,
    eq: &Equilibrium,
    taus: &[f64],
    perturbation: f64,
    cfg: &SimConfig,
    settle_fraction: f64,
) -> Result<Vec<SweepEntry>> {
    let history = HistoryFunction::perturbed(eq, perturbation);
    taus.par_iter()
        .map(|&tau| {
            let trajectory = simulate(params, act, kernel, tau, &history, cfg, Engine::Auto)?;
            let report = detect_behavior(&trajectory, (eq.u_star, eq.v_star), settle_fraction)?;
            Ok(SweepEntry { tau, report, trajectory })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::find_equilibria;

    fn section3() -> (ModelParams, Activation, Equilibrium) {
        let p = ModelParams { a: -6.0, b: 3.0, c: 3.0, d: -6.0, theta_u: 0.1, theta_v: 0.2 };
        let act = Activation::new(40.0).unwrap();
        let eq = find_equilibria(&p, &act, 64).unwrap()[0];
        (p, act, eq)
    }

    #[test]
    fn equilibrium_history_stays_put() {
        let (p, act, eq) = section3();
        let h = HistoryFunction::Constant { u0: eq.u_star, v0: eq.v_star };
        let cfg = SimConfig { dt: 1e-3, t_end: 20.0, ..SimConfig::default() };
        let drift = |tr: &Trajectory| {
            tr.u.iter()
                .zip(&tr.v)
                .map(|(u, v)| (u - eq.u_star).abs().max((v - eq.v_star).abs()))
                .fold(0.0, f64::max)
        };
        assert!(drift(&simulate_dirac(&p, &act, 0.05, &h, &cfg).unwrap()) < 1e-9);
        for order in [1, 2] {
            assert!(drift(&simulate_gamma_chain(&p, &act, 0.3, order, &h, &cfg).unwrap()) < 1e-9);
        }
        let qcfg = SimConfig { dt: 2e-3, t_end: 5.0, ..SimConfig::default() };
        assert!(drift(&simulate_quadrature(&p, &act, KernelSpec::WEAK_GAMMA, 0.3, &h, &qcfg).unwrap()) < 1e-6);
        let uni = KernelSpec::Uniform { eps: 0.5 };
        assert!(drift(&simulate_quadrature(&p, &act, uni, 0.3, &h, &qcfg).unwrap()) < 1e-6);
    }

    #[test]
    fn step_exceeding_delay_is_rejected() {
        let (p, act, eq) = section3();
        let h = HistoryFunction::perturbed(&eq, 1e-3);
        let cfg = SimConfig { dt: 0.1, ..SimConfig::default() };
        assert!(matches!(simulate_dirac(&p, &act, 0.05, &h, &cfg), Err(Error::StepExceedsDelay { .. })));
    }

    #[test]
    fn dirac_step_divides_delay() {
        let (p, act, eq) = section3();
        let h = HistoryFunction::perturbed(&eq, 1e-3);
        let cfg = SimConfig { dt: 0.003, t_end: 1.0, record_stride: 1, ..SimConfig::default() };
        let tr = simulate_dirac(&p, &act, 0.05, &h, &cfg).unwrap();
        let m = 0.05 / tr.dt;
        assert!((m - m.round()).abs() < 1e-9 && tr.dt <= 0.003);
    }

    #[test]
    fn quadrature_rejects_dirac() {
        let (p, act, eq) = section3();
        let h = HistoryFunction::perturbed(&eq, 1e-3);
        assert!(matches!(
            simulate_quadrature(&p, &act, KernelSpec::Dirac, 0.1, &h, &SimConfig::default()),
            Err(Error::UnsupportedKernel(_))
        ));
    }

    #[test]
    fn convolution_weights_preserve_mass_and_mean() {
        for k in [KernelSpec::WEAK_GAMMA, KernelSpec::STRONG_GAMMA, KernelSpec::Uniform { eps: 0.5 }] {
            let w = convolution_weights(k, 0.7, 0.01, 1e-12).unwrap();
            let mass: f64 = w.iter().sum();
            let mean: f64 = w.iter().enumerate().map(|(j, wj)| j as f64 * 0.01 * wj).sum();
            assert!((mass - 1.0).abs() < 1e-10, "{k}");
            assert!((mean - 0.7).abs() < 1e-9, "{k}");
        }
    }

    #[test]
    fn sampled_history_interpolates() {
        let times: Vec<f64> = (0..=20).map(|k| -2.0 + 0.1 * k as f64).collect();
        let u: Vec<f64> = times.iter().map(|t| (t * 0.7f64).sin()).collect();
        let v: Vec<f64> = times.iter().map(|t| t * t).collect();
        let h = HistoryFunction::Sampled { times, u, v };
        h.validate().unwrap();
        let (a, b) = h.eval(-0.55);
        assert!((a - (-0.55f64 * 0.7).sin()).abs() < 1e-4);
        assert!((b - 0.3025).abs() < 1e-3);
        assert_eq!(h.eval(-10.0), h.eval(-2.0));
    }

    #[test]
    fn sampled_constant_history_matches_constant() {
        let (p, act, _) = section3();
        let c = HistoryFunction::Constant { u0: 0.2, v0: 0.1 };
        let s = HistoryFunction::Sampled { times: vec![-1.0, 0.0], u: vec![0.2, 0.2], v: vec![0.1, 0.1] };
        let cfg = SimConfig { dt: 1e-3, t_end: 2.0, ..SimConfig::default() };
        let a = simulate_gamma_chain(&p, &act, 0.4, 2, &c, &cfg).unwrap();
        let b = simulate_gamma_chain(&p, &act, 0.4, 2, &s, &cfg).unwrap();
        assert!(a.sup_distance(&b, 2.0) < 1e-9);
    }

    #[test]
    fn behavior_of_constant_trajectory() {
        let (p, act, eq) = section3();
        let h = HistoryFunction::Constant { u0: eq.u_star, v0: eq.v_star };
        let cfg = SimConfig { dt: 1e-3, t_end: 5.0, ..SimConfig::default() };
        let tr = simulate_dirac(&p, &act, 0.05, &h, &cfg).unwrap();
        let r = detect_behavior(&tr, (eq.u_star, eq.v_star), 0.5).unwrap();
        assert_eq!(r.verdict, BehaviorVerdict::Decay);
        assert!(r.amplitude < 1e-12);
    }

    #[test]
    fn behavior_of_sine_wave() {
        let (p, act, _) = section3();
        let mut tr = Trajectory::new(None, 0.0, &p, &act, 0.01);
        for k in 0..5000 {
            let t = k as f64 * 0.01;
            tr.push(t, 0.5 + 0.1 * (2.0 * std::f64::consts::PI * t / 3.0).sin(), 0.5);
        }
        let r = detect_behavior(&tr, (0.5, 0.5), 0.2).unwrap();
        assert_eq!(r.verdict, BehaviorVerdict::LimitCycle);
        assert!((r.period.unwrap() - 3.0).abs() < 1e-3);
        assert!((r.amplitude - 0.1).abs() < 1e-3);
    }

    #[test]
    fn too_short_trajectory() {
        let (p, act, _) = section3();
        let mut tr = Trajectory::new(None, 0.0, &p, &act, 0.01);
        tr.push(0.0, 0.1, 0.1);
        tr.push(0.1, 0.1, 0.1);
        assert!(matches!(detect_behavior(&tr, (0.1, 0.1), 0.0), Err(Error::TrajectoryTooShort(_))));
    }

    #[test]
    fn csv_header_lists_chain_states() {
        let (p, act, eq) = section3();
        let h = HistoryFunction::perturbed(&eq, 1e-3);
        let cfg = SimConfig { dt: 0.01, t_end: 0.05, record_stride: 1, ..SimConfig::default() };
        let tr = simulate_gamma_chain(&p, &act, 0.2, 2, &h, &cfg).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "t,u,v,x1,x2,y1,y2");
        assert_eq!(text.lines().count(), 1 + tr.len());
    }
}

use super::interp::{interpolate_gradient, wrap, Stencil};
use super::regime::ScalingRegime;
use crate::error::{Result, VnsError};
use crate::fluid::GRAD_THRESHOLD;
use crate::grid_spectral::{grad_linf, gradient, TorusField};

/// Velocity fields at increasing times, linearly interpolated in between.
#[derive(Clone, Debug)]
pub struct FieldTrajectory {
    times: Vec<f64>,
    fields: Vec<TorusField>,
    grads: Vec<TorusField>,
    grad_norms: Vec<f64>,
}

impl FieldTrajectory {
    pub fn new(samples: Vec<(f64, TorusField)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(VnsError::InvalidArgument("empty field trajectory".into()));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(VnsError::InvalidArgument("trajectory times must increase".into()));
        }
        let mut times = Vec::with_capacity(samples.len());
        let mut fields = Vec::with_capacity(samples.len());
        for (t, f) in samples {
            if !f.is_vector() {
                return Err(VnsError::InvalidArgument("trajectory fields must be vectors".into()));
            }
            f.check_finite()?;
            times.push(t);
            fields.push(f);
        }
        let grads: Vec<TorusField> = fields.iter().map(gradient).collect();
        let grad_norms = fields.iter().map(grad_linf).collect();
        Ok(Self { times, fields, grads, grad_norms })
    }

    /// Time-independent field.
    pub fn steady(u: TorusField) -> Result<Self> {
        Self::new(vec![(0.0, u)])
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    /// Trapezoid value of `∫_0^t ‖∇u‖_{L∞}`.
    pub fn accum_grad(&self, t: f64) -> f64 {
        if self.times.len() == 1 {
            return self.grad_norms[0] * t.max(0.0);
        }
        let mut acc = 0.0;
        for k in 1..self.times.len() {
            let (t0, t1) = (self.times[k - 1], self.times[k]);
            if t0 >= t {
                break;
            }
            let hi = t1.min(t);
            let g1 = self.grad_norms[k - 1]
                + (self.grad_norms[k] - self.grad_norms[k - 1]) * (hi - t0) / (t1 - t0);
            acc += 0.5 * (hi - t0) * (self.grad_norms[k - 1] + g1);
        }
        acc
    }

    fn bracket(&self, t: f64) -> (usize, usize, f64) {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return (0, 0, 0.0);
        }
        if t >= self.times[n - 1] {
            return (n - 1, n - 1, 0.0);
        }
        let k = self.times.partition_point(|&s| s <= t);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        (k - 1, k, (t - t0) / (t1 - t0))
    }

    /// `u(t, x)` and `∇u(t, x)` (entry `[i][j] = ∂_j u_i`).
    pub fn sample(&self, t: f64, x: &[f64]) -> ([f64; 3], [[f64; 3]; 3]) {
        let d = x.len();
        let st = Stencil::new(self.fields[0].grid(), x);
        let (a, b, th) = self.bracket(t);
        let ua = st.interp(&self.fields[a]);
        let ga = interpolate_gradient(&self.grads[a], &st, d);
        if a == b {
            return (ua, ga);
        }
        let ub = st.interp(&self.fields[b]);
        let gb = interpolate_gradient(&self.grads[b], &st, d);
        let mut u = [0.0; 3];
        let mut g = [[0.0; 3]; 3];
        for i in 0..d {
            u[i] = (1.0 - th) * ua[i] + th * ub[i];
            for j in 0..d {
                g[i][j] = (1.0 - th) * ga[i][j] + th * gb[i][j];
            }
        }
        (u, g)
    }
}

/// Outcome of a Jacobian probe.
#[derive(Clone, Copy, Debug)]
pub struct JacobianProbe {
    /// `det D_v V(0; t, x, v)`.
    pub det: f64,
    /// Lower bound `e^{d t/ε} / 2`.
    pub bound: f64,
    /// False when `∫_0^t ‖∇u‖_{L∞} > 1/30`, in which case the bound is not
    /// guaranteed.
    pub guaranteed: bool,
}

impl JacobianProbe {
    pub fn satisfies_bound(&self) -> bool {
        self.det >= self.bound
    }
}

fn det(m: &[[f64; 3]; 3], d: usize) -> f64 {
    if d == 2 {
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    } else {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

/// Backward state: position X, velocity V, A = ∂X/∂v, B = ∂V/∂v.
#[derive(Clone, Copy)]
struct State {
    x: [f64; 3],
    v: [f64; 3],
    a: [[f64; 3]; 3],
    b: [[f64; 3]; 3],
}

impl State {
    fn axpy(&self, h: f64, k: &State, d: usize) -> State {
        let mut o = *self;
        for i in 0..d {
            o.x[i] += h * k.x[i];
            o.v[i] += h * k.v[i];
            for j in 0..d {
                o.a[i][j] += h * k.a[i][j];
                o.b[i][j] += h * k.b[i][j];
            }
        }
        o
    }

    /// Applies the integrating factor `e^{τ/ε}` to V and B.
    fn grow(&self, f: f64, d: usize) -> State {
        let mut o = *self;
        for i in 0..d {
            o.v[i] *= f;
            for j in 0..d {
                o.b[i][j] *= f;
            }
        }
        o
    }
}

/// Integrates the characteristics and their variational equations backward
/// from `(x, v)` at time `t` to time 0 and returns `det D_v V(0; t, x, v)`.
pub fn jacobian_probe(
    x: &[f64],
    v: &[f64],
    traj: &FieldTrajectory,
    t: f64,
    regime: &ScalingRegime,
) -> Result<JacobianProbe> {
    let d = x.len();
    if v.len() != d || d != traj.fields[0].grid().dim() {
        return Err(VnsError::Mismatch("probe point dimension".into()));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(VnsError::InvalidArgument(format!("probe time {t} must be nonnegative")));
    }
    let (eps, sigma) = (regime.epsilon, regime.sigma);
    let bound = 0.5 * (d as f64 * t / eps).exp();
    let guaranteed = traj.accum_grad(t) <= GRAD_THRESHOLD;
    let mut s = State { x: [0.0; 3], v: [0.0; 3], a: [[0.0; 3]; 3], b: [[0.0; 3]; 3] };
    s.x[..d].copy_from_slice(x);
    s.v[..d].copy_from_slice(v);
    for i in 0..d {
        s.b[i][i] = 1.0;
    }
    if t == 0.0 {
        return Ok(JacobianProbe { det: 1.0, bound, guaranteed });
    }
    // In backward time τ = t - s:
    //   X' = -V/σ,  V' = (V - σu)/ε,  A' = -B/σ,  B' = (B - σ ∇u A)/ε.
    // The linear part V/ε, B/ε is integrated exactly (Lawson RK4).
    let nonlinear = |tau: f64, s: &State| -> State {
        let mut xw = [0.0; 3];
        for i in 0..d {
            xw[i] = wrap(s.x[i]);
        }
        let (u, g) = traj.sample(t - tau, &xw[..d]);
        let mut k = State { x: [0.0; 3], v: [0.0; 3], a: [[0.0; 3]; 3], b: [[0.0; 3]; 3] };
        for i in 0..d {
            k.x[i] = -s.v[i] / sigma;
            k.v[i] = -sigma * u[i] / eps;
            for j in 0..d {
                k.a[i][j] = -s.b[i][j] / sigma;
                let ga: f64 = (0..d).map(|m| g[i][m] * s.a[m][j]).sum();
                k.b[i][j] = -sigma * ga / eps;
            }
        }
        k
    };
    let steps = (t / (eps / 20.0)).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let eh = (0.5 * h / eps).exp();
    let e1 = (h / eps).exp();
    let mut tau = 0.0;
    for _ in 0..steps {
        let k1 = nonlinear(tau, &s);
        let k2 = nonlinear(tau + 0.5 * h, &s.axpy(0.5 * h, &k1, d).grow(eh, d));
        let k3 = nonlinear(tau + 0.5 * h, &s.grow(eh, d).axpy(0.5 * h, &k2, d));
        let k4 = nonlinear(tau + h, &s.grow(eh, d).axpy(h, &k3, d).grow(eh, d));
        let mut next = s.grow(e1, d);
        next = next.axpy(h / 6.0, &k1.grow(e1, d), d);
        next = next.axpy(h / 3.0, &k2.grow(eh, d), d);
        next = next.axpy(h / 3.0, &k3.grow(eh, d), d);
        next = next.axpy(h / 6.0, &k4, d);
        s = next;
        tau += h;
    }
    Ok(JacobianProbe { det: det(&s.b, d), bound, guaranteed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_spectral::TorusGrid;

    #[test]
    fn zero_field_gives_exponential_volume_growth() {
        let g = TorusGrid::new(2, 8).unwrap();
        let traj = FieldTrajectory::steady(TorusField::vector_zeros(&g)).unwrap();
        let regime = ScalingRegime::light(0.25).unwrap();
        let p = jacobian_probe(&[1.0, 2.0], &[0.3, -0.1], &traj, 0.5, &regime).unwrap();
        let exact = (2.0 * 0.5 / 0.25f64).exp();
        assert!((p.det / exact - 1.0).abs() < 1e-12);
        assert!(p.guaranteed && p.satisfies_bound());
    }

    #[test]
    fn time_zero_is_identity() {
        let g = TorusGrid::new(2, 8).unwrap();
        let traj = FieldTrajectory::steady(TorusField::vector_zeros(&g)).unwrap();
        let regime = ScalingRegime::fine(0.1).unwrap();
        assert_eq!(jacobian_probe(&[0.0, 0.0], &[1.0, 1.0], &traj, 0.0, &regime).unwrap().det, 1.0);
    }
}

use crate::grid_spectral::{grad_linf, TorusField};

/// Bound on `∫‖∇u‖_{L∞}` defining a strong existence time.
pub const GRAD_THRESHOLD: f64 = 1.0 / 30.0;

/// Flags reported after each monitor update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorFlags {
    /// `accum_grad ≤ 1/30`.
    pub strong_grad_ok: bool,
    /// `max(accum_heat, accum_f_l2) ≤ C*/2`, only when a `C*` was supplied.
    pub small_data_ok: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
struct Sample {
    t: f64,
    grad: f64,
    f_l2_sq: f64,
    heat: f64,
}

/// Running time integrals behind the strong-existence conditions.
#[derive(Clone, Debug)]
pub struct ExistenceMonitor {
    pub accum_grad: f64,
    pub accum_f_l2: f64,
    pub accum_heat: f64,
    pub threshold_grad: f64,
    pub c_star: Option<f64>,
    last: Option<Sample>,
    // |k|² and |û⁰_k|² for the heat term
    heat_modes: Vec<(f64, f64)>,
}

impl ExistenceMonitor {
    /// Monitor for a run started from `u0`.
    pub fn new(u0: &TorusField, c_star: Option<f64>) -> Self {
        let s = u0.spectrum();
        let grid = u0.grid();
        let heat_modes = (0..grid.len())
            .filter_map(|i| {
                let k = grid.kvec(i);
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                let e: f64 = s.comps.iter().map(|c| c[i].norm_sqr()).sum();
                (k2 > 0.0 && e > 0.0).then_some((k2, e))
            })
            .collect();
        Self {
            accum_grad: 0.0,
            accum_f_l2: 0.0,
            accum_heat: 0.0,
            threshold_grad: GRAD_THRESHOLD,
            c_star,
            last: None,
            heat_modes,
        }
    }

    /// Monitor without a heat term, driven only through [`record`](Self::record).
    pub fn bare() -> Self {
        Self {
            accum_grad: 0.0,
            accum_f_l2: 0.0,
            accum_heat: 0.0,
            threshold_grad: GRAD_THRESHOLD,
            c_star: None,
            last: None,
            heat_modes: Vec::new(),
        }
    }

    /// `‖e^{tΔ}u⁰‖⁴_{Ḣ¹}`.
    pub fn heat_term(&self, t: f64) -> f64 {
        let h1sq: f64 = self
            .heat_modes
            .iter()
            .map(|&(k2, e)| k2 * (-2.0 * k2 * t).exp() * e)
            .sum();
        h1sq * h1sq
    }

    /// Adds the state of the run at time `t`: velocity `u` and force `f`.
    pub fn update(&mut self, t: f64, u: &TorusField, f: &TorusField) -> MonitorFlags {
        let heat = self.heat_term(t);
        self.record(t, grad_linf(u), f.l2_norm_sq(), heat)
    }

    /// Adds a sample of the three integrands; trapezoid rule between samples.
    pub fn record(&mut self, t: f64, grad: f64, f_l2_sq: f64, heat: f64) -> MonitorFlags {
        let s = Sample { t, grad, f_l2_sq, heat };
        if let Some(p) = &self.last {
            let dt = t - p.t;
            if dt > 0.0 {
                self.accum_grad += 0.5 * dt * (p.grad + s.grad);
                self.accum_f_l2 += 0.5 * dt * (p.f_l2_sq + s.f_l2_sq);
                self.accum_heat += 0.5 * dt * (p.heat + s.heat);
            }
        }
        self.last = Some(s);
        self.flags()
    }

    pub fn flags(&self) -> MonitorFlags {
        MonitorFlags {
            strong_grad_ok: self.accum_grad <= self.threshold_grad,
            small_data_ok: self
                .c_star
                .map(|c| self.accum_heat.max(self.accum_f_l2) <= 0.5 * c),
        }
    }
}

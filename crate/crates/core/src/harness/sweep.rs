//! ε-sweeps against a shared reference and log–log rate fits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::{ReferenceModel, RunConfig};
use super::coupled::{initial_state, reference_for, simulate, write_error_record, write_outputs, RunOutput};
use crate::error::{Result, VnsError};

/// Least-squares fit of `ln e = slope · ln ε + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    /// Natural-log intercept.
    pub intercept: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    pub points: usize,
}

/// Fits `err ≈ C ε^slope`. Needs at least three points, ε strictly
/// decreasing and all values positive.
pub fn fit_slope(eps: &[f64], err: &[f64]) -> Result<SlopeFit> {
    if eps.len() != err.len() {
        return Err(VnsError::InvalidArgument("ε and error lists differ in length".into()));
    }
    if eps.len() < 3 {
        return Err(VnsError::InvalidArgument(format!("{} points, need at least 3", eps.len())));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(VnsError::InvalidArgument("ε must be strictly decreasing".into()));
    }
    if eps.iter().chain(err).any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(VnsError::InvalidArgument("ε and errors must be positive and finite".into()));
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Ok(SlopeFit { slope, intercept, residual: (ss / n).sqrt(), points: xs.len() })
}

/// Per-ε results of a sweep member.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MemberMetrics {
    pub epsilon: f64,
    /// `sup_t ‖u_ε - u_ref‖_{L²}`.
    pub u_err_sup: f64,
    /// `sup_t ‖ρ_ε - ρ_ref‖_{Ḣ⁻¹}`.
    pub rho_hm1_sup: f64,
    pub combined: f64,
    /// Mean of the sampled `W₁(ρ_ε, ρ_ref)`.
    pub w1_mean: f64,
    /// `Σ w |v/σ - u|` at the final time.
    pub concentration_l1_final: f64,
    /// `∫ f |v|` at the final time.
    pub speed_final: f64,
    /// `∫₀ᵀ Σ w |v/σ - u|² dt`.
    pub misalignment_integral: f64,
    pub rel_entropy_sup: f64,
    /// `‖u⁰_ε - u⁰‖² + ‖ρ⁰_ε - ρ⁰‖²_{Ḣ⁻¹}`.
    pub initial_gap: f64,
    /// `sup 𝓗 / (initial_gap + ε)`.
    pub c_fit: f64,
    pub strong_grad_ok: bool,
    pub momentum_drift: f64,
    pub energy_ratio_max: f64,
}

impl MemberMetrics {
    pub fn from_run(epsilon: f64, out: &RunOutput) -> Self {
        let sup = |f: &dyn Fn(&super::coupled::ErrorSample) -> f64| out.errors.iter().map(f).fold(0.0, f64::max);
        let u_err_sup = sup(&|e| e.u_l2);
        let rho_hm1_sup = sup(&|e| e.rho_hm1);
        let w1: Vec<f64> = out.errors.iter().filter_map(|e| e.w1).collect();
        let w1_mean = if w1.is_empty() { f64::NAN } else { w1.iter().sum::<f64>() / w1.len() as f64 };
        let rel_entropy_sup = out.records.iter().filter_map(|r| r.rel_entropy).fold(0.0, f64::max);
        let initial_gap = out.errors.first().map(|e| e.u_l2 * e.u_l2 + e.rho_hm1 * e.rho_hm1).unwrap_or(0.0);
        let ens = &out.ensemble;
        let d = ens.dim();
        let speed_final = (0..ens.len())
            .map(|i| ens.weight[i] * ens.vel[i * d..(i + 1) * d].iter().map(|v| v * v).sum::<f64>().sqrt())
            .sum();
        MemberMetrics {
            epsilon,
            u_err_sup,
            rho_hm1_sup,
            combined: u_err_sup + rho_hm1_sup,
            w1_mean,
            concentration_l1_final: out.records.last().map(|r| r.concentration_l1).unwrap_or(0.0),
            speed_final,
            misalignment_integral: out.summary.misalignment_integral,
            rel_entropy_sup,
            initial_gap,
            c_fit: rel_entropy_sup / (initial_gap + epsilon),
            strong_grad_ok: out.summary.strong_grad_ok,
            momentum_drift: out.summary.momentum_drift,
            energy_ratio_max: out.summary.energy_ratio_max,
        }
    }
}

/// Metrics for which a slope is fitted, with their accessors.
pub const FITTED_METRICS: [(&str, fn(&MemberMetrics) -> f64); 7] = [
    ("u_err_sup", |m| m.u_err_sup),
    ("rho_hm1_sup", |m| m.rho_hm1_sup),
    ("combined", |m| m.combined),
    ("w1_mean", |m| m.w1_mean),
    ("speed_final", |m| m.speed_final),
    ("misalignment_integral", |m| m.misalignment_integral),
    ("rel_entropy_sup", |m| m.rel_entropy_sup),
];

#[derive(Clone, Debug, Default)]
pub struct RateFit {
    pub members: Vec<MemberMetrics>,
    /// Slope per fitted metric; metrics with nonpositive or missing values
    /// are left out.
    pub slopes: Vec<(String, SlopeFit)>,
}

impl RateFit {
    pub fn epsilons(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.epsilon).collect()
    }

    pub fn slope(&self, metric: &str) -> Option<&SlopeFit> {
        self.slopes.iter().find(|(n, _)| n == metric).map(|(_, s)| s)
    }

    pub fn from_members(members: Vec<MemberMetrics>) -> Self {
        let eps: Vec<f64> = members.iter().map(|m| m.epsilon).collect();
        let slopes = FITTED_METRICS
            .iter()
            .filter_map(|(name, get)| {
                let ys: Vec<f64> = members.iter().map(get).collect();
                fit_slope(&eps, &ys).ok().map(|f| (name.to_string(), f))
            })
            .collect();
        RateFit { members, slopes }
    }

    pub fn members_csv(&self) -> String {
        let mut s = String::from(
            "epsilon,u_err_sup,rho_hm1_sup,combined,w1_mean,concentration_l1_final,speed_final,\
             misalignment_integral,rel_entropy_sup,initial_gap,c_fit,strong_grad_ok,momentum_drift,energy_ratio_max\n",
        );
        for m in &self.members {
            let _ = writeln!(
                s,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{:.17e},{:.17e}",
                m.epsilon,
                m.u_err_sup,
                m.rho_hm1_sup,
                m.combined,
                m.w1_mean,
                m.concentration_l1_final,
                m.speed_final,
                m.misalignment_integral,
                m.rel_entropy_sup,
                m.initial_gap,
                m.c_fit,
                u8::from(m.strong_grad_ok),
                m.momentum_drift,
                m.energy_ratio_max
            );
        }
        s
    }

    pub fn slopes_csv(&self) -> String {
        let mut s = String::from("metric,slope,intercept,residual,points\n");
        for (name, f) in &self.slopes {
            let _ = writeln!(s, "{name},{:.17e},{:.17e},{:.17e},{}", f.slope, f.intercept, f.residual, f.points);
        }
        s
    }
}

/// Gnuplot script plotting every fitted metric of `ratefit.csv` against ε
/// with its fitted line. The data path is the `datafile` variable.
pub fn plot_script(fit: &RateFit) -> String {
    let mut s = String::new();
    s.push_str("# usage: gnuplot -e \"datafile='path/to/ratefit.csv'\" ratefit.gp\n");
    s.push_str("if (!exists(\"datafile\")) datafile = 'ratefit.csv'\n");
    s.push_str("set datafile separator ','\nset logscale xy\nset key left top\n");
    s.push_str("set xlabel 'epsilon'\nset ylabel 'error'\nset terminal pngcairo size 900,650\n");
    s.push_str("set output datafile.'.png'\n");
    let col = |name: &str| match name {
        "u_err_sup" => 2,
        "rho_hm1_sup" => 3,
        "combined" => 4,
        "w1_mean" => 5,
        "speed_final" => 7,
        "misalignment_integral" => 8,
        _ => 9,
    };
    let mut parts = Vec::new();
    for (i, (name, f)) in fit.slopes.iter().enumerate() {
        let _ = writeln!(s, "f{i}(x) = exp({:e}) * x**{:e}", f.intercept, f.slope);
        parts.push(format!(
            "datafile every ::1 using 1:{} with points pt {} title '{name}', f{i}(x) with lines dt 2 title 'slope {:.3}'",
            col(name),
            i + 4,
            f.slope
        ));
    }
    if parts.is_empty() {
        s.push_str("plot datafile every ::1 using 1:2 with linespoints title 'u_err_sup'\n");
    } else {
        let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
    }
    s
}

fn write_fit(dir: &Path, fit: &RateFit) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("ratefit.csv"), fit.members_csv())?;
    fs::write(dir.join("ratefit_slopes.csv"), fit.slopes_csv())?;
    fs::write(dir.join("ratefit.gp"), plot_script(fit))?;
    Ok(())
}

/// Output directory of sweep member `i`.
pub fn member_dir(cfg: &RunConfig, i: usize, eps: f64) -> PathBuf {
    cfg.dir.join(format!("eps_{i:02}_{eps:e}"))
}

/// Runs the limit reference once, then every ε of `cfg.epsilons` against
/// it from the same initial data presets. Writes per-member outputs and
/// the rate fit under `cfg.dir`. A failing member stops the sweep; the
/// members completed before it stay on disk in `ratefit.csv`.
pub fn run_sweep(cfg: &RunConfig) -> Result<RateFit> {
    cfg.validate()?;
    if cfg.epsilons.len() < 3 {
        return Err(VnsError::Config("a sweep needs at least 3 epsilon values".into()));
    }
    if cfg.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(VnsError::Config("sweep epsilons must be strictly decreasing".into()));
    }
    if cfg.reference == ReferenceModel::None || cfg.reference != cfg.natural_reference() {
        return Err(VnsError::Config(format!(
            "regime {} needs reference {:?}, got {:?}",
            cfg.regime,
            cfg.natural_reference(),
            cfg.reference
        )));
    }
    let reference = match reference_for(cfg) {
        Ok(r) => r,
        Err(e) => {
            let _ = write_error_record(&cfg.dir, &e);
            return Err(e);
        }
    };
    let mut members = Vec::new();
    for (i, &eps) in cfg.epsilons.iter().enumerate() {
        let mut member = cfg.with_epsilon(eps);
        member.dir = member_dir(cfg, i, eps);
        let run = initial_state(&member).and_then(|init| simulate(&member, init, Some(&reference)));
        match run {
            Ok(out) => {
                write_outputs(&member, &out, &member.dir)?;
                members.push(MemberMetrics::from_run(eps, &out));
            }
            Err(e) => {
                let _ = write_error_record(&member.dir, &e);
                write_fit(&cfg.dir, &RateFit::from_members(members))?;
                return Err(e);
            }
        }
    }
    let fit = RateFit::from_members(members);
    write_fit(&cfg.dir, &fit)?;
    Ok(fit)
}

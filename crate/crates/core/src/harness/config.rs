//! Run configuration: `key = value` lines grouped in `[fluid]`,
//! `[kinetic]`, `[sweep]` and `[output]` sections. `#` starts a comment.
//! Unknown sections or keys, repeated keys and malformed values are errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Result, VnsError};
use crate::functionals::W1Method;
use crate::kinetic::ScalingRegime;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VelocityPreset {
    TaylorGreen,
    Shear,
    Modes,
    Zero,
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityPreset {
    Uniform,
    Cosine,
    Bump,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VelocityLaw {
    Monokinetic,
    Maxwellian,
    /// Maxwellian sampled in antithetic pairs.
    PairedMaxwellian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceModel {
    Tns,
    Ins,
    None,
}

/// Shape of the initial particle velocity offset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OffsetProfile {
    /// `(cos x₂, sin x₁, cos x₁)`, divergence-free in 2D.
    Solenoidal,
    /// `∇φ / ρ₀` with `φ = Σ sin x_k`: the offset current `ρ₀ δ ∇φ/ρ₀` is a
    /// gradient, so it leaves the projected fluid momentum unchanged.
    Potential,
}

/// Strang ordering of the fluid (F) and kinetic (K) stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Splitting {
    Fkf,
    Kfk,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    // [fluid]
    pub dim: usize,
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    pub u0: VelocityPreset,
    pub u0_amplitude: f64,
    pub u0_constant: Vec<f64>,
    pub reference: ReferenceModel,
    pub c_star: Option<f64>,
    // [kinetic]
    pub regime: String,
    pub alpha: f64,
    pub epsilon: f64,
    pub particles: usize,
    pub rho0: DensityPreset,
    pub rho0_amplitude: f64,
    pub mass: f64,
    pub velocity: VelocityLaw,
    pub theta: f64,
    pub theta_eps_power: f64,
    pub velocity_offset: f64,
    pub offset_profile: OffsetProfile,
    pub seed: u64,
    pub splitting: Splitting,
    pub smooth_force: bool,
    // [sweep]
    pub epsilons: Vec<f64>,
    pub w1_samples: usize,
    pub w1_method: W1Method,
    // [output]
    pub dir: PathBuf,
    pub cadence: Option<f64>,
    pub higher_r: Vec<f64>,
    pub fine_key: bool,
    pub snapshots: bool,
    pub restart: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            n: 64,
            dt: 1e-3,
            t_final: 1.0,
            u0: VelocityPreset::TaylorGreen,
            u0_amplitude: 1.0,
            u0_constant: Vec::new(),
            reference: ReferenceModel::None,
            c_star: None,
            regime: "light".into(),
            alpha: 0.25,
            epsilon: 0.1,
            particles: 200_000,
            rho0: DensityPreset::Uniform,
            rho0_amplitude: 0.5,
            mass: 1.0,
            velocity: VelocityLaw::Monokinetic,
            theta: 0.0,
            theta_eps_power: 0.0,
            velocity_offset: 0.0,
            offset_profile: OffsetProfile::Solenoidal,
            seed: 1,
            splitting: Splitting::Fkf,
            smooth_force: false,
            epsilons: Vec::new(),
            w1_samples: 0,
            w1_method: W1Method::Auto,
            dir: PathBuf::from("out"),
            cadence: None,
            higher_r: vec![2.0],
            fine_key: false,
            snapshots: true,
            restart: None,
        }
    }
}

fn cfg_err(line: usize, msg: impl std::fmt::Display) -> VnsError {
    VnsError::Config(format!("line {line}: {msg}"))
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| cfg_err(line, format!("{key}: '{v}' is not a finite number")))
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize> {
    let v = v.replace('_', "");
    if let Ok(n) = v.parse::<usize>() {
        return Ok(n);
    }
    // accept integral floats such as 2e5
    match v.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1e15 => Ok(x as usize),
        _ => Err(cfg_err(line, format!("{key}: '{v}' is not a nonnegative integer"))),
    }
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(cfg_err(line, format!("{key}: '{v}' is not a boolean"))),
    }
}

fn parse_list(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse_f64(line, key, s.trim())).collect()
}

fn choice<T: Copy>(line: usize, key: &str, v: &str, options: &[(&str, T)]) -> Result<T> {
    options.iter().find(|(name, _)| *name == v).map(|(_, t)| *t).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        cfg_err(line, format!("{key}: '{v}' is not one of {}", names.join(", ")))
    })
}

const U0_NAMES: [(&str, VelocityPreset); 5] = [
    ("taylor_green", VelocityPreset::TaylorGreen),
    ("shear", VelocityPreset::Shear),
    ("modes", VelocityPreset::Modes),
    ("zero", VelocityPreset::Zero),
    ("constant", VelocityPreset::Constant),
];
const RHO_NAMES: [(&str, DensityPreset); 3] = [
    ("uniform", DensityPreset::Uniform),
    ("cosine", DensityPreset::Cosine),
    ("bump", DensityPreset::Bump),
];
const LAW_NAMES: [(&str, VelocityLaw); 3] = [
    ("monokinetic", VelocityLaw::Monokinetic),
    ("maxwellian", VelocityLaw::Maxwellian),
    ("paired_maxwellian", VelocityLaw::PairedMaxwellian),
];
const REF_NAMES: [(&str, ReferenceModel); 3] =
    [("tns", ReferenceModel::Tns), ("ins", ReferenceModel::Ins), ("none", ReferenceModel::None)];
const OFFSET_NAMES: [(&str, OffsetProfile); 2] =
    [("solenoidal", OffsetProfile::Solenoidal), ("potential", OffsetProfile::Potential)];
const SPLIT_NAMES: [(&str, Splitting); 2] = [("fkf", Splitting::Fkf), ("kfk", Splitting::Kfk)];
const W1_NAMES: [(&str, W1Method); 3] =
    [("auto", W1Method::Auto), ("exact", W1Method::Exact), ("entropic", W1Method::Entropic)];

fn name_of<T: PartialEq + Copy>(options: &[(&'static str, T)], t: T) -> &'static str {
    options.iter().find(|(_, x)| *x == t).map(|(n, _)| *n).unwrap_or("?")
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| VnsError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses and validates a configuration text.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut section: Option<String> = None;
        let mut seen = std::collections::HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| cfg_err(line, "unterminated section header"))?
                    .trim();
                if !["fluid", "kinetic", "sweep", "output"].contains(&name) {
                    return Err(cfg_err(line, format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| cfg_err(line, format!("expected 'key = value', found '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section
                .as_deref()
                .ok_or_else(|| cfg_err(line, format!("key '{key}' appears before any section")))?;
            if !seen.insert(format!("{sec}.{key}")) {
                return Err(cfg_err(line, format!("key '{key}' repeated in [{sec}]")));
            }
            cfg.set(line, sec, key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, line: usize, sec: &str, key: &str, v: &str) -> Result<()> {
        match (sec, key) {
            ("fluid", "dim") => self.dim = parse_usize(line, key, v)?,
            ("fluid", "n") => self.n = parse_usize(line, key, v)?,
            ("fluid", "dt") => self.dt = parse_f64(line, key, v)?,
            ("fluid", "t_final") => self.t_final = parse_f64(line, key, v)?,
            ("fluid", "u0") => self.u0 = choice(line, key, v, &U0_NAMES)?,
            ("fluid", "u0_amplitude") => self.u0_amplitude = parse_f64(line, key, v)?,
            ("fluid", "u0_constant") => self.u0_constant = parse_list(line, key, v)?,
            ("fluid", "reference") => self.reference = choice(line, key, v, &REF_NAMES)?,
            ("fluid", "c_star") => {
                self.c_star = if v == "none" { None } else { Some(parse_f64(line, key, v)?) }
            }
            ("kinetic", "regime") => {
                if !["light", "light_fast", "fine"].contains(&v) {
                    return Err(cfg_err(line, format!("regime: '{v}' is not one of light, light_fast, fine")));
                }
                self.regime = v.to_string();
            }
            ("kinetic", "alpha") => self.alpha = parse_f64(line, key, v)?,
            ("kinetic", "epsilon") => self.epsilon = parse_f64(line, key, v)?,
            ("kinetic", "particles") => self.particles = parse_usize(line, key, v)?,
            ("kinetic", "rho0") => self.rho0 = choice(line, key, v, &RHO_NAMES)?,
            ("kinetic", "rho0_amplitude") => self.rho0_amplitude = parse_f64(line, key, v)?,
            ("kinetic", "mass") => self.mass = parse_f64(line, key, v)?,
            ("kinetic", "velocity") => self.velocity = choice(line, key, v, &LAW_NAMES)?,
            ("kinetic", "theta") => self.theta = parse_f64(line, key, v)?,
            ("kinetic", "theta_eps_power") => self.theta_eps_power = parse_f64(line, key, v)?,
            ("kinetic", "velocity_offset") => self.velocity_offset = parse_f64(line, key, v)?,
            ("kinetic", "offset_profile") => self.offset_profile = choice(line, key, v, &OFFSET_NAMES)?,
            ("kinetic", "seed") => self.seed = parse_usize(line, key, v)? as u64,
            ("kinetic", "splitting") => self.splitting = choice(line, key, v, &SPLIT_NAMES)?,
            ("kinetic", "smooth_force") => self.smooth_force = parse_bool(line, key, v)?,
            ("sweep", "epsilons") => self.epsilons = parse_list(line, key, v)?,
            ("sweep", "w1_samples") => self.w1_samples = parse_usize(line, key, v)?,
            ("sweep", "w1_method") => self.w1_method = choice(line, key, v, &W1_NAMES)?,
            ("output", "dir") => self.dir = PathBuf::from(v),
            ("output", "cadence") => {
                self.cadence = if v == "auto" { None } else { Some(parse_f64(line, key, v)?) }
            }
            ("output", "higher_r") => self.higher_r = parse_list(line, key, v)?,
            ("output", "fine_key") => self.fine_key = parse_bool(line, key, v)?,
            ("output", "snapshots") => self.snapshots = parse_bool(line, key, v)?,
            ("output", "restart") => {
                self.restart = if v == "none" { None } else { Some(PathBuf::from(v)) }
            }
            _ => return Err(cfg_err(line, format!("unknown key '{key}' in [{sec}]"))),
        }
        Ok(())
    }

    /// Checks every field; called by [`parse`](Self::parse) and before runs.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(VnsError::Config(m));
        if !(self.dim == 2 || self.dim == 3) {
            return bad(format!("dim = {} must be 2 or 3", self.dim));
        }
        if self.n < 8 || !self.n.is_power_of_two() {
            return bad(format!("n = {} must be a power of two, at least 8", self.n));
        }
        if !(self.dt > 0.0) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_final >= 0.0) {
            return bad(format!("t_final = {} must be nonnegative", self.t_final));
        }
        if self.u0 == VelocityPreset::Constant && self.u0_constant.len() != self.dim {
            return bad(format!("u0_constant needs {} components", self.dim));
        }
        if let Some(c) = self.c_star {
            if !(c > 0.0 && c < 1.0) {
                return bad(format!("c_star = {c} must lie in (0, 1)"));
            }
        }
        ScalingRegime::by_name(&self.regime, self.epsilon, self.alpha)
            .map_err(|e| VnsError::Config(e.to_string()))?;
        if !(self.rho0_amplitude >= 0.0 && self.rho0_amplitude <= 1.0) && self.rho0 != DensityPreset::Uniform {
            return bad(format!("rho0_amplitude = {} must lie in [0, 1]", self.rho0_amplitude));
        }
        if !(self.mass >= 0.0) {
            return bad(format!("mass = {} must be nonnegative", self.mass));
        }
        if !(self.theta >= 0.0) {
            return bad(format!("theta = {} must be nonnegative", self.theta));
        }
        if self.higher_r.iter().any(|&r| !(r >= 2.0)) {
            return bad("every higher_r exponent must be at least 2".into());
        }
        if let Some(c) = self.cadence {
            if !(c > 0.0) {
                return bad(format!("cadence = {c} must be positive"));
            }
        }
        for &e in &self.epsilons {
            ScalingRegime::by_name(&self.regime, e, self.alpha)
                .map_err(|err| VnsError::Config(format!("sweep epsilon: {err}")))?;
        }
        if self.restart.is_some() && self.reference != ReferenceModel::None {
            return bad("restarted runs cannot carry a reference model".into());
        }
        Ok(())
    }

    pub fn scaling(&self) -> Result<ScalingRegime> {
        ScalingRegime::by_name(&self.regime, self.epsilon, self.alpha)
    }

    /// Copy with another ε.
    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..self.clone() }
    }

    /// Initial temperature `θ ε^power`.
    pub fn effective_theta(&self) -> f64 {
        self.theta * self.epsilon.powf(self.theta_eps_power)
    }

    /// Steps between diagnostic samples: `max(dt, T/200)` unless `cadence`
    /// is set.
    pub fn cadence_steps(&self) -> usize {
        let c = self.cadence.unwrap_or((self.t_final / 200.0).max(self.dt));
        ((c / self.dt).round() as usize).max(1)
    }

    /// The matching limit model for the regime.
    pub fn natural_reference(&self) -> ReferenceModel {
        if self.regime == "fine" {
            ReferenceModel::Ins
        } else {
            ReferenceModel::Tns
        }
    }

    /// Configuration text that parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let o = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_else(|| "none".into());
        let _ = writeln!(s, "[fluid]");
        let _ = writeln!(s, "dim = {}\nn = {}\ndt = {}\nt_final = {}", self.dim, self.n, self.dt, self.t_final);
        let _ = writeln!(s, "u0 = {}\nu0_amplitude = {}", name_of(&U0_NAMES, self.u0), self.u0_amplitude);
        if !self.u0_constant.is_empty() {
            let _ = writeln!(s, "u0_constant = {}", fmt_list(&self.u0_constant));
        }
        let _ = writeln!(s, "reference = {}\nc_star = {}", name_of(&REF_NAMES, self.reference), o(self.c_star));
        let _ = writeln!(s, "\n[kinetic]");
        let _ = writeln!(s, "regime = {}\nalpha = {}\nepsilon = {}", self.regime, self.alpha, self.epsilon);
        let _ = writeln!(s, "particles = {}\nrho0 = {}", self.particles, name_of(&RHO_NAMES, self.rho0));
        let _ = writeln!(s, "rho0_amplitude = {}\nmass = {}", self.rho0_amplitude, self.mass);
        let _ = writeln!(s, "velocity = {}\ntheta = {}", name_of(&LAW_NAMES, self.velocity), self.theta);
        let _ = writeln!(s, "theta_eps_power = {}\nvelocity_offset = {}", self.theta_eps_power, self.velocity_offset);
        let _ = writeln!(s, "offset_profile = {}", name_of(&OFFSET_NAMES, self.offset_profile));
        let _ = writeln!(s, "seed = {}\nsplitting = {}", self.seed, name_of(&SPLIT_NAMES, self.splitting));
        let _ = writeln!(s, "smooth_force = {}", self.smooth_force);
        let _ = writeln!(s, "\n[sweep]");
        let _ = writeln!(s, "epsilons = {}\nw1_samples = {}", fmt_list(&self.epsilons), self.w1_samples);
        let _ = writeln!(s, "w1_method = {}", name_of(&W1_NAMES, self.w1_method));
        let _ = writeln!(s, "\n[output]");
        let _ = writeln!(s, "dir = {}\ncadence = {}", self.dir.display(), o(self.cadence).replace("none", "auto"));
        let _ = writeln!(s, "higher_r = {}\nfine_key = {}", fmt_list(&self.higher_r), self.fine_key);
        let _ = writeln!(s, "snapshots = {}", self.snapshots);
        let restart = self.restart.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "none".into());
        let _ = writeln!(s, "restart = {restart}");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig { epsilons: vec![0.1, 0.05], c_star: Some(0.5), ..Default::default() };
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn unknown_key_is_config_error() {
        let e = RunConfig::parse("[fluid]\nnn = 3\n").unwrap_err();
        assert!(e.is_config());
        assert!(RunConfig::parse("dt = 1e-3").unwrap_err().is_config());
        assert!(RunConfig::parse("[solver]\n").unwrap_err().is_config());
        assert!(RunConfig::parse("[fluid]\ndt = 1\ndt = 2\n").unwrap_err().is_config());
    }
}

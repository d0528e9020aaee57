//! Diagnostic time series and its CSV form.
//!
//! Column order: `t, energy, dissipation, dissipation_integral,
//! modulated_energy, lambda_bound, rel_entropy, entropy_term_1..4,
//! concentration_l2, concentration_l1, brinkman_l2, rho_linf, accum_grad,
//! accum_f_l2, accum_heat, strong_grad_ok, small_data_ok, momentum_1..3`,
//! then one `higher_dissipation_r<r>` column per configured exponent.
//! Absent values (no reference model, no `C*`) are written as empty cells;
//! flags are `1` or `0`.

use std::io::Write;

use crate::error::Result;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
    /// Trapezoid value of `∫_0^t D`, accumulated every step.
    pub dissipation_integral: f64,
    pub modulated_energy: f64,
    pub lambda_bound: f64,
    pub rel_entropy: Option<f64>,
    /// `I₁..I₄` (fine) or `J₁..J₄` (light regimes).
    pub entropy_terms: Option<[f64; 4]>,
    /// `Σ w |v/σ - u|²`.
    pub concentration_l2: f64,
    /// `Σ w |v/σ - u|`.
    pub concentration_l1: f64,
    pub brinkman_l2: f64,
    pub rho_linf: f64,
    pub accum_grad: f64,
    pub accum_f_l2: f64,
    pub accum_heat: f64,
    pub strong_grad_ok: bool,
    pub small_data_ok: Option<bool>,
    /// `⟨(ε/γ) j + u⟩`.
    pub momentum: [f64; 3],
    /// `(r, D^(r))` pairs.
    pub higher: Vec<(f64, f64)>,
}

const BASE_COLUMNS: [&str; 23] = [
    "t",
    "energy",
    "dissipation",
    "dissipation_integral",
    "modulated_energy",
    "lambda_bound",
    "rel_entropy",
    "entropy_term_1",
    "entropy_term_2",
    "entropy_term_3",
    "entropy_term_4",
    "concentration_l2",
    "concentration_l1",
    "brinkman_l2",
    "rho_linf",
    "accum_grad",
    "accum_f_l2",
    "accum_heat",
    "strong_grad_ok",
    "small_data_ok",
    "momentum_1",
    "momentum_2",
    "momentum_3",
];

fn fmt_r(r: f64) -> String {
    if r.fract() == 0.0 {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

/// Header for records carrying the exponents `rs`.
pub fn csv_header(rs: &[f64]) -> String {
    let mut cols: Vec<String> = BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
    cols.extend(rs.iter().map(|r| format!("higher_dissipation_r{}", fmt_r(*r))));
    cols.join(",")
}

fn num(x: f64) -> String {
    format!("{x:.17e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl DiagnosticRecord {
    pub fn csv_row(&self) -> String {
        let terms = self.entropy_terms;
        let mut cells = vec![
            num(self.t),
            num(self.energy),
            num(self.dissipation),
            num(self.dissipation_integral),
            num(self.modulated_energy),
            num(self.lambda_bound),
            opt(self.rel_entropy),
        ];
        for k in 0..4 {
            cells.push(opt(terms.map(|t| t[k])));
        }
        cells.extend([
            num(self.concentration_l2),
            num(self.concentration_l1),
            num(self.brinkman_l2),
            num(self.rho_linf),
            num(self.accum_grad),
            num(self.accum_f_l2),
            num(self.accum_heat),
            (self.strong_grad_ok as u8).to_string(),
            self.small_data_ok.map(|b| (b as u8).to_string()).unwrap_or_default(),
            num(self.momentum[0]),
            num(self.momentum[1]),
            num(self.momentum[2]),
        ]);
        cells.extend(self.higher.iter().map(|(_, v)| num(*v)));
        cells.join(",")
    }

    /// True when every numeric entry is finite and the nonnegative ones
    /// are nonnegative.
    pub fn is_valid(&self) -> bool {
        let nonneg = [
            self.energy,
            self.dissipation,
            self.modulated_energy,
            self.concentration_l2,
            self.concentration_l1,
            self.brinkman_l2,
            self.rho_linf,
        ];
        let finite = nonneg.iter().chain(&[self.t, self.lambda_bound]).all(|x| x.is_finite())
            && self.momentum.iter().all(|x| x.is_finite())
            && self.higher.iter().all(|(_, v)| v.is_finite() && *v >= 0.0)
            && self.rel_entropy.is_none_or(|h| h.is_finite() && h >= 0.0)
            && self.entropy_terms.is_none_or(|t| t.iter().all(|x| x.is_finite()));
        finite && nonneg.iter().all(|&x| x >= 0.0)
    }
}

/// Writes header and rows.
pub fn write_csv(w: &mut impl Write, records: &[DiagnosticRecord], rs: &[f64]) -> Result<()> {
    writeln!(w, "{}", csv_header(rs))?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_row_have_matching_widths() {
        let rec = DiagnosticRecord { higher: vec![(2.0, 0.5), (4.0, 0.1)], ..Default::default() };
        let h = csv_header(&[2.0, 4.0]);
        assert!(h.ends_with("higher_dissipation_r2,higher_dissipation_r4"));
        assert_eq!(h.split(',').count(), rec.csv_row().split(',').count());
        assert!(rec.is_valid());
    }
}

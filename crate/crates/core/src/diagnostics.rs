//! Discrete energies, the Nehari functional `⟨δE(u), u⟩`, fiber maps
//! `Φ_u(s) = Ẽ(su)`, the bifurcation threshold and equilibrium labels.
//!
//! All integrals use trapezoidal node weights for the potential and
//! edge differences for the gradient, so that
//! `Σ_edges (Δ_e u)(Δ_e v) = -Σ v (Δ_h u) h²` holds exactly for fields with
//! zero boundary.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GridGeometry, ScalarField};
use crate::potential::{w_prime_raw, w_raw, ModifiedPotential, PotentialParams, GUARD_EPS};

/// Default `max |u|` below which an equilibrium counts as trivial.
pub const DEFAULT_TRIVIAL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `κ/2 ∫|∇u|²`
    pub gradient_part: f64,
    /// `∫ W(u)`
    pub potential_part: f64,
    pub total: f64,
    /// `∫ κ/2 |∇u|² + W̃(u)`, when a modified potential was supplied.
    pub modified_total: Option<f64>,
}

/// Discrete `E(u)` and, optionally, `Ẽ(u)`.
pub fn energy(
    u: &ScalarField,
    kappa: f64,
    params: &PotentialParams,
    modified: Option<&ModifiedPotential>,
) -> Result<EnergyReport> {
    if let Some(&v) = u.values().iter().find(|v| v.abs() > 1.0) {
        return Err(Error::Domain { what: "W", u: v });
    }
    let gradient_part = 0.5 * kappa * u.edge_gradient_sum();
    let theta = params.theta();
    let potential_part = u.integrate(|v| w_raw(theta, v));
    let modified_total = modified.map(|m| gradient_part + u.integrate(|v| m.value(v)));
    Ok(EnergyReport {
        gradient_part,
        potential_part,
        total: gradient_part + potential_part,
        modified_total,
    })
}

/// `Ẽ(u)`; defined for every field.
pub fn modified_energy(u: &ScalarField, kappa: f64, m: &ModifiedPotential) -> f64 {
    0.5 * kappa * u.edge_gradient_sum() + u.integrate(|v| m.value(v))
}

fn check_guard(u: &ScalarField) -> Result<()> {
    match u.values().iter().find(|v| v.abs() >= 1.0 - GUARD_EPS) {
        Some(&v) => Err(Error::Domain { what: "W'", u: v }),
        None => Ok(()),
    }
}

/// `⟨δE(u), u⟩ = κ ∫|∇u|² + ∫ W'(u) u`.
pub fn nehari_residual(u: &ScalarField, kappa: f64, params: &PotentialParams) -> Result<f64> {
    check_guard(u)?;
    let theta = params.theta();
    Ok(kappa * u.edge_gradient_sum() + u.integrate(|v| w_prime_raw(theta, v) * v))
}

/// `κ ∫|∇u|² + ∫ |W'(u) u|`, the scale against which the Nehari residual is
/// judged to be small.
pub fn nehari_scale(u: &ScalarField, kappa: f64, params: &PotentialParams) -> Result<f64> {
    check_guard(u)?;
    let theta = params.theta();
    Ok(kappa * u.edge_gradient_sum() + u.integrate(|v| (w_prime_raw(theta, v) * v).abs()))
}

/// `‖κ Δ_h u - W'(u)‖_∞` over interior nodes.
pub fn flow_residual(u: &ScalarField, kappa: f64, params: &PotentialParams) -> Result<f64> {
    check_guard(u)?;
    let lap = u.laplacian();
    let g = u.geometry();
    let theta = params.theta();
    let mut r = 0.0f64;
    for j in 1..g.cells() {
        for i in 1..g.cells() {
            let v = u.get(i, j);
            r = r.max((kappa * lap.get(i, j) - w_prime_raw(theta, v)).abs());
        }
    }
    Ok(r)
}

/// Samples of the fiber map `Φ_u(s) = Ẽ(su)` and its derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiScan {
    pub s_values: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    /// First consecutive pair of samples where `Φ'` changes sign.
    pub sign_change: Option<(f64, f64)>,
}

impl PhiScan {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "phi", "dphi"])?;
        for ((s, p), d) in self.s_values.iter().zip(&self.phi).zip(&self.dphi) {
            w.write_record([format!("{s:?}"), format!("{p:?}"), format!("{d:?}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `Φ'_u(s) = κ s ∫|∇u|² + ∫ W̃'(su) u`.
pub fn phi_prime(u: &ScalarField, kappa: f64, m: &ModifiedPotential, s: f64) -> f64 {
    kappa * s * u.edge_gradient_sum() + u.integrate(|v| m.derivative(s * v) * v)
}

/// `κ s ∫|∇u|² + ∫ |W̃'(su) u|`, the scale for judging [`phi_prime`] small.
pub fn phi_prime_scale(u: &ScalarField, kappa: f64, m: &ModifiedPotential, s: f64) -> f64 {
    kappa * s * u.edge_gradient_sum() + u.integrate(|v| (m.derivative(s * v) * v).abs())
}

pub fn phi_scan(
    u: &ScalarField,
    kappa: f64,
    m: &ModifiedPotential,
    s_grid: &[f64],
) -> Result<PhiScan> {
    if let Some(&s) = s_grid.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(Error::invalid("s", s, "scan points must be finite and nonnegative"));
    }
    let grad = u.edge_gradient_sum();
    let mut phi = Vec::with_capacity(s_grid.len());
    let mut dphi = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        phi.push(0.5 * kappa * s * s * grad + u.integrate(|v| m.value(s * v)));
        dphi.push(kappa * s * grad + u.integrate(|v| m.derivative(s * v) * v));
    }
    let sign_change = dphi
        .windows(2)
        .position(|w| w[0] * w[1] < 0.0)
        .map(|k| (s_grid[k], s_grid[k + 1]));
    Ok(PhiScan {
        s_values: s_grid.to_vec(),
        phi,
        dphi,
        sign_change,
    })
}

/// Bifurcation threshold `κ_c = (1-θ)/λ₁`.
pub fn kappa_c(theta: f64, lambda1: f64) -> Result<f64> {
    PotentialParams::new(theta)?;
    if !(lambda1 > 0.0) {
        return Err(Error::invalid("lambda1", lambda1, "must be positive"));
    }
    Ok((1.0 - theta) / lambda1)
}

/// Amplitude beyond which `Φ'_{φ₁}(s) > 0`, from the cubic lower bound on
/// `W̃'` and `∫φ₁² = L²/4`, `∫φ₁⁴ = 9L²/64`:
/// `s > 4 √((1-θ-κλ₁)/(3θ))`.
pub fn s_phi_bound(theta: f64, kappa: f64, g: &GridGeometry) -> Result<f64> {
    let lambda1 = g.continuum_lambda1();
    let kc = kappa_c(theta, lambda1)?;
    if !(kappa > 0.0) {
        return Err(Error::invalid("kappa", kappa, "must be positive"));
    }
    if kappa >= kc {
        return Err(Error::invalid(
            "kappa",
            kappa,
            "bound exists only below the threshold (1-theta)/lambda1",
        ));
    }
    let l2 = g.area();
    let (int2, int4) = (l2 / 4.0, 9.0 * l2 / 64.0);
    Ok((3.0 * (1.0 - theta - kappa * lambda1) * int2 / (theta * int4)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Trivial,
    NontrivialPositive,
    NontrivialNegative,
    MixedSign,
}

impl Classification {
    pub fn is_trivial(self) -> bool {
        self == Classification::Trivial
    }

    /// Label of the negated field.
    pub fn negated(self) -> Self {
        match self {
            Classification::NontrivialPositive => Classification::NontrivialNegative,
            Classification::NontrivialNegative => Classification::NontrivialPositive,
            other => other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Trivial => "trivial",
            Classification::NontrivialPositive => "nontrivial-positive",
            Classification::NontrivialNegative => "nontrivial-negative",
            Classification::MixedSign => "mixed-sign",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Classification {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "trivial" => Classification::Trivial,
            "nontrivial-positive" => Classification::NontrivialPositive,
            "nontrivial-negative" => Classification::NontrivialNegative,
            "mixed-sign" => Classification::MixedSign,
            _ => return Err(Error::Parse(format!("unknown classification `{s}`"))),
        })
    }
}

pub fn classify(max_u: f64, min_u: f64, trivial_tol: f64) -> Classification {
    if max_u.abs().max(min_u.abs()) < trivial_tol {
        Classification::Trivial
    } else if min_u > -trivial_tol {
        Classification::NontrivialPositive
    } else if max_u < trivial_tol {
        Classification::NontrivialNegative
    } else {
        Classification::MixedSign
    }
}

pub fn classify_field(u: &ScalarField, trivial_tol: f64) -> Classification {
    classify(u.max(), u.min(), trivial_tol)
}

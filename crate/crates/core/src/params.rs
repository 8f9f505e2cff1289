//! κ-dependent parameters: central charge, boundary weights, Kac weights and
//! the Potts/random-cluster Q.
//!
//! The one-leg weight is always taken from its κ form `(6 − κ)/2κ`. The
//! central-charge form has a sign ambiguity that depends on the phase, so it is
//! only used as a cross-check ([`one_leg_weight_from_c`]).

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// SLE speed κ, restricted to the open window (0, 8).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Kappa(f64);

impl Kappa {
    pub fn new(kappa: f64) -> Result<Self> {
        if kappa.is_finite() && kappa > 0.0 && kappa < 8.0 {
            Ok(Self(kappa))
        } else {
            Err(Error::Domain(format!("kappa must lie in (0, 8), got {kappa}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Exponent 1 − 6/κ of the identity channel (and of S₁).
    pub fn identity_power(self) -> f64 {
        1.0 - 6.0 / self.0
    }

    /// Exponent 2/κ of the two-leg channel.
    pub fn two_leg_power(self) -> f64 {
        2.0 / self.0
    }

    /// True when 8/κ is a positive integer, where the two fusion exponents
    /// differ by an integer and logarithmic terms can appear.
    pub fn is_logarithmic(self) -> bool {
        let r = 8.0 / self.0;
        (r - r.round()).abs() < 1e-9
    }
}

impl TryFrom<f64> for Kappa {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Kappa> for f64 {
    fn from(k: Kappa) -> f64 {
        k.0
    }
}

impl fmt::Display for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Kac table index (r, s), both at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KacIndex {
    r: u32,
    s: u32,
}

impl KacIndex {
    pub fn new(r: u32, s: u32) -> Result<Self> {
        if r >= 1 && s >= 1 {
            Ok(Self { r, s })
        } else {
            Err(Error::Parameter(format!(
                "Kac indices must be positive, got ({r}, {s})"
            )))
        }
    }

    pub fn r(self) -> u32 {
        self.r
    }

    pub fn s(self) -> u32 {
        self.s
    }
}

/// Which branch of the κ ↔ Q relation applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Random-cluster (FK) boundaries, 4 ≤ κ < 8.
    Dense,
    /// Potts spin-cluster boundaries, 0 < κ ≤ 4.
    Dilute,
}

impl Phase {
    /// The phase a κ value belongs to; κ = 4 counts as dilute.
    pub fn of(kappa: Kappa) -> Self {
        if kappa.value() <= 4.0 {
            Phase::Dilute
        } else {
            Phase::Dense
        }
    }
}

/// c(κ) = (6 − κ)(3κ − 8)/(2κ).
pub fn central_charge(kappa: Kappa) -> f64 {
    let k = kappa.value();
    (6.0 - k) * (3.0 * k - 8.0) / (2.0 * k)
}

/// θ₁ = (6 − κ)/(2κ).
pub fn one_leg_weight(kappa: Kappa) -> f64 {
    let k = kappa.value();
    (6.0 - k) / (2.0 * k)
}

/// θ_s = s(2s + 4 − κ)/(2κ); `s = 0` is the identity weight 0.
pub fn s_leg_weight(s: i64, kappa: Kappa) -> Result<f64> {
    if s < 0 {
        return Err(Error::Parameter(format!(
            "number of legs must be nonnegative, got {s}"
        )));
    }
    let (s, k) = (s as f64, kappa.value());
    Ok(s * (2.0 * s + 4.0 - k) / (2.0 * k))
}

/// Kac weight h_{r,s}(κ) in its piecewise κ form.
pub fn kac_weight(idx: KacIndex, kappa: Kappa) -> f64 {
    let k = kappa.value();
    let (r, s) = (idx.r as f64, idx.s as f64);
    let lead = if k > 4.0 {
        k * r - 4.0 * s
    } else {
        k * s - 4.0 * r
    };
    (lead * lead - (k - 4.0) * (k - 4.0)) / (16.0 * k)
}

/// Potts Q from κ: 4cos²(4π/κ) in the dense phase, 4cos²(πκ/4) in the dilute one.
pub fn potts_q(kappa: Kappa, phase: Phase) -> Result<f64> {
    let k = kappa.value();
    match phase {
        Phase::Dense if k >= 4.0 => Ok(4.0 * (4.0 * PI / k).cos().powi(2)),
        Phase::Dilute if k <= 4.0 => Ok(4.0 * (PI * k / 4.0).cos().powi(2)),
        _ => Err(Error::Domain(format!(
            "kappa = {k} is outside the {phase:?} window"
        ))),
    }
}

/// θ₁ recovered from the central charge, picking the root that matches the phase
/// of κ (− for dense, + for dilute). Only used to cross-check [`one_leg_weight`].
pub fn one_leg_weight_from_c(kappa: Kappa) -> f64 {
    let c = central_charge(kappa);
    let disc = ((c - 1.0) * (c - 25.0)).max(0.0).sqrt();
    match Phase::of(kappa) {
        Phase::Dense => (5.0 - c - disc) / 16.0,
        Phase::Dilute => (5.0 - c + disc) / 16.0,
    }
}

/// Every parameter tabulated for one κ, as printed by the `params` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub kappa: f64,
    pub central_charge: f64,
    pub theta_1: f64,
    /// θ_s for s = 0..=4.
    pub theta_s: Vec<f64>,
    /// h_{r,s} for r, s in 1..=3, row-major in r.
    pub kac: Vec<KacEntry>,
    pub potts_q_dense: Option<f64>,
    pub potts_q_dilute: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KacEntry {
    pub r: u32,
    pub s: u32,
    pub h: f64,
}

impl ParamsRecord {
    pub fn new(kappa: Kappa) -> Self {
        let theta_s = (0..=4)
            .map(|s| s_leg_weight(s, kappa).expect("s is nonnegative"))
            .collect();
        let mut kac = Vec::with_capacity(9);
        for r in 1..=3 {
            for s in 1..=3 {
                let idx = KacIndex::new(r, s).expect("indices are positive");
                kac.push(KacEntry {
                    r,
                    s,
                    h: kac_weight(idx, kappa),
                });
            }
        }
        Self {
            kappa: kappa.value(),
            central_charge: central_charge(kappa),
            theta_1: one_leg_weight(kappa),
            theta_s,
            kac,
            potts_q_dense: potts_q(kappa, Phase::Dense).ok(),
            potts_q_dilute: potts_q(kappa, Phase::Dilute).ok(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(v: f64) -> Kappa {
        Kappa::new(v).unwrap()
    }

    #[test]
    fn kappa_window() {
        assert!(Kappa::new(0.0).is_err());
        assert!(Kappa::new(8.0).is_err());
        assert!(Kappa::new(f64::NAN).is_err());
        assert!(Kappa::new(7.999).is_ok());
    }

    #[test]
    fn central_charge_values() {
        assert_eq!(central_charge(k(6.0)), 0.0);
        assert!((central_charge(k(2.0)) + 2.0).abs() < 1e-15);
        assert!((central_charge(k(16.0 / 3.0)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn one_leg_values() {
        assert_eq!(one_leg_weight(k(6.0)), 0.0);
        assert_eq!(one_leg_weight(k(4.0)), 0.25);
        let kk = k(8.0 / 3.0);
        assert!((one_leg_weight(kk) - 0.625).abs() < 1e-15);
        assert!((kac_weight(KacIndex::new(2, 1).unwrap(), kk) - 0.625).abs() < 1e-15);
    }

    #[test]
    fn s_leg_values() {
        assert_eq!(s_leg_weight(0, k(3.0)).unwrap(), 0.0);
        assert!((s_leg_weight(1, k(3.7)).unwrap() - one_leg_weight(k(3.7))).abs() < 1e-15);
        assert!((s_leg_weight(2, k(6.0)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(s_leg_weight(-1, k(6.0)), Err(Error::Parameter(_))));
    }

    #[test]
    fn kac_values() {
        let idx = |r, s| KacIndex::new(r, s).unwrap();
        assert!(kac_weight(idx(1, 2), k(6.0)).abs() < 1e-15);
        assert!((kac_weight(idx(2, 1), k(3.0)) - 0.5).abs() < 1e-15);
        assert!((kac_weight(idx(1, 3), k(6.0)) - 1.0 / 3.0).abs() < 1e-15);
        assert!(KacIndex::new(0, 1).is_err());
    }

    #[test]
    fn potts_values() {
        assert!((potts_q(k(3.0), Phase::Dilute).unwrap() - 2.0).abs() < 1e-14);
        assert!((potts_q(k(16.0 / 3.0), Phase::Dense).unwrap() - 2.0).abs() < 1e-14);
        assert!((potts_q(k(4.0), Phase::Dense).unwrap() - 4.0).abs() < 1e-14);
        assert!((potts_q(k(4.0), Phase::Dilute).unwrap() - 4.0).abs() < 1e-14);
        assert!(potts_q(k(3.0), Phase::Dense).is_err());
        assert!(potts_q(k(6.0), Phase::Dilute).is_err());
        assert_eq!(Phase::of(k(4.0)), Phase::Dilute);
    }

    #[test]
    fn theta_from_central_charge_agrees() {
        for kv in [1.0, 2.0, 8.0 / 3.0, 3.0, 4.5, 6.0, 7.5] {
            let kk = k(kv);
            assert!(
                (one_leg_weight_from_c(kk) - one_leg_weight(kk)).abs() < 1e-12,
                "kappa = {kv}"
            );
        }
    }

    #[test]
    fn record_has_expected_shape() {
        let rec = ParamsRecord::new(k(6.0));
        assert_eq!(rec.theta_s.len(), 5);
        assert_eq!(rec.kac.len(), 9);
        assert!(rec.potts_q_dilute.is_none());
        assert!((rec.potts_q_dense.unwrap() - 1.0).abs() < 1e-14);
    }
}

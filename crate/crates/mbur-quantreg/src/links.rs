//! Quantile link functions and the per-observation shape mapping.
//!
//! A link carries the modeled quantile m in (0,1) to the linear-predictor
//! scale and back. The regression then converts the linear predictor phi into
//! the MBUR shape through alpha^2 = ln(m) / ln(c(u)). All three links are
//! evaluated in stable log form (softplus / log1p / expm1): the naive
//! compositions underflow around |phi| = 37 and the optimizer probes such
//! points routinely.

use crate::error::{Error, Result};
use crate::mbur::QuantileLevel;

/// The three supported quantile links. The lowercase names are the canonical
/// CLI and file tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkKind {
    Logit,
    Cloglog,
    Loglog,
}

impl LinkKind {
    pub const ALL: [LinkKind; 3] = [LinkKind::Logit, LinkKind::Cloglog, LinkKind::Loglog];

    pub fn name(&self) -> &'static str {
        match self {
            LinkKind::Logit => "logit",
            LinkKind::Cloglog => "cloglog",
            LinkKind::Loglog => "loglog",
        }
    }
}

impl std::fmt::Display for LinkKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LinkKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logit" => Ok(LinkKind::Logit),
            "cloglog" => Ok(LinkKind::Cloglog),
            "loglog" => Ok(LinkKind::Loglog),
            other => Err(Error::Domain(format!(
                "unknown link '{other}' (expected logit, cloglog or loglog)"
            ))),
        }
    }
}

/// ln(1 + e^x) without overflow.
fn softplus(x: f64) -> f64 {
    if x > 35.0 {
        x
    } else if x < -35.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// Maps the linear predictor to the modeled quantile in (0,1).
pub fn inv_link(kind: LinkKind, phi: f64) -> f64 {
    match kind {
        LinkKind::Logit => 1.0 / (1.0 + (-phi).exp()),
        LinkKind::Cloglog => -f64::exp_m1(-phi.exp()),
        LinkKind::Loglog => (-phi.exp()).exp(),
    }
}

/// Maps a quantile in the open unit interval to the linear-predictor scale.
pub fn link(kind: LinkKind, m: f64) -> Result<f64> {
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::Domain(format!("link: m = {m} outside (0,1)")));
    }
    Ok(match kind {
        LinkKind::Logit => (m / (1.0 - m)).ln(),
        LinkKind::Cloglog => (-(1.0 - m).ln()).ln(),
        LinkKind::Loglog => (-m.ln()).ln(),
    })
}

/// ln of the modeled quantile as a function of phi, in stable log form.
pub fn ln_inv_link(kind: LinkKind, phi: f64) -> f64 {
    match kind {
        // ln mu = phi - ln(1 + e^phi)
        LinkKind::Logit => -softplus(-phi),
        // ln mu = log1p(-exp(-exp(phi)))
        LinkKind::Cloglog => f64::ln_1p(-(-phi.exp()).exp()),
        // ln mu = -e^phi
        LinkKind::Loglog => -phi.exp(),
    }
}

/// The MBUR shape implied by the linear predictor at quantile level `level`:
/// alpha^2 = ln(inv_link(phi)) / ln(c).
///
/// Fails when e^phi overflows or when the shape underflows to zero; every
/// `Ok` value is strictly positive.
pub fn alpha_sq_from_phi(kind: LinkKind, phi: f64, level: &QuantileLevel) -> Result<f64> {
    if !phi.is_finite() {
        return Err(Error::Domain(format!("alpha_sq_from_phi: phi = {phi}")));
    }
    if matches!(kind, LinkKind::Cloglog | LinkKind::Loglog) && phi > 700.0 {
        return Err(Error::Overflow { phi });
    }
    let alpha_sq = ln_inv_link(kind, phi) / level.ln_c();
    if !(alpha_sq > 0.0) || !alpha_sq.is_finite() {
        return Err(Error::Domain(format!(
            "alpha_sq_from_phi: shape {alpha_sq} not positive at phi = {phi}"
        )));
    }
    Ok(alpha_sq)
}

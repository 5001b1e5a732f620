//! The fundamental domains `Ω` and `Υ`, band indices and the dyadic labelling of
//! band components.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicString;
use crate::dynamics::{HenonParameter, PhasePoint, DEFAULT_ESCAPE_RADIUS};
use crate::error::{HenonError, Result};
use crate::potentials::{
    backward_potential, forward_potential, green_1d, preimage_table, u_c, EscapeControl, PotentialStatus, PreimageTable,
};

/// Largest `|a|` treated as perturbative by default.
pub const DEFAULT_DELTA: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainConfig {
    pub r: f64,
    pub y_bound: f64,
    pub eps: f64,
    pub escape_radius: f64,
    #[serde(rename = "maxIter")]
    pub max_iter: usize,
    pub tol_res: f64,
    #[serde(rename = "maxDepth")]
    pub max_depth: usize,
}

impl DomainConfig {
    pub fn escape_control(&self) -> EscapeControl {
        EscapeControl { escape_radius: self.escape_radius, max_iter: self.max_iter }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HenonError::InvalidArgument(m.to_string()));
        if !(self.r > 0.0) {
            return bad("r must be positive");
        }
        if !(self.eps > 0.0 && self.eps <= self.y_bound) {
            return bad("need 0 < eps <= y_bound");
        }
        if self.max_depth < 1 {
            return bad("maxDepth must be at least 1");
        }
        if !(self.escape_radius > 0.0) || self.max_iter == 0 {
            return bad("escape_radius and maxIter must be positive");
        }
        if !(self.tol_res > 0.0) {
            return bad("tol_res must be positive");
        }
        Ok(())
    }

    /// The level `r/2ⁿ`.
    pub fn level(&self, n: usize) -> f64 {
        self.r / (n as f64).exp2()
    }
}

/// Field-by-field replacements for [`choose_domain_config`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DomainOverrides {
    pub r: Option<f64>,
    pub y_bound: Option<f64>,
    pub eps: Option<f64>,
    pub escape_radius: Option<f64>,
    #[serde(rename = "maxIter")]
    pub max_iter: Option<usize>,
    pub tol_res: Option<f64>,
    #[serde(rename = "maxDepth")]
    pub max_depth: Option<usize>,
}

/// Defaults `r = 1.5·G_{p_c}(0)`, `y_bound = (1 + √(1 + 4|c|))/2 + 1`, `eps = y_bound`.
pub fn choose_domain_config(c: Complex64, overrides: &DomainOverrides) -> Result<DomainConfig> {
    let ctl = EscapeControl {
        escape_radius: overrides.escape_radius.unwrap_or(DEFAULT_ESCAPE_RADIUS),
        max_iter: overrides.max_iter.unwrap_or(500),
    };
    let g0 = green_1d(Complex64::new(0.0, 0.0), c, 1e-14, &ctl)?;
    if !g0.is_escaping() {
        return Err(HenonError::RegimeViolation(format!("Julia set of z²{c:+} is connected")));
    }
    let y_bound = (1.0 + (1.0 + 4.0 * c.norm()).sqrt()) / 2.0 + 1.0;
    let cfg = DomainConfig {
        r: overrides.r.unwrap_or(1.5 * g0.value),
        y_bound: overrides.y_bound.unwrap_or(y_bound),
        eps: overrides.eps.unwrap_or(overrides.y_bound.unwrap_or(y_bound)),
        escape_radius: ctl.escape_radius,
        max_iter: ctl.max_iter,
        tol_res: overrides.tol_res.unwrap_or(1e-9),
        max_depth: overrides.max_depth.unwrap_or(4),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// `G_{p_c}(0) > 0` and `|a| < delta`.
pub fn is_perturbative(lambda: &HenonParameter, delta: f64, ctl: &EscapeControl) -> bool {
    lambda.a.norm() < delta
        && green_1d(Complex64::new(0.0, 0.0), lambda.c, 1e-14, ctl).map(|g| g.is_escaping()).unwrap_or(false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PlusClass {
    UPlus,
    KPlusLikely,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MinusClass {
    UMinus,
    KMinusLikely,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionClass {
    pub plus: PlusClass,
    pub minus: MinusClass,
}

pub fn region_class(lambda: &HenonParameter, p: &PhasePoint, ctl: &EscapeControl) -> RegionClass {
    let plus = match forward_potential(lambda, p, ctl, false).potential.status {
        PotentialStatus::Escaping => PlusClass::UPlus,
        PotentialStatus::Bounded => PlusClass::KPlusLikely,
        PotentialStatus::Undecided => PlusClass::Undecided,
    };
    let minus = match backward_potential(lambda, p, ctl, false).potential.status {
        PotentialStatus::Escaping => MinusClass::UMinus,
        PotentialStatus::Bounded => MinusClass::KMinusLikely,
        PotentialStatus::Undecided => MinusClass::Undecided,
    };
    RegionClass { plus, minus }
}

/// Three-valued membership: undecided potentials never read as `false`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Outside,
    Undecided,
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        *self == Membership::Inside
    }

    fn from_bool(b: bool) -> Self {
        if b {
            Membership::Inside
        } else {
            Membership::Outside
        }
    }
}

fn decided_green(lambda: &HenonParameter, p: &PhasePoint, cfg: &DomainConfig) -> Option<f64> {
    let g = forward_potential(lambda, p, &cfg.escape_control(), false).potential;
    g.is_decided().then_some(g.value)
}

/// `G₊ ≤ r`, `|y| ≤ y_bound` and `|p_c(y) − x| > |a|·y_bound`.
pub fn in_omega(lambda: &HenonParameter, p: &PhasePoint, cfg: &DomainConfig) -> Membership {
    let walls = p.y.norm() <= cfg.y_bound && u_c(p, lambda.c).norm() > lambda.a.norm() * cfg.y_bound;
    if !walls {
        return Membership::Outside;
    }
    match decided_green(lambda, p, cfg) {
        Some(g) => Membership::from_bool(g <= cfg.r),
        None => Membership::Undecided,
    }
}

/// `G₊ ≥ r` and `|y| ≤ eps`.
pub fn in_upsilon(lambda: &HenonParameter, p: &PhasePoint, cfg: &DomainConfig) -> Membership {
    if p.y.norm() > cfg.eps {
        return Membership::Outside;
    }
    match decided_green(lambda, p, cfg) {
        Some(g) => Membership::from_bool(g >= cfg.r),
        None => Membership::Undecided,
    }
}

/// `n` with `r/2ⁿ⁺¹ ≤ g ≤ r/2ⁿ`, for `0 < g ≤ r`.
pub fn band_index(g: f64, r: f64) -> Option<usize> {
    if !(g > 0.0) || g > r {
        return None;
    }
    Some((r / g).log2().floor().max(0.0) as usize)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComponentId {
    pub band_index: usize,
    pub label: DyadicString,
}

impl ComponentId {
    pub fn new(label: DyadicString) -> Self {
        Self { band_index: label.len(), label }
    }
}

/// A classification; `alternative` is set when the runner-up `ξ` is within 10% of the best.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub id: ComponentId,
    pub alternative: Option<DyadicString>,
}

impl Classification {
    pub fn is_ambiguous(&self) -> bool {
        self.alternative.is_some()
    }
}

/// Everything needed to evaluate memberships at a fixed parameter.
#[derive(Clone, Debug)]
pub struct DomainContext {
    pub lambda: HenonParameter,
    pub cfg: DomainConfig,
    pub table: PreimageTable,
}

impl DomainContext {
    pub fn new(lambda: HenonParameter, cfg: DomainConfig) -> Result<Self> {
        cfg.validate()?;
        let table = preimage_table(lambda.c, cfg.max_depth + 1, &cfg.escape_control())?;
        Ok(Self { lambda, cfg, table })
    }

    /// Fails unless the parameter is in the perturbative regime for `delta`.
    pub fn perturbative(lambda: HenonParameter, cfg: DomainConfig, delta: f64) -> Result<Self> {
        if !is_perturbative(&lambda, delta, &cfg.escape_control()) {
            return Err(HenonError::RegimeViolation(format!("|a| = {:e} with c = {} is outside the regime", lambda.a.norm(), lambda.c)));
        }
        Self::new(lambda, cfg)
    }

    pub fn ctl(&self) -> EscapeControl {
        self.cfg.escape_control()
    }

    pub fn xi(&self, alpha: &DyadicString) -> Option<Complex64> {
        self.table.get(alpha)
    }
}

/// Band from `G₊(p)` and label from the nearest `ξ_α` of that length.
pub fn classify_component(ctx: &DomainContext, p: &PhasePoint) -> Result<Classification> {
    let g = forward_potential(&ctx.lambda, p, &ctx.ctl(), false).potential;
    if !g.is_escaping() {
        return Err(HenonError::Undecided { iterations: g.iterations_used });
    }
    classify_with_green(ctx, p, g.value)
}

pub(crate) fn classify_with_green(ctx: &DomainContext, p: &PhasePoint, g: f64) -> Result<Classification> {
    let n = band_index(g, ctx.cfg.r)
        .ok_or_else(|| HenonError::OutOfRange(format!("G₊ = {g} is not in (0, r]")))?;
    if n > ctx.table.max_depth() {
        return Err(HenonError::OutOfRange(format!("band {n} exceeds the preimage depth {}", ctx.table.max_depth())));
    }
    let (label, best, second) = ctx.table.nearest(n, p.x);
    let alternative = second.filter(|(_, d)| *d <= 1.1 * best).map(|(l, _)| l);
    Ok(Classification { id: ComponentId { band_index: n, label }, alternative })
}

/// Distance from `center` along the ray at angle `theta` to the first point where
/// `G_{p_c}` exceeds `level`.
pub fn level_crossing(c: Complex64, center: Complex64, theta: f64, level: f64, ctl: &EscapeControl) -> f64 {
    let dir = Complex64::from_polar(1.0, theta);
    let g_at = |t: f64| green_1d(center + dir * t, c, 1e-12, ctl).map(|g| g.value).unwrap_or(0.0);
    // March in small steps so a thin excursion above the level is not stepped over.
    let mut lo = 0.0;
    let mut step = 1e-3;
    while g_at(lo + step) <= level && lo < 1e3 {
        lo += step;
        step = (step * 1.5).min(0.02 * (1.0 + lo));
    }
    let mut hi = lo + step;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g_at(mid) <= level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The half-width of a square around `ξ_α` containing the component of
/// `{G_{p_c} < level}` through it, from 32 rays.
pub fn component_radius(c: Complex64, xi: Complex64, level: f64, ctl: &EscapeControl) -> f64 {
    let rays = 32;
    (0..rays)
        .map(|k| level_crossing(c, xi, 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / rays as f64, level, ctl))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_index_edges() {
        assert_eq!(band_index(1.0, 1.0), Some(0));
        assert_eq!(band_index(0.6, 1.0), Some(0));
        assert_eq!(band_index(0.4, 1.0), Some(1));
        assert_eq!(band_index(1.1, 1.0), None);
        assert_eq!(band_index(0.0, 1.0), None);
    }

    #[test]
    fn config_json_field_names() {
        let cfg = choose_domain_config(Complex64::new(-6.0, 0.0), &DomainOverrides::default()).unwrap();
        let v = serde_json::to_value(cfg).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort();
        assert_eq!(keys, ["eps", "escape_radius", "maxDepth", "maxIter", "r", "tol_res", "y_bound"]);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = choose_domain_config(Complex64::new(-6.0, 0.0), &DomainOverrides::default()).unwrap();
        cfg.eps = cfg.y_bound * 2.0;
        assert!(cfg.validate().is_err());
        cfg.eps = 1.0;
        cfg.max_depth = 0;
        assert!(cfg.validate().is_err());
    }
}

use crate::error::{Error, Result};
use crate::fbm::{BetaQuadrature, OuBank};
use crate::models::{MarketState, ModelKind, ModelSpec};
use crate::numerics::{gamma_fn, norm_cdf, norm_pdf};

/// `F^θ` needs bank nodes covering `β/θ` for `β ∈ [1/F_THETA_SPAN, F_THETA_SPAN]`.
pub const F_THETA_SPAN: f64 = 1e6;

/// Ingredients of the regular (LSV) price expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Terms {
    /// `Δ = (e^{√θ z} − 1)/√θ`.
    pub delta: f64,
    pub v: f64,
    /// `α = (z/2)(v + S ∂_s v + η·∇_y log v)`.
    pub alpha: f64,
    pub theta: f64,
}

impl Theorem1Terms {
    /// `ΔΦ(Δ/v) + (v + α√θ) φ(Δ/v)`, an approximation of `P / (S√θ)`.
    pub fn price(&self) -> f64 {
        let x = self.delta / self.v;
        self.delta * norm_cdf(x) + (self.v + self.alpha * self.theta.sqrt()) * norm_pdf(x)
    }
}

fn lsv(spec: &ModelSpec) -> Result<&dyn crate::models::LsvModel> {
    match &spec.kind {
        ModelKind::Lsv(m) => Ok(m.as_ref()),
        ModelKind::Rough(_) => Err(Error::Config(format!("'{}' is not an LSV model", spec.name))),
    }
}

fn rough(spec: &ModelSpec) -> Result<&dyn crate::models::RoughModel> {
    match &spec.kind {
        ModelKind::Rough(m) => Ok(m.as_ref()),
        ModelKind::Lsv(_) => Err(Error::Config(format!("'{}' is not a rough model", spec.name))),
    }
}

fn delta(z: f64, theta: f64) -> f64 {
    let r = theta.sqrt();
    (r * z).exp_m1() / r
}

pub fn theorem1_terms(spec: &ModelSpec, state: &MarketState, z: f64, theta: f64) -> Result<Theorem1Terms> {
    let m = lsv(spec)?;
    let v = m.v(state.s, &state.y, state.t);
    let alpha = 0.5 * z * (v + m.regular_skew_numerator(state.s, &state.y, state.t));
    Ok(Theorem1Terms { delta: delta(z, theta), v, alpha, theta })
}

/// Regular price expansion, normalized as `P / (S√θ)`.
pub fn theorem1_price(spec: &ModelSpec, state: &MarketState, z: f64, theta: f64) -> Result<f64> {
    theorem1_terms(spec, state, z, theta).map(|t| t.price())
}

/// `v + (S ∂_s v + η·∇_y log v) √θ z / 2`.
pub fn theorem2_iv(spec: &ModelSpec, state: &MarketState, z: f64, theta: f64) -> Result<f64> {
    let m = lsv(spec)?;
    let (s, y, t) = (state.s, &state.y, state.t);
    Ok(m.v(s, y, t) + 0.5 * m.regular_skew_numerator(s, y, t) * theta.sqrt() * z)
}

/// `c Γ(1/2 − H) / ((1/2 + H)(3/2 + H))`.
pub fn theorem4_coefficient(q: &BetaQuadrature) -> Result<f64> {
    let h = q.hurst().value();
    Ok(q.c_hat() * gamma_fn(0.5 - h)? / ((0.5 + h) * (1.5 + h)))
}

/// `ρ c Γ(1/2 − H)/(1/2 + H)`: the level of `E[ΔB ΔW^H] / θ^{H+1/2}`.
pub fn correlation_level(q: &BetaQuadrature, rho: f64) -> Result<f64> {
    let h = q.hurst().value();
    Ok(rho * q.c_hat() * gamma_fn(0.5 - h)? / (0.5 + h))
}

/// `1 − x − e^{−x}`, accurate for small `x`.
fn one_minus_x_minus_exp(x: f64) -> f64 {
    if x < 1e-2 {
        // −x²/2 + x³/6 − x⁴/24 + x⁵/120 − x⁶/720
        let x2 = x * x;
        x2 * (-0.5 + x * (1.0 / 6.0 + x * (-1.0 / 24.0 + x * (1.0 / 120.0 - x / 720.0))))
    } else {
        -x - (-x).exp_m1()
    }
}

/// History functional `F^θ = c θ^{−1−H} ∫ γ^{−3/2−H} (1 − θγ − e^{−θγ}) Z^γ dγ`
/// evaluated on the bank's own nodes.
pub fn f_theta(bank: &OuBank, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Domain(format!("maturity must be positive, got {theta}")));
    }
    let q = bank.quadrature();
    let (need_min, need_max) = (1.0 / (F_THETA_SPAN * theta), F_THETA_SPAN / theta);
    if q.beta_min() > need_min || q.beta_max() < need_max {
        return Err(Error::NodeRange { have_min: q.beta_min(), have_max: q.beta_max(), need_min, need_max });
    }
    let h = q.hurst().value();
    let e = -1.5 - h;
    let sum: f64 = q
        .nodes()
        .iter()
        .zip(q.weights())
        .zip(bank.values())
        .map(|((g, w), z)| w * g.powf(e) * one_minus_x_minus_exp(theta * g) * z)
        .sum();
    Ok(q.c_hat() * theta.powf(-1.0 - h) * sum)
}

/// Ingredients of the rough price and implied-volatility expansions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem3Terms {
    pub delta: f64,
    pub v: f64,
    pub theta: f64,
    pub hurst: f64,
    /// `c Γ(1/2−H)/((1/2+H)(3/2+H)) ρ(Y) ∂_y log v`.
    pub skew_coeff: f64,
    /// `skew_coeff · z`.
    pub z_part: f64,
    pub f_theta: f64,
    /// `F^θ ∂_y v`.
    pub f_part: f64,
    /// `z_part + f_part`.
    pub alpha: f64,
}

impl Theorem3Terms {
    /// `ΔΦ(Δ/v) + (v + α θ^H) φ(Δ/v)`, approximating `P / (S√θ)`.
    pub fn price(&self) -> f64 {
        let x = self.delta / self.v;
        self.delta * norm_cdf(x) + (self.v + self.alpha * self.theta.powf(self.hurst)) * norm_pdf(x)
    }

    /// `v + α θ^H`.
    pub fn iv(&self) -> f64 {
        self.v + self.alpha * self.theta.powf(self.hurst)
    }
}

/// Leading rough skew coefficient `c Γ(1/2−H)/((1/2+H)(3/2+H)) ρ(Y) ∂_y log v` at a state.
pub fn rough_skew_coefficient(spec: &ModelSpec, state: &MarketState) -> Result<f64> {
    let m = rough(spec)?;
    let bank = state.bank.as_ref().ok_or(Error::MissingBank)?;
    let (s, y, t) = (state.s, state.y[0], state.t);
    Ok(theorem4_coefficient(bank.quadrature())? * m.rho(y) * m.dlogv_dy(s, y, t))
}

pub fn theorem3_terms(spec: &ModelSpec, state: &MarketState, z: f64, theta: f64) -> Result<Theorem3Terms> {
    let m = rough(spec)?;
    let bank = state.bank.as_ref().ok_or(Error::MissingBank)?;
    let (s, y, t) = (state.s, state.y[0], state.t);
    let v = m.v(s, y, t);
    let dv = m.dv_dy(s, y, t);
    let skew_coeff = rough_skew_coefficient(spec, state)?;
    let f = f_theta(bank, theta)?;
    let z_part = skew_coeff * z;
    let f_part = f * dv;
    Ok(Theorem3Terms {
        delta: delta(z, theta),
        v,
        theta,
        hurst: m.hurst().value(),
        skew_coeff,
        z_part,
        f_theta: f,
        f_part,
        alpha: z_part + f_part,
    })
}

/// Rough implied-volatility expansion `v + α^θ θ^H`.
pub fn theorem4_iv(spec: &ModelSpec, state: &MarketState, z: f64, theta: f64) -> Result<f64> {
    theorem3_terms(spec, state, z, theta).map(|t| t.iv())
}

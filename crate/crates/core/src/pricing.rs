//! Resource pricing, end-user and edge-server utilities, and the calculus of
//! the end-user utility (gradient, Hessian, critical point).
//!
//! Two pricing regimes exist. Under [`Pricing::Linear`] the user pays
//! `a·F + b·B` for fixed coefficients. Under [`Pricing::Dynamic`] the
//! coefficients are the ones that make the purchased allocation the user's
//! own utility critical point, which yields the price
//! `w2·c·q/F + q·Υ/B`.

use thiserror::Error;

use crate::offload::{energy_from_times, time_breakdown, Allocation, EnergyBreakdown, TimeBreakdown};
use crate::scenario::Scenario;

#[derive(Debug, Error, PartialEq)]
pub enum PricingError {
    #[error("displaced point ({f_server}, {b}) is not strictly positive")]
    NonPositiveDisplacement { f_server: f64, b: f64 },
    #[error("w2 must lie in (0, 1) for the utility coupling ratio (got {0})")]
    CouplingDomain(f64),
}

/// Per-unit prices of linear pricing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceCoefficients {
    /// Price per Hz of server frequency.
    pub a: f64,
    /// Price per bit/s of bandwidth.
    pub b_coef: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pricing {
    Linear(PriceCoefficients),
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilitySummary {
    pub price: f64,
    pub u_user: f64,
    pub u_server: f64,
    /// Server revenue from the received data.
    pub w_revenue: f64,
    pub chi: f64,
    pub upsilon: f64,
    pub time: TimeBreakdown,
    pub energy: EnergyBreakdown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureReport {
    pub grad_f: f64,
    pub grad_b: f64,
    pub h_ff: f64,
    pub h_bb: f64,
    pub h_fb: f64,
    pub h_bf: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub negative_definite: bool,
    pub critical_f: f64,
    pub critical_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticGapEstimate {
    pub c1: f64,
    pub c2: f64,
    pub predicted_drop: f64,
    pub actual_drop: f64,
    /// Utility at the critical point.
    pub u_max: f64,
}

/// Per-bit local-execution value: `w1·k·c·F_local² + w2·c/F_local`.
pub fn chi(s: &Scenario) -> f64 {
    s.w1 * s.k * s.cycles_per_bit * s.f_local * s.f_local + s.w2 * s.cycles_per_bit / s.f_local
}

/// Per-bit transfer cost factor, in units of `1/B`.
pub fn upsilon(s: &Scenario) -> f64 {
    (s.w1 * s.p_u + s.w2) / s.channel.uplink_efficiency()
        + (s.w1 * s.p_d * s.alpha + s.w2 * s.alpha) / s.channel.downlink_efficiency()
}

pub fn linear_price(pc: PriceCoefficients, a: Allocation) -> f64 {
    pc.a * a.f_server + pc.b_coef * a.b
}

pub fn dynamic_price(s: &Scenario, a: Allocation) -> f64 {
    s.w2 * s.cycles_per_bit * s.q / a.f_server + s.q * upsilon(s) / a.b
}

/// Server revenue `mu·log2(1 + q)`, with `q` in bits.
pub fn data_revenue(s: &Scenario) -> f64 {
    s.mu * (1.0 + s.q).log2()
}

/// Closed-form end-user utility under the given pricing.
fn user_utility_closed_form(s: &Scenario, a: Allocation, pricing: Pricing) -> f64 {
    let q = s.q;
    let base = q * chi(s);
    let cpu = q / a.f_server * s.w2 * s.cycles_per_bit;
    let link = q / a.b * upsilon(s);
    match pricing {
        Pricing::Linear(pc) => base - cpu - link - pc.a * a.f_server - pc.b_coef * a.b,
        Pricing::Dynamic => base - 2.0 * cpu - 2.0 * link,
    }
}

/// End-user utility and the full priced breakdown of an allocation.
///
/// `u_user` comes from the substituted closed form; `u_server` is the
/// payment minus processing time plus data revenue.
pub fn user_utility(s: &Scenario, a: Allocation, pricing: Pricing) -> UtilitySummary {
    let time = time_breakdown(s, a);
    let energy = energy_from_times(s, &time);
    let price = match pricing {
        Pricing::Linear(pc) => linear_price(pc, a),
        Pricing::Dynamic => dynamic_price(s, a),
    };
    let w_revenue = data_revenue(s);
    UtilitySummary {
        price,
        u_user: user_utility_closed_form(s, a, pricing),
        u_server: price - time.t_offload + w_revenue,
        w_revenue,
        chi: chi(s),
        upsilon: upsilon(s),
        time,
        energy,
    }
}

/// Dynamic-pricing end-user utility alone; the default optimization objective.
pub fn dynamic_user_utility(s: &Scenario, a: Allocation) -> f64 {
    user_utility_closed_form(s, a, Pricing::Dynamic)
}

/// Gradient of the linear-pricing end-user utility.
pub fn user_utility_gradient(s: &Scenario, pc: PriceCoefficients, a: Allocation) -> (f64, f64) {
    let grad_f = s.w2 * s.cycles_per_bit * s.q / (a.f_server * a.f_server) - pc.a;
    let grad_b = s.q * upsilon(s) / (a.b * a.b) - pc.b_coef;
    (grad_f, grad_b)
}

/// Stationary point of the linear-pricing utility for coefficients `pc`.
pub fn critical_point(s: &Scenario, pc: PriceCoefficients) -> Allocation {
    Allocation::new(
        (s.w2 * s.cycles_per_bit * s.q / pc.a).sqrt(),
        (s.q * upsilon(s) / pc.b_coef).sqrt(),
    )
}

pub fn curvature_report(s: &Scenario, pc: PriceCoefficients, a: Allocation) -> CurvatureReport {
    let (grad_f, grad_b) = user_utility_gradient(s, pc, a);
    let h_ff = -2.0 * s.w2 * s.cycles_per_bit * s.q / a.f_server.powi(3);
    let h_bb = -2.0 * s.q * upsilon(s) / a.b.powi(3);
    // Diagonal Hessian: eigenvalues are the diagonal entries.
    let (lambda1, lambda2) = (h_ff, h_bb);
    let crit = critical_point(s, pc);
    CurvatureReport {
        grad_f,
        grad_b,
        h_ff,
        h_bb,
        h_fb: 0.0,
        h_bf: 0.0,
        lambda1,
        lambda2,
        negative_definite: lambda1 < 0.0 && lambda2 < 0.0,
        critical_f: crit.f_server,
        critical_b: crit.b,
    }
}

/// Linear coefficients whose critical point is `(f_target, b_target)`.
pub fn derive_coefficients(s: &Scenario, f_target: f64, b_target: f64) -> PriceCoefficients {
    PriceCoefficients {
        a: s.w2 * s.cycles_per_bit * s.q / (f_target * f_target),
        b_coef: s.q * upsilon(s) / (b_target * b_target),
    }
}

/// Coefficients that put the critical point at the search-box corner.
pub fn default_coefficients(s: &Scenario) -> PriceCoefficients {
    let corner = Allocation::box_max(s);
    derive_coefficients(s, corner.f_server, corner.b)
}

/// Maximum end-user utility over the search box and where it is attained.
///
/// Evaluates the dynamic-pricing utility at the critical point of
/// [`default_coefficients`], which is the box corner `(F_max, B_max)`.
pub fn max_user_utility(s: &Scenario) -> (Allocation, f64) {
    let crit = critical_point(s, default_coefficients(s));
    (crit, dynamic_user_utility(s, crit))
}

/// Second-order estimate of the utility drop for a displacement
/// `(c1, c2)` from the critical point along the Hessian eigen-directions
/// (the coordinate axes), next to the exactly evaluated drop.
pub fn quadratic_gap(
    s: &Scenario,
    pc: PriceCoefficients,
    displacement: (f64, f64),
) -> Result<QuadraticGapEstimate, PricingError> {
    let (c1, c2) = displacement;
    let crit = critical_point(s, pc);
    let moved = Allocation::new(crit.f_server + c1, crit.b + c2);
    if !moved.is_positive() {
        return Err(PricingError::NonPositiveDisplacement {
            f_server: moved.f_server,
            b: moved.b,
        });
    }
    let report = curvature_report(s, pc, crit);
    let predicted_drop = 0.5 * (report.lambda1.abs() * c1 * c1 + report.lambda2.abs() * c2 * c2);
    let u_max = user_utility_closed_form(s, crit, Pricing::Linear(pc));
    // U(crit) - U(moved) with the q·χ term cancelled analytically, so small
    // displacements do not drown in rounding of the O(50) utility level.
    let k_f = s.w2 * s.cycles_per_bit * s.q;
    let k_b = s.q * upsilon(s);
    let actual_drop = c1 * (pc.a - k_f / (moved.f_server * crit.f_server))
        + c2 * (pc.b_coef - k_b / (moved.b * crit.b));
    Ok(QuadraticGapEstimate {
        c1,
        c2,
        predicted_drop,
        actual_drop,
        u_max,
    })
}

/// Factored server utility under dynamic pricing.
pub fn server_utility(s: &Scenario, a: Allocation) -> f64 {
    s.cycles_per_bit * s.q * (s.w2 - 1.0) / a.f_server + s.q / a.b * b_part(s) + data_revenue(s)
}

/// Bandwidth-dependent coefficient of the server utility.
pub fn b_part(s: &Scenario) -> f64 {
    (s.w1 * s.p_u + s.w2 - 1.0) / s.channel.uplink_efficiency()
        + (s.w1 * s.p_d * s.alpha + s.w2 * s.alpha - s.alpha) / s.channel.downlink_efficiency()
}

/// Per-bit dynamic price at an allocation.
pub fn p_part(s: &Scenario, a: Allocation) -> f64 {
    s.w2 * s.cycles_per_bit / a.f_server + upsilon(s) / a.b
}

/// Server utility without the payment: `W(q) − T_offload(q)`.
pub fn u_affect(s: &Scenario, a: Allocation) -> f64 {
    data_revenue(s) - time_breakdown(s, a).t_offload
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub b_part: f64,
    pub p_part: f64,
    /// `(q in bits, U_affect)` pairs.
    pub u_affect: Vec<(f64, f64)>,
}

pub fn diagnostics(s: &Scenario, a: Allocation, q_grid: &[f64]) -> Diagnostics {
    Diagnostics {
        b_part: b_part(s),
        p_part: p_part(s, a),
        u_affect: q_grid
            .iter()
            .map(|&q| (q, u_affect(&Scenario { q, ..*s }, a)))
            .collect(),
    }
}

/// Ratio of user to server utility change for any server-frequency change
/// at fixed `q` and `B` under dynamic pricing.
pub fn coupling_ratio(s: &Scenario) -> Result<f64, PricingError> {
    if !(s.w2 > 0.0 && s.w2 < 1.0) {
        return Err(PricingError::CouplingDomain(s.w2));
    }
    Ok(2.0 * s.w2 / (1.0 - s.w2))
}

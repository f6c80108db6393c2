//! Closed-form minimal Fisher information as a function of prior moments.
//!
//! Given prior knowledge `{⟨x^k⟩}` the extremal Fisher measure that obeys the
//! virial-derived first order PDE `I = -Σ (k/2) ⟨x^k⟩ ∂I/∂⟨x^k⟩` has the
//! complete solution
//!
//! ```text
//! I = Σ_k C_k |⟨x^k⟩|^(-2/k)
//! ```
//!
//! with positive reference constants `C_k`. Its gradient gives the Lagrange
//! multipliers `λ_k = ∂I/∂⟨x^k⟩`, and the Legendre transform
//! `α = I - Σ λ_k ⟨x^k⟩` gives the normalization multiplier.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Map from moment order to a multiplier (or any per-order quantity).
pub type Multipliers = BTreeMap<u32, f64>;

/// Read access to a set of moments keyed by order.
///
/// Implemented by [`MomentSet`] and by translated moment tables so the
/// Legendre bookkeeping can run in either frame.
pub trait MomentLookup {
    fn moment(&self, order: u32) -> Option<f64>;
    fn orders(&self) -> Vec<u32>;
}

/// Prior knowledge: an ordered list of `(k, ⟨x^k⟩)` plus a length scale.
///
/// Orders are unique and at least 1; values are finite. Zero values are
/// representable (moments measured from a symmetric state can vanish) but
/// lie outside the domain of the closed form, which rejects them.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    entries: Vec<(u32, f64)>,
    x_scale: f64,
}

impl MomentSet {
    pub fn new(entries: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        Self::with_scale(entries, 1.0)
    }

    pub fn with_scale(entries: impl IntoIterator<Item = (u32, f64)>, x_scale: f64) -> Result<Self> {
        if !(x_scale.is_finite() && x_scale > 0.0) {
            return Err(Error::config(format!(
                "x_scale must be positive and finite, got {x_scale}"
            )));
        }
        let mut entries: Vec<(u32, f64)> = entries.into_iter().collect();
        entries.sort_by_key(|&(k, _)| k);
        for (i, &(k, v)) in entries.iter().enumerate() {
            if k == 0 {
                return Err(Error::contract(
                    "moment orders start at 1 (order 0 is the normalization)",
                ));
            }
            if i > 0 && entries[i - 1].0 == k {
                return Err(Error::contract(format!("duplicate moment order {k}")));
            }
            if !v.is_finite() {
                return Err(Error::domain(format!("moment of order {k} is not finite")));
            }
        }
        Ok(Self { entries, x_scale })
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn x_scale(&self) -> f64 {
        self.x_scale
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, order: u32) -> Option<f64> {
        self.entries
            .binary_search_by_key(&order, |&(k, _)| k)
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn max_order(&self) -> Option<u32> {
        self.entries.last().map(|&(k, _)| k)
    }

    /// The set `{s^k ⟨x^k⟩}`: moments of the same distribution stretched by `s`.
    pub fn scaled(&self, s: f64) -> MomentSet {
        MomentSet {
            entries: self.entries.iter().map(|&(k, v)| (k, v * s.powi(k as i32))).collect(),
            x_scale: self.x_scale,
        }
    }

    /// Rejects any vanishing moment; the closed form diverges there.
    pub fn check_fim_domain(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::domain("no moments given"));
        }
        match self.entries.iter().find(|&&(_, v)| v == 0.0) {
            Some(&(k, _)) => Err(Error::domain(format!(
                "moment of order {k} is zero, outside the domain of the Fisher measure"
            ))),
            None => Ok(()),
        }
    }
}

impl MomentLookup for MomentSet {
    fn moment(&self, order: u32) -> Option<f64> {
        if order == 0 {
            return Some(1.0);
        }
        self.get(order)
    }

    fn orders(&self) -> Vec<u32> {
        self.entries.iter().map(|&(k, _)| k).collect()
    }
}

/// Positive reference constants `C_k`; orders without an override use 1.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReferenceConstants {
    overrides: BTreeMap<u32, f64>,
}

impl ReferenceConstants {
    pub fn unit() -> Self {
        Self::default()
    }

    pub fn from_overrides(overrides: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, c) in overrides {
            if k == 0 {
                return Err(Error::contract("reference constants are indexed from order 1"));
            }
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::config(format!("C_{k} must be positive and finite, got {c}")));
            }
            map.insert(k, c);
        }
        Ok(Self { overrides: map })
    }

    pub fn get(&self, order: u32) -> f64 {
        self.overrides.get(&order).copied().unwrap_or(1.0)
    }

    pub fn overrides(&self) -> &BTreeMap<u32, f64> {
        &self.overrides
    }
}

/// Result of the closed-form minimization.
///
/// `lambdas` is empty and `alpha` is `None` when only the Fisher value was
/// requested (see [`minimal_fisher`]); [`solve_closed_form`] fills both.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherSolution {
    pub fisher: f64,
    pub per_term: BTreeMap<u32, f64>,
    pub lambdas: Multipliers,
    pub alpha: Option<f64>,
}

/// Converts to dimensionless moments `⟨x^k⟩ / x_scale^k` with unit scale.
pub fn nondimensionalize(moments: &MomentSet) -> Result<MomentSet> {
    let s = moments.x_scale;
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::config("x_scale must be positive"));
    }
    Ok(MomentSet {
        entries: moments
            .entries
            .iter()
            .map(|&(k, v)| (k, v / s.powi(k as i32)))
            .collect(),
        x_scale: 1.0,
    })
}

/// Inverse of [`nondimensionalize`]: reattaches the length scale `x_scale`.
pub fn dimensionalize(moments: &MomentSet, x_scale: f64) -> Result<MomentSet> {
    if !(x_scale.is_finite() && x_scale > 0.0) {
        return Err(Error::config("x_scale must be positive"));
    }
    Ok(MomentSet {
        entries: moments
            .entries
            .iter()
            .map(|&(k, v)| (k, v * x_scale.powi(k as i32) / moments.x_scale.powi(k as i32)))
            .collect(),
        x_scale,
    })
}

/// `C_k |m|^(-2/k)` for a single term.
pub(crate) fn term(order: u32, value: f64, c: f64) -> f64 {
    c * value.abs().powf(-2.0 / f64::from(order))
}

/// `∂/∂m` of [`term`]: `-(2/k) C_k |m|^(-2/k) / m`.
pub(crate) fn term_derivative(order: u32, value: f64, c: f64) -> f64 {
    -2.0 / f64::from(order) * term(order, value, c) / value
}

/// `I = Σ_k C_k |⟨x^k⟩|^(-2/k)`.
pub fn minimal_fisher(moments: &MomentSet, constants: &ReferenceConstants) -> Result<FisherSolution> {
    moments.check_fim_domain()?;
    let per_term: BTreeMap<u32, f64> = moments
        .entries
        .iter()
        .map(|&(k, v)| (k, term(k, v, constants.get(k))))
        .collect();
    Ok(FisherSolution {
        fisher: per_term.values().sum(),
        per_term,
        lambdas: Multipliers::new(),
        alpha: None,
    })
}

/// `λ_k = ∂I/∂⟨x^k⟩ = -(2/k) C_k |⟨x^k⟩|^(-2/k) / ⟨x^k⟩`.
///
/// The explicit division keeps the sign of odd-order moments.
pub fn lagrange_multipliers(moments: &MomentSet, constants: &ReferenceConstants) -> Result<Multipliers> {
    moments.check_fim_domain()?;
    Ok(moments
        .entries
        .iter()
        .map(|&(k, v)| (k, term_derivative(k, v, constants.get(k))))
        .collect())
}

/// Diagonal of the Hessian of `I`; off-diagonal entries vanish identically.
pub fn fisher_hessian(moments: &MomentSet, constants: &ReferenceConstants) -> Result<Multipliers> {
    moments.check_fim_domain()?;
    Ok(moments
        .entries
        .iter()
        .map(|&(k, v)| {
            let kf = f64::from(k);
            let h = (1.0 + kf / 2.0) * (4.0 / (kf * kf)) * constants.get(k) * v.abs().powf(-2.0 * (1.0 + kf) / kf);
            (k, h)
        })
        .collect())
}

fn check_same_orders(lambdas: &Multipliers, moments: &impl MomentLookup) -> Result<()> {
    let lambda_orders: Vec<u32> = lambdas.keys().copied().collect();
    let mut moment_orders = moments.orders();
    moment_orders.sort_unstable();
    if lambda_orders != moment_orders {
        return Err(Error::contract(format!(
            "multiplier orders {lambda_orders:?} do not match moment orders {moment_orders:?}"
        )));
    }
    Ok(())
}

fn weighted_sum(lambdas: &Multipliers, moments: &impl MomentLookup, weight: impl Fn(u32) -> f64) -> Result<f64> {
    check_same_orders(lambdas, moments)?;
    Ok(lambdas
        .iter()
        .map(|(&k, &l)| weight(k) * l * moments.moment(k).unwrap_or(0.0))
        .sum())
}

/// Legendre transform `α = I - Σ λ_k ⟨x^k⟩`.
pub fn legendre_alpha(fisher: f64, lambdas: &Multipliers, moments: &impl MomentLookup) -> Result<f64> {
    Ok(fisher - weighted_sum(lambdas, moments, |_| 1.0)?)
}

/// Constraint form `I = α + Σ λ_k ⟨x^k⟩`, the inverse of [`legendre_alpha`].
pub fn fisher_from_constraints(alpha: f64, lambdas: &Multipliers, moments: &impl MomentLookup) -> Result<f64> {
    Ok(alpha + weighted_sum(lambdas, moments, |_| 1.0)?)
}

/// Virial form `I = -Σ (k/2) λ_k ⟨x^k⟩`.
pub fn fisher_virial_form(lambdas: &Multipliers, moments: &impl MomentLookup) -> Result<f64> {
    Ok(-weighted_sum(lambdas, moments, |k| f64::from(k) / 2.0)?)
}

/// Fisher value, multipliers and `α` in one pass.
pub fn solve_closed_form(moments: &MomentSet, constants: &ReferenceConstants) -> Result<FisherSolution> {
    let mut sol = minimal_fisher(moments, constants)?;
    sol.lambdas = lagrange_multipliers(moments, constants)?;
    sol.alpha = Some(legendre_alpha(sol.fisher, &sol.lambdas, moments)?);
    Ok(sol)
}

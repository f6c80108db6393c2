//! The first-order PDE `ℐ = -Σ (k/2) ⟨𝒳_k⟩ ∂ℐ/∂⟨𝒳_k⟩` as a test object.
//!
//! Candidates are arbitrary functions of dimensionless moments. The checks
//! here evaluate the PDE residual, the scaling symmetry generated by its
//! characteristics, and the first integrals
//!
//! ```text
//! b_{k-1} = |⟨𝒳_1⟩|² |⟨𝒳_k⟩|^(-2/k)   (k = 2..M)
//! b_M     = |⟨𝒳_1⟩|² |ℐ|
//! ```
//!
//! which any solution of the form `ℐ = |⟨𝒳_1⟩|^(-2) Ψ(b_1, …, b_{M-1})`
//! must respect.

use crate::error::{Error, Result};
use crate::moments::{term, term_derivative, MomentSet, ReferenceConstants};

/// Dimensionless moments `⟨𝒳_k⟩` at which a candidate is probed.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentPoint {
    entries: Vec<(u32, f64)>,
}

impl MomentPoint {
    pub fn new(entries: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut entries: Vec<(u32, f64)> = entries.into_iter().collect();
        entries.sort_by_key(|&(k, _)| k);
        if entries.is_empty() {
            return Err(Error::contract("moment point needs at least one coordinate"));
        }
        for (i, &(k, v)) in entries.iter().enumerate() {
            if k == 0 || (i > 0 && entries[i - 1].0 == k) {
                return Err(Error::contract(format!("invalid or repeated order {k}")));
            }
            if !(v.is_finite() && v != 0.0) {
                return Err(Error::domain(format!(
                    "coordinate of order {k} must be finite and nonzero"
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn get(&self, order: u32) -> Option<f64> {
        self.entries.iter().find(|&&(k, _)| k == order).map(|&(_, v)| v)
    }

    fn with_coordinate(&self, index: usize, value: f64) -> Self {
        let mut entries = self.entries.clone();
        entries[index].1 = value;
        Self { entries }
    }

    /// `{s^k ⟨𝒳_k⟩}`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|&(k, v)| (k, v * s.powi(k as i32))).collect(),
        }
    }

    /// Point reached after flowing a time `t` along a characteristic:
    /// `⟨𝒳_k⟩ → e^(k t / 2) ⟨𝒳_k⟩` (and `ℐ → e^(-t) ℐ`).
    pub fn flow(&self, t: f64) -> Self {
        self.scaled((t / 2.0).exp())
    }
}

impl TryFrom<&MomentSet> for MomentPoint {
    type Error = Error;

    fn try_from(m: &MomentSet) -> Result<Self> {
        let dimensionless = crate::moments::nondimensionalize(m)?;
        MomentPoint::new(dimensionless.entries().iter().copied())
    }
}

/// A candidate Fisher function `ℐ(⟨𝒳_1⟩, …)`.
///
/// Implementations must be side-effect free. `gradient` returns partials in
/// the order of `point.entries()` when available analytically.
pub trait CandidateFisher {
    fn value(&self, point: &MomentPoint) -> Option<f64>;

    fn gradient(&self, _point: &MomentPoint) -> Option<Vec<f64>> {
        None
    }
}

/// The complete solution `ℐ = Σ C_k |⟨𝒳_k⟩|^(-2/k)` with analytic partials.
#[derive(Debug, Clone, Default)]
pub struct ClosedForm {
    pub constants: ReferenceConstants,
}

impl CandidateFisher for ClosedForm {
    fn value(&self, point: &MomentPoint) -> Option<f64> {
        Some(
            point
                .entries
                .iter()
                .map(|&(k, v)| term(k, v, self.constants.get(k)))
                .sum(),
        )
    }

    fn gradient(&self, point: &MomentPoint) -> Option<Vec<f64>> {
        Some(
            point
                .entries
                .iter()
                .map(|&(k, v)| term_derivative(k, v, self.constants.get(k)))
                .collect(),
        )
    }
}

/// Wraps a closure as a candidate with no analytic partials.
pub struct FnCandidate<F>(pub F);

impl<F: Fn(&MomentPoint) -> Option<f64>> CandidateFisher for FnCandidate<F> {
    fn value(&self, point: &MomentPoint) -> Option<f64> {
        (self.0)(point)
    }
}

/// Hides a candidate's analytic partials so finite differences are used.
pub struct NumericOnly<'a, C: ?Sized>(pub &'a C);

impl<C: CandidateFisher + ?Sized> CandidateFisher for NumericOnly<'_, C> {
    fn value(&self, point: &MomentPoint) -> Option<f64> {
        self.0.value(point)
    }
}

fn evaluate(candidate: &(impl CandidateFisher + ?Sized), point: &MomentPoint, what: &str) -> Result<f64> {
    match candidate.value(point) {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(Error::domain(format!("candidate cannot be evaluated {what}"))),
    }
}

/// Partials `∂ℐ/∂⟨𝒳_k⟩`: analytic when offered, else central differences
/// with step `step · max(|⟨𝒳_k⟩|, 1e-3)`.
pub fn partials(candidate: &(impl CandidateFisher + ?Sized), point: &MomentPoint, step: f64) -> Result<Vec<f64>> {
    let grads = match candidate.gradient(point) {
        Some(g) if g.len() == point.entries.len() => g,
        Some(g) => {
            return Err(Error::contract(format!(
                "candidate returned {} partials for {} coordinates",
                g.len(),
                point.entries.len()
            )))
        }
        None => point
            .entries
            .iter()
            .enumerate()
            .map(|(i, &(k, v))| {
                let h = step * v.abs().max(1e-3);
                let at = |x: f64| evaluate(candidate, &point.with_coordinate(i, x), &format!("near order {k}"));
                Ok((at(v + h)? - at(v - h)?) / (2.0 * h))
            })
            .collect::<Result<Vec<f64>>>()?,
    };
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::domain(format!(
            "partial derivative along order {} is not finite",
            point.entries[i].0
        )));
    }
    Ok(grads)
}

pub const DEFAULT_STEP: f64 = 1e-5;

/// `ℐ + Σ (k/2) ⟨𝒳_k⟩ ∂ℐ/∂⟨𝒳_k⟩`; zero for a solution.
pub fn pde_residual(candidate: &(impl CandidateFisher + ?Sized), point: &MomentPoint, step: f64) -> Result<f64> {
    let value = evaluate(candidate, point, "at the base point")?;
    let grads = partials(candidate, point, step)?;
    Ok(value
        + point
            .entries
            .iter()
            .zip(&grads)
            .map(|(&(k, v), g)| f64::from(k) / 2.0 * v * g)
            .sum::<f64>())
}

/// `|ℐ({s^k ⟨𝒳_k⟩}) - s^(-2) ℐ| / ℐ`.
pub fn scaling_covariance_check(
    candidate: &(impl CandidateFisher + ?Sized),
    point: &MomentPoint,
    s: f64,
) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain(format!("scale factor must be positive, got {s}")));
    }
    let base = evaluate(candidate, point, "at the base point")?;
    let scaled = evaluate(candidate, &point.scaled(s), "at the scaled point")?;
    Ok((scaled - base / (s * s)).abs() / base.abs())
}

/// First integrals of the characteristic system.
#[derive(Debug, Clone, PartialEq)]
pub struct Invariants {
    /// `b_1 … b_{M-1}`, one per order `2..=M`.
    pub ratios: Vec<f64>,
    /// `b_M = |⟨𝒳_1⟩|² |ℐ|`.
    pub fisher_invariant: f64,
}

fn ratio_invariants(point: &MomentPoint) -> Result<(f64, Vec<f64>)> {
    let first = point
        .get(1)
        .ok_or_else(|| Error::contract("characteristic invariants need the order-1 coordinate"))?;
    for (i, &(k, _)) in point.entries.iter().enumerate() {
        if k != i as u32 + 1 {
            return Err(Error::contract(format!(
                "characteristic invariants need contiguous orders from 1; order {} is missing",
                i + 1
            )));
        }
    }
    let a = first * first;
    let ratios = point.entries[1..]
        .iter()
        .map(|&(k, v)| a * v.abs().powf(-2.0 / f64::from(k)))
        .collect();
    Ok((a, ratios))
}

pub fn characteristic_invariants(point: &MomentPoint, fisher: f64) -> Result<Invariants> {
    let (a, ratios) = ratio_invariants(point)?;
    Ok(Invariants {
        ratios,
        fisher_invariant: a * fisher.abs(),
    })
}

/// Relative tolerance for two points to count as sharing invariants.
pub const SAME_INVARIANT_TOL: f64 = 1e-10;

/// `| |⟨𝒳_1⟩_A|² ℐ(A) - |⟨𝒳_1⟩_B|² ℐ(B) |` for two points on the same
/// level set of `b_1 … b_{M-1}`; zero when the candidate has the
/// `|⟨𝒳_1⟩|^(-2) Ψ(b)` form on this pair.
pub fn representation_check(
    candidate: &(impl CandidateFisher + ?Sized),
    a: &MomentPoint,
    b: &MomentPoint,
) -> Result<f64> {
    let (sa, ra) = ratio_invariants(a)?;
    let (sb, rb) = ratio_invariants(b)?;
    if ra.len() != rb.len() {
        return Err(Error::contract("points have different numbers of coordinates"));
    }
    for (j, (x, y)) in ra.iter().zip(&rb).enumerate() {
        if (x - y).abs() > SAME_INVARIANT_TOL * x.abs().max(y.abs()).max(1.0) {
            return Err(Error::contract(format!(
                "invariant b_{} differs between the points ({x} vs {y})",
                j + 1
            )));
        }
    }
    let ia = evaluate(candidate, a, "at the first point")?;
    let ib = evaluate(candidate, b, "at the second point")?;
    Ok((sa * ia - sb * ib).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(e: &[(u32, f64)]) -> MomentPoint {
        MomentPoint::new(e.iter().copied()).unwrap()
    }

    fn x2_candidate() -> FnCandidate<impl Fn(&MomentPoint) -> Option<f64>> {
        FnCandidate(|p: &MomentPoint| p.get(2))
    }

    #[test]
    fn residual_examples() {
        let cf = ClosedForm::default();
        let r = pde_residual(&cf, &pt(&[(1, 0.7), (2, 1.9), (3, -2.2)]), DEFAULT_STEP).unwrap();
        assert!(r.abs() <= 1e-10);

        // ℐ = ⟨𝒳₂⟩ at 1: 1 + (2/2)·1·1 = 2
        let r = pde_residual(&x2_candidate(), &pt(&[(2, 1.0)]), DEFAULT_STEP).unwrap();
        assert!((r - 2.0).abs() < 1e-8);

        let single = FnCandidate(|p: &MomentPoint| p.get(1).map(|x| 3.0 * x.abs().powi(-2)));
        assert!(pde_residual(&single, &pt(&[(1, 1.3)]), DEFAULT_STEP).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn covariance_examples() {
        let cf = ClosedForm::default();
        assert!(scaling_covariance_check(&cf, &pt(&[(2, 0.5)]), 2.0).unwrap() <= 1e-12);
        assert!(scaling_covariance_check(&cf, &pt(&[(1, 1.0), (2, 2.0)]), 0.5).unwrap() <= 1e-12);
        let d = scaling_covariance_check(&x2_candidate(), &pt(&[(2, 1.0)]), 2.0).unwrap();
        assert!((d - 3.75).abs() < 1e-15);
        assert!(scaling_covariance_check(&cf, &pt(&[(2, 1.0)]), 0.0).is_err());
    }

    #[test]
    fn invariant_examples() {
        let inv = characteristic_invariants(&pt(&[(1, 2.0), (2, 1.0)]), 0.25).unwrap();
        assert_eq!(inv.ratios, vec![4.0]);
        assert_eq!(inv.fisher_invariant, 1.0);

        let inv = characteristic_invariants(&pt(&[(1, 1.0), (2, 0.3)]), 1.0).unwrap();
        assert!((inv.ratios[0] - 1.0 / 0.3).abs() < 1e-15);

        assert!(matches!(
            characteristic_invariants(&pt(&[(2, 1.0)]), 1.0),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            characteristic_invariants(&pt(&[(1, 1.0), (3, 1.0)]), 1.0),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn invariants_constant_along_flow() {
        let p = pt(&[(1, 2.0), (2, 1.0), (3, -0.4)]);
        let base = characteristic_invariants(&p, 0.25).unwrap();
        for t in [-1.0, -0.5, 0.5, 1.0] {
            let moved = characteristic_invariants(&p.flow(t), 0.25 * (-t).exp()).unwrap();
            for (a, b) in base.ratios.iter().zip(&moved.ratios) {
                assert!((a - b).abs() <= 1e-12 * a.abs());
            }
            assert!((base.fisher_invariant - moved.fisher_invariant).abs() <= 1e-12 * base.fisher_invariant);
        }
    }

    #[test]
    fn representation_examples() {
        let a = pt(&[(1, 1.0), (2, 1.0)]);
        let b = a.flow(1.0);
        let cf = ClosedForm::default();
        assert!(representation_check(&cf, &a, &b).unwrap() <= 1e-10);

        let single = FnCandidate(|p: &MomentPoint| p.get(1).map(|x| 2.0 * x.abs().powi(-2)));
        assert!(representation_check(&single, &a, &a.flow(-0.7)).unwrap() <= 1e-12);

        let sum = FnCandidate(|p: &MomentPoint| Some(p.get(1)? + p.get(2)?));
        let dev = representation_check(&sum, &a, &b).unwrap();
        // e (e^{1/2} + e) vs 2
        let e = std::f64::consts::E;
        assert!((dev - (e * (e.sqrt() + e) - 2.0)).abs() < 1e-12);

        let off_level = pt(&[(1, 1.0), (2, 2.0)]);
        assert!(matches!(
            representation_check(&cf, &a, &off_level),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn infinite_partials_are_domain_errors() {
        struct Bad;
        impl CandidateFisher for Bad {
            fn value(&self, _: &MomentPoint) -> Option<f64> {
                Some(1.0)
            }
            fn gradient(&self, _: &MomentPoint) -> Option<Vec<f64>> {
                Some(vec![f64::INFINITY])
            }
        }
        assert!(matches!(
            pde_residual(&Bad, &pt(&[(1, 1.0)]), DEFAULT_STEP),
            Err(Error::Domain(_))
        ));

        let undefined = FnCandidate(|p: &MomentPoint| p.get(1).filter(|&x| x < 1.0));
        let err = pde_residual(&undefined, &pt(&[(1, 1.0)]), DEFAULT_STEP).unwrap_err();
        assert!(matches!(&err, Error::Domain(msg) if msg.contains("base point")));
    }

    #[test]
    fn zero_coordinate_rejected() {
        assert!(MomentPoint::new([(1, 0.0)]).is_err());
        assert!(MomentPoint::new([(0, 1.0)]).is_err());
    }

    fn point_strategy() -> impl Strategy<Value = MomentPoint> {
        (1usize..=3, proptest::collection::vec((0.2f64..5.0, prop::bool::ANY), 3)).prop_map(|(m, coords)| {
            MomentPoint::new(
                coords[..m]
                    .iter()
                    .enumerate()
                    .map(|(i, &(v, neg))| (i as u32 + 1, if neg { -v } else { v })),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn closed_form_residual_vanishes(p in point_strategy()) {
            let cf = ClosedForm::default();
            prop_assert!(pde_residual(&cf, &p, DEFAULT_STEP).unwrap().abs() <= 1e-10);
            prop_assert!(pde_residual(&NumericOnly(&cf), &p, DEFAULT_STEP).unwrap().abs() <= 1e-5);
        }

        #[test]
        fn covariance_implies_zero_residual(p in point_strategy(), c in 0.1f64..3.0) {
            // a candidate homogeneous under the flow: |⟨𝒳₁⟩|^-2 Ψ(b) with Ψ = c (1 + b₁)
            let cand = FnCandidate(move |q: &MomentPoint| {
                let x1 = q.get(1)?;
                let b1 = q.get(2).map(|x2| x1 * x1 / x2.abs()).unwrap_or(0.0);
                Some(c * (1.0 + b1) / (x1 * x1))
            });
            for s in [0.3, 0.7, 1.5, 4.0] {
                prop_assert!(scaling_covariance_check(&cand, &p, s).unwrap() <= 1e-12);
            }
            prop_assert!(pde_residual(&cand, &p, DEFAULT_STEP).unwrap().abs() <= 1e-5 * cand.value(&p).unwrap().max(1.0));
        }
    }
}

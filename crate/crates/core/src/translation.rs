//! Translation of the information potential to its minimum.
//!
//! The pseudo-potential `U(x) = -(1/8) Σ λ_k x^k` is re-expanded about its
//! absolute minimum `ξ`, giving multipliers `λ*_k = -(8/k!) U^(k)(ξ)` in the
//! shifted variable `u = x - ξ`. Moments follow by the binomial theorem and
//! the normalization multiplier shifts as `α = ᾱ + 8 U(ξ)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::moments::{term, MomentLookup, MomentSet, Multipliers, ReferenceConstants};

/// Binomial coefficient as a float; exact for the small orders used here.
pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Polynomial pseudo-potential `U(x) = -(1/8) Σ_k λ_k x^k`.
///
/// Coefficients are stored densely by power; index 0 is only nonzero for a
/// potential that has already been translated.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoPotential {
    lambdas: Vec<f64>,
}

impl InfoPotential {
    /// Builds `U` from multipliers keyed by order `k ≥ 1`.
    pub fn from_multipliers(lambdas: &Multipliers) -> Result<Self> {
        if lambdas.contains_key(&0) {
            return Err(Error::contract("untranslated potentials carry no order-0 multiplier"));
        }
        if lambdas.values().any(|l| !l.is_finite()) {
            return Err(Error::domain("multipliers must be finite"));
        }
        if lambdas.values().all(|&l| l == 0.0) {
            return Err(Error::contract("potential needs at least one nonzero multiplier"));
        }
        let degree = *lambdas.keys().next_back().unwrap_or(&0) as usize;
        let mut dense = vec![0.0; degree + 1];
        for (&k, &l) in lambdas {
            dense[k as usize] = l;
        }
        Ok(Self::from_dense(dense))
    }

    fn from_dense(mut lambdas: Vec<f64>) -> Self {
        while lambdas.len() > 1 && lambdas.last() == Some(&0.0) {
            lambdas.pop();
        }
        Self { lambdas }
    }

    /// Multipliers keyed by order, zeros omitted.
    pub fn multipliers(&self) -> Multipliers {
        self.lambdas
            .iter()
            .enumerate()
            .filter(|(_, &l)| l != 0.0)
            .map(|(k, &l)| (k as u32, l))
            .collect()
    }

    pub fn degree(&self) -> u32 {
        (self.lambdas.len() - 1) as u32
    }

    pub fn leading_multiplier(&self) -> f64 {
        *self.lambdas.last().unwrap_or(&0.0)
    }

    /// Bounded below and growing at both ends: even degree with `λ_M < 0`.
    pub fn is_confining(&self) -> bool {
        let m = self.degree();
        m >= 2 && m.is_multiple_of(2) && self.leading_multiplier() < 0.0
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `n`-th derivative `U^(n)(x)`.
    pub fn derivative(&self, x: f64, n: u32) -> f64 {
        let n = n as usize;
        if n >= self.lambdas.len() {
            return 0.0;
        }
        // Horner over the differentiated coefficients k!/(k-n)! λ_k
        let mut acc = 0.0;
        for k in (n..self.lambdas.len()).rev() {
            let falling: f64 = (0..n).map(|i| (k - i) as f64).product();
            acc = acc * x + falling * self.lambdas[k];
        }
        -acc / 8.0
    }

    /// `U` re-expanded about `xi`, i.e. `Ū(u) = U(u + ξ)`.
    pub fn translated(&self, xi: f64) -> InfoPotential {
        let dense = taylor_dense(&self.lambdas, xi);
        InfoPotential::from_dense(dense)
    }
}

/// Builds the potential from multipliers; alias kept for the pipeline.
pub fn build_potential(lambdas: &Multipliers) -> Result<InfoPotential> {
    InfoPotential::from_multipliers(lambdas)
}

/// Location and depth of the absolute minimum of `U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub xi: f64,
    pub u_min: f64,
    /// `U''(ξ)`; nonnegative at a genuine minimum.
    pub curvature: f64,
}

/// Global minimizer of a confining polynomial potential.
///
/// Degree two is solved in closed form (`ξ = -λ₁ / 2λ₂`). Higher even
/// degrees scan `U'` for sign changes inside the Cauchy root bound, bisect
/// each bracket to full precision and keep the root with the lowest `U`.
pub fn potential_minimum(potential: &InfoPotential) -> Result<CriticalPoint> {
    if !potential.is_confining() {
        return Err(Error::domain(format!(
            "potential of degree {} with leading multiplier {} is unbounded below",
            potential.degree(),
            potential.leading_multiplier()
        )));
    }
    let at = |xi: f64| CriticalPoint {
        xi,
        u_min: potential.value(xi),
        curvature: potential.derivative(xi, 2),
    };
    if potential.degree() == 2 {
        let l1 = potential.lambdas.get(1).copied().unwrap_or(0.0);
        let l2 = potential.lambdas[2];
        return Ok(at(-l1 / (2.0 * l2)));
    }

    // roots of U' lie within 1 + max |a_i / a_n| (Cauchy bound)
    let m = potential.lambdas.len() - 1;
    let lead = m as f64 * potential.lambdas[m];
    let bound = 1.0
        + (1..m)
            .map(|k| (k as f64 * potential.lambdas[k] / lead).abs())
            .fold(0.0, f64::max);
    let slope = |x: f64| potential.derivative(x, 1);

    const SCAN: usize = 4000;
    let mut candidates = Vec::new();
    let mut x_prev = -bound;
    let mut d_prev = slope(x_prev);
    for i in 1..=SCAN {
        let x = -bound + 2.0 * bound * i as f64 / SCAN as f64;
        let d = slope(x);
        if d == 0.0 {
            candidates.push(x);
        } else if d_prev < 0.0 && d > 0.0 {
            candidates.push(bisect_root(&slope, x_prev, x));
        }
        x_prev = x;
        d_prev = d;
    }

    candidates
        .into_iter()
        .map(at)
        .filter(|c| c.curvature >= 0.0)
        .min_by(|a, b| a.u_min.total_cmp(&b.u_min))
        .ok_or_else(|| Error::Numeric {
            message: "no minimum of the potential found in the scan interval".into(),
            iterations: SCAN,
        })
}

/// Bisection on a bracket with `f(lo) < 0 < f(hi)` until the bracket
/// cannot shrink further in floating point.
fn bisect_root(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

/// `λ*_k = Σ_{j≥k} binom(j,k) λ_j ξ^(j-k)` for every power `k` of the input.
fn taylor_dense(lambdas: &[f64], xi: f64) -> Vec<f64> {
    let m = lambdas.len();
    (0..m)
        .map(|k| {
            (k..m)
                .map(|j| binomial(j as u32, k as u32) * lambdas[j] * xi.powi((j - k) as i32))
                .sum()
        })
        .collect()
}

/// Multipliers of the potential expanded about `xi`, orders `0..=M`.
///
/// `λ*_0 = -8 U(ξ)`; at the critical point `λ*_1` vanishes; `λ*_M = λ_M`.
pub fn taylor_multipliers(potential: &InfoPotential, xi: f64) -> Result<Multipliers> {
    if !xi.is_finite() {
        return Err(Error::domain("expansion point must be finite"));
    }
    Ok(taylor_dense(&potential.lambdas, xi)
        .into_iter()
        .enumerate()
        .map(|(k, l)| (k as u32, l))
        .collect())
}

/// `⟨(x - ξ)^k⟩ = Σ_{j=0}^{k} (-1)^j binom(k,j) ξ^j ⟨x^(k-j)⟩`.
///
/// `⟨x^0⟩ = 1`. When `ξ = 0` only `⟨x^k⟩` itself is needed.
pub fn translate_moments(moments: &impl MomentLookup, xi: f64, order: u32) -> Result<f64> {
    if xi == 0.0 {
        return moments
            .moment(order)
            .ok_or_else(|| Error::contract(format!("moment of order {order} is missing")));
    }
    (0..=order).try_fold(0.0, |acc, j| {
        let lower = order - j;
        let m = moments.moment(lower).ok_or_else(|| {
            Error::contract(format!(
                "translating order {order} needs the moment of order {lower}, which is missing"
            ))
        })?;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        Ok(acc + sign * binomial(order, j) * xi.powi(j as i32) * m)
    })
}

/// Moments `⟨u^k⟩' = ⟨(x - ξ)^k⟩` about a fixed point `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslatedMoments {
    pub xi: f64,
    pub x_scale: f64,
    pub entries: BTreeMap<u32, f64>,
}

impl TranslatedMoments {
    /// Translates every listed order of `moments` about `xi`.
    pub fn from_moments(moments: &MomentSet, xi: f64, orders: impl IntoIterator<Item = u32>) -> Result<Self> {
        let entries = orders
            .into_iter()
            .map(|k| translate_moments(moments, xi, k).map(|v| (k, v)))
            .collect::<Result<_>>()?;
        Ok(Self {
            xi,
            x_scale: moments.x_scale(),
            entries,
        })
    }

    /// `|⟨u^k⟩'| < 1e-12 x_scale^k`: the closed-form term diverges there.
    pub fn is_vanishing(&self, order: u32) -> bool {
        self.entries
            .get(&order)
            .is_some_and(|v| v.abs() < 1e-12 * self.x_scale.powi(order as i32))
    }
}

impl MomentLookup for TranslatedMoments {
    fn moment(&self, order: u32) -> Option<f64> {
        if order == 0 {
            return Some(1.0);
        }
        self.entries.get(&order).copied()
    }

    fn orders(&self) -> Vec<u32> {
        self.entries.keys().copied().collect()
    }
}

/// Fisher value in the translated frame and which moments were skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslatedFisher {
    pub fisher: f64,
    pub per_term: BTreeMap<u32, f64>,
    pub skipped: Vec<u32>,
}

/// `I = Σ_{k≥2} C_k |⟨u^k⟩'|^(-2/k)` over the non-vanishing moments.
pub fn translated_fisher(translated: &TranslatedMoments, constants: &ReferenceConstants) -> Result<TranslatedFisher> {
    let mut per_term = BTreeMap::new();
    let mut skipped = Vec::new();
    for (&k, &v) in translated.entries.range(2..) {
        if translated.is_vanishing(k) {
            skipped.push(k);
        } else {
            per_term.insert(k, term(k, v, constants.get(k)));
        }
    }
    if per_term.is_empty() {
        return Err(Error::domain(
            "every translated moment of order two or more vanishes; the Fisher measure diverges",
        ));
    }
    Ok(TranslatedFisher {
        fisher: per_term.values().sum(),
        per_term,
        skipped,
    })
}

/// `α = ᾱ + 8 U(ξ)`.
pub fn alpha_shift(alpha_bar: f64, potential: &InfoPotential, xi: f64) -> f64 {
    alpha_bar + 8.0 * potential.value(xi)
}

/// `ᾱ = α - 8 U(ξ)`, the inverse of [`alpha_shift`].
pub fn alpha_unshift(alpha: f64, potential: &InfoPotential, xi: f64) -> f64 {
    alpha - 8.0 * potential.value(xi)
}

/// Cramer–Rao product `I σ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CramerRao {
    pub product: f64,
    pub variance: f64,
    pub saturated: bool,
}

pub const CR_SATURATION_TOL: f64 = 1e-9;

/// `I σ²` with `σ² = ⟨x²⟩ - ⟨x⟩²`.
///
/// When no first moment is given the mean is taken to be `xi`, since the
/// mean of an eigenstate sits at the translation point.
pub fn cramer_rao_product(fisher: f64, moments: &impl MomentLookup, xi: f64) -> Result<CramerRao> {
    let second = moments
        .moment(2)
        .ok_or_else(|| Error::contract("Cramer-Rao product needs the second moment"))?;
    let mean = moments.moment(1).unwrap_or(xi);
    let variance = second - mean * mean;
    if variance.is_nan() || variance <= 0.0 {
        return Err(Error::domain(format!(
            "variance {variance} is not positive; moments do not belong to a probability density"
        )));
    }
    let product = fisher * variance;
    Ok(CramerRao {
        product,
        variance,
        saturated: (product - 1.0).abs() <= CR_SATURATION_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pot(l: &[(u32, f64)]) -> InfoPotential {
        InfoPotential::from_multipliers(&l.iter().copied().collect()).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(6, 0), 1.0);
        assert_eq!(binomial(6, 6), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(binomial(10, 3), 120.0);
    }

    #[test]
    fn build_potential_examples() {
        let ho = pot(&[(2, -4.0)]);
        assert_eq!(ho.value(1.0), 0.5);
        assert_eq!(ho.value(0.0), 0.0);
        let field = pot(&[(1, 8.0), (2, -4.0)]);
        assert_eq!(field.value(1.0), -0.5);
        assert_eq!(field.derivative(1.0, 1), 0.0);
        assert!(matches!(build_potential(&[(2, 0.0)].into()), Err(Error::Contract(_))));
        assert!(matches!(build_potential(&Multipliers::new()), Err(Error::Contract(_))));
    }

    #[test]
    fn derivatives_of_quartic() {
        let q = pot(&[(4, -8.0)]); // U = x^4
        assert_eq!(q.value(2.0), 16.0);
        assert_eq!(q.derivative(2.0, 1), 32.0);
        assert_eq!(q.derivative(2.0, 2), 48.0);
        assert_eq!(q.derivative(2.0, 4), 24.0);
        assert_eq!(q.derivative(2.0, 5), 0.0);
    }

    #[test]
    fn minimum_examples() {
        let c = potential_minimum(&pot(&[(1, 8.0), (2, -4.0)])).unwrap();
        assert_eq!(c.xi, 1.0);
        assert_eq!(c.u_min, -0.5);
        assert_eq!(potential_minimum(&pot(&[(2, -4.0)])).unwrap().xi, 0.0);
        let q = potential_minimum(&pot(&[(4, -8.0)])).unwrap();
        assert!(q.xi.abs() < 1e-10);
    }

    #[test]
    fn non_confining_potentials_rejected() {
        for l in [
            vec![(1, 1.0)],
            vec![(2, 4.0)],
            vec![(2, -1.0), (3, 1.0)],
            vec![(4, 1.0)],
        ] {
            assert!(matches!(potential_minimum(&pot(&l)), Err(Error::Domain(_))), "{l:?}");
        }
    }

    #[test]
    fn asymmetric_double_well_picks_deeper_side() {
        // U = 0.1 x - x^2 + x^4 / 4: wells near ±√2, the tilt deepens the left one
        let p = pot(&[(1, -0.8), (2, 8.0), (4, -2.0)]);
        let c = potential_minimum(&p).unwrap();
        assert!(c.xi < -1.0);
        assert!(p.derivative(c.xi, 1).abs() <= 1e-10);
        for i in -300..=300 {
            let x = f64::from(i) * 0.01;
            assert!(c.u_min <= p.value(x) + 1e-14);
        }
    }

    #[test]
    fn taylor_examples() {
        let p = pot(&[(1, 8.0), (2, -4.0)]);
        let t = taylor_multipliers(&p, 1.0).unwrap();
        // U(x) = x^2/2 - x = (x-1)^2/2 - 1/2
        assert_eq!(t[&0], 4.0);
        assert_eq!(t[&1], 0.0);
        assert_eq!(t[&2], -4.0);

        let t0 = taylor_multipliers(&p, 0.0).unwrap();
        assert_eq!(t0, [(0, 0.0), (1, 8.0), (2, -4.0)].into());

        let q = pot(&[(4, -8.0)]);
        let tq = taylor_multipliers(&q, 0.0).unwrap();
        assert_eq!(tq[&4], -8.0);
        assert!(tq.range(..4).all(|(_, &v)| v == 0.0));
    }

    #[test]
    fn translate_examples() {
        let m = MomentSet::new([(1, 1.0), (2, 1.5)]).unwrap();
        assert_eq!(translate_moments(&m, 1.0, 1).unwrap(), 0.0);
        assert_eq!(translate_moments(&m, 1.0, 2).unwrap(), 0.5);
        assert_eq!(translate_moments(&m, 0.0, 2).unwrap(), 1.5);
        let only2 = MomentSet::new([(2, 0.5)]).unwrap();
        assert_eq!(translate_moments(&only2, 0.0, 2).unwrap(), 0.5);
        assert!(matches!(translate_moments(&only2, 0.3, 2), Err(Error::Contract(_))));
    }

    #[test]
    fn translated_fisher_examples() {
        let c = ReferenceConstants::unit();
        let tm = |e: &[(u32, f64)]| TranslatedMoments {
            xi: 0.0,
            x_scale: 1.0,
            entries: e.iter().copied().collect(),
        };
        assert_eq!(translated_fisher(&tm(&[(1, 0.0), (2, 0.5)]), &c).unwrap().fisher, 2.0);
        assert_eq!(translated_fisher(&tm(&[(2, 1.0)]), &c).unwrap().fisher, 1.0);
        let r = translated_fisher(&tm(&[(2, 0.5), (4, 1e-14)]), &c).unwrap();
        assert_eq!(r.fisher, 2.0);
        assert_eq!(r.skipped, vec![4]);
        assert!(matches!(
            translated_fisher(&tm(&[(1, 0.3), (2, 0.0)]), &c),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn alpha_shift_examples() {
        let p = pot(&[(1, 8.0), (2, -4.0)]);
        assert_eq!(alpha_shift(4.0, &p, 1.0), 0.0);
        assert_eq!(alpha_unshift(0.0, &p, 1.0), 4.0);
        let ho = pot(&[(2, -4.0)]);
        assert_eq!(alpha_shift(4.0, &ho, 0.0), 4.0);
    }

    #[test]
    fn cramer_rao_examples() {
        let m = MomentSet::new([(2, 0.5)]).unwrap();
        let cr = cramer_rao_product(2.0, &m, 0.0).unwrap();
        assert_eq!(cr.product, 1.0);
        assert!(cr.saturated);

        let m = MomentSet::new([(1, 1.0), (2, 1.5)]).unwrap();
        let cr = cramer_rao_product(2.0, &m, 1.0).unwrap();
        assert_eq!(cr.variance, 0.5);
        assert_eq!(cr.product, 1.0);

        let cr = cramer_rao_product(4.0, &MomentSet::new([(1, 1.0), (2, 1.5)]).unwrap(), 1.0).unwrap();
        assert_eq!(cr.product, 2.0);
        assert!(!cr.saturated);

        let degenerate = MomentSet::new([(1, 2.0), (2, 4.0)]).unwrap();
        assert!(matches!(
            cramer_rao_product(1.0, &degenerate, 2.0),
            Err(Error::Domain(_))
        ));
    }

    fn confining_strategy() -> impl Strategy<Value = InfoPotential> {
        (proptest::collection::vec(-4.0f64..4.0, 3), 0.1f64..4.0, prop::bool::ANY).prop_map(|(low, lead, quartic)| {
            let mut l: Multipliers = low.iter().enumerate().map(|(i, &v)| (i as u32 + 1, v)).collect();
            if quartic {
                l.insert(4, -lead);
            } else {
                l.remove(&3);
                l.insert(2, -lead);
            }
            InfoPotential::from_multipliers(&l).unwrap()
        })
    }

    proptest! {
        #[test]
        fn critical_point_is_global_minimum(p in confining_strategy(), probes in proptest::collection::vec(-1.0f64..1.0, 100)) {
            let c = potential_minimum(&p).unwrap();
            let scale = 1.0 + p.derivative(c.xi, 2).abs();
            prop_assert!(p.derivative(c.xi, 1).abs() <= 1e-10 * scale);
            for t in probes {
                let x = c.xi + 6.0 * t;
                prop_assert!(c.u_min <= p.value(x) + 1e-12 * (1.0 + c.u_min.abs()));
            }
        }

        #[test]
        fn taylor_reconstruction_is_exact(p in confining_strategy(), xi in -3.0f64..3.0, pts in proptest::collection::vec(-5.0f64..5.0, 50)) {
            let t = taylor_multipliers(&p, xi).unwrap();
            // independent route: derivatives of U at ξ divided by k!
            let mut fact = 1.0;
            for (&k, &l) in &t {
                if k > 0 { fact *= f64::from(k); }
                let via_derivative = -8.0 * p.derivative(xi, k) / fact;
                prop_assert!((via_derivative - l).abs() <= 1e-12 * (1.0 + l.abs()) * 10.0);
            }
            let scale: f64 = t.values().map(|v| v.abs()).sum::<f64>();
            for x in pts {
                let u = x - xi;
                let rebuilt: f64 = -t.iter().map(|(&k, &l)| l * u.powi(k as i32)).sum::<f64>() / 8.0;
                let direct = p.value(x);
                let mag = scale * (1.0 + x.abs().max(u.abs())).powi(p.degree() as i32) / 8.0;
                prop_assert!((rebuilt - direct).abs() <= 1e-12 * mag.max(direct.abs()));
            }
            prop_assert_eq!(t[&p.degree()], p.leading_multiplier());
        }

        #[test]
        fn first_taylor_multiplier_vanishes_at_minimum(p in confining_strategy()) {
            let c = potential_minimum(&p).unwrap();
            let t = taylor_multipliers(&p, c.xi).unwrap();
            let scale = 1.0 + p.derivative(c.xi, 2).abs();
            prop_assert!(t[&1].abs() <= 8.0 * 1e-10 * scale);
        }

        #[test]
        fn binomial_second_moment(m1 in -5.0f64..5.0, var in 0.01f64..5.0, xi in -5.0f64..5.0) {
            let m2 = var + m1 * m1;
            let m = MomentSet::new([(1, m1), (2, m2)]).unwrap();
            let direct = m2 - 2.0 * xi * m1 + xi * xi;
            let via = translate_moments(&m, xi, 2).unwrap();
            prop_assert!((via - direct).abs() <= 1e-14 * (m2.abs() + 2.0 * (xi * m1).abs() + xi * xi));
        }
    }
}

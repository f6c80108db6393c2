//! Closed-form solve: moments in, Fisher value, multipliers and the
//! translated-frame quantities out.
//!
//! When the first moment is known the Fisher measure is built in the frame
//! centred on the mean, `I = Σ_{k≥2} C_k |⟨(x-⟨x⟩)^k⟩|^(-2/k)`, and the
//! multipliers follow from the chain rule back to the raw moments. Without
//! a first moment the frame is the origin and this is the plain closed form.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::moments::{
    legendre_alpha, minimal_fisher, term_derivative, MomentLookup, MomentSet, Multipliers, ReferenceConstants,
};
use crate::translation::{
    alpha_unshift, binomial, build_potential, cramer_rao_product, potential_minimum, taylor_multipliers,
    translated_fisher, CramerRao, CriticalPoint, InfoPotential, TranslatedMoments,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormSolution {
    pub moments: MomentSet,
    /// Centre of the frame the Fisher measure was built in (`⟨x⟩` or 0).
    pub frame_center: f64,
    pub fisher: f64,
    pub per_term: BTreeMap<u32, f64>,
    /// Translated moments that vanished and were left out of the sum.
    pub skipped: Vec<u32>,
    /// Multipliers conjugate to the raw moments, one per input order.
    pub lambdas: Multipliers,
    pub alpha: f64,
    pub potential: Option<InfoPotential>,
    pub critical: Option<CriticalPoint>,
    /// `λ*_k` about the critical point, orders `0..=M`.
    pub taylor: Option<Multipliers>,
    /// `⟨(x-ξ)^k⟩` about the critical point.
    pub translated: Option<TranslatedMoments>,
    pub alpha_bar: Option<f64>,
    pub cramer_rao: Option<CramerRao>,
    pub warnings: Vec<String>,
}

impl ClosedFormSolution {
    pub fn xi(&self) -> Option<f64> {
        self.critical.map(|c| c.xi)
    }
}

/// Relative agreement required between the two routes to `ᾱ`.
const ALPHA_BAR_TOL: f64 = 1e-9;

pub fn solve(moments: &MomentSet, constants: &ReferenceConstants) -> Result<ClosedFormSolution> {
    moments.check_fim_domain()?;
    let mut warnings = Vec::new();
    let max_order = moments.max_order().unwrap_or(0);

    let centred = moments.get(1).is_some() && max_order >= 2;
    let (frame_center, fisher, per_term, skipped, lambdas) = if centred {
        let mean = moments.get(1).unwrap_or(0.0);
        if moments.len() as u32 != max_order {
            return Err(Error::contract(format!(
                "with a first moment present the orders must run contiguously 1..={max_order}, got {:?}",
                moments.orders()
            )));
        }
        let frame = TranslatedMoments::from_moments(moments, mean, 1..=max_order)?;
        let tf = translated_fisher(&frame, constants)?;
        // ∂I/∂⟨u^k⟩' then the chain rule ∂⟨u^k⟩'/∂⟨x^i⟩ = binom(k,i) (-mean)^(k-i)
        let frame_lambdas: BTreeMap<u32, f64> = tf
            .per_term
            .keys()
            .map(|&k| (k, term_derivative(k, frame.entries[&k], constants.get(k))))
            .collect();
        let lambdas: Multipliers = (1..=max_order)
            .map(|i| {
                let l = frame_lambdas
                    .range(i.max(2)..)
                    .map(|(&k, &lk)| lk * binomial(k, i) * (-mean).powi((k - i) as i32))
                    .sum();
                (i, l)
            })
            .collect();
        if !tf.skipped.is_empty() {
            warnings.push(format!(
                "translated moments of orders {:?} vanish and were left out of the Fisher sum",
                tf.skipped
            ));
        }
        (mean, tf.fisher, tf.per_term, tf.skipped, lambdas)
    } else {
        let sol = minimal_fisher(moments, constants)?;
        let lambdas = crate::moments::lagrange_multipliers(moments, constants)?;
        (0.0, sol.fisher, sol.per_term, Vec::new(), lambdas)
    };

    let alpha = legendre_alpha(fisher, &lambdas, moments)?;

    if per_term.keys().any(|&k| k >= 3) {
        warnings.push(
            "orders >= 3 use reference constants that the Cramer-Rao argument does not fix; \
             treat agreement with the Schrodinger ground state as diagnostic"
                .into(),
        );
    }

    let mut solution = ClosedFormSolution {
        moments: moments.clone(),
        frame_center,
        fisher,
        per_term,
        skipped,
        lambdas,
        alpha,
        potential: None,
        critical: None,
        taylor: None,
        translated: None,
        alpha_bar: None,
        cramer_rao: None,
        warnings,
    };

    match build_potential(&solution.lambdas) {
        Ok(p) => solution.potential = Some(p),
        Err(e) => solution.warnings.push(format!("no information potential: {e}")),
    }
    if let Some(p) = &solution.potential {
        match potential_minimum(p) {
            Ok(c) => solution.critical = Some(c),
            Err(e) => solution.warnings.push(format!("no critical point: {e}")),
        }
    }
    if let (Some(p), Some(c)) = (solution.potential.clone(), solution.critical) {
        translate_about_minimum(&mut solution, p, c)?;
    }

    if moments.get(2).is_some() {
        let mean_guess = solution.xi().unwrap_or(frame_center);
        match cramer_rao_product(fisher, moments, mean_guess) {
            Ok(cr) => solution.cramer_rao = Some(cr),
            Err(e) => solution.warnings.push(format!("Cramer-Rao product unavailable: {e}")),
        }
    }
    Ok(solution)
}

fn translate_about_minimum(
    solution: &mut ClosedFormSolution,
    potential: InfoPotential,
    c: CriticalPoint,
) -> Result<()> {
    let taylor = taylor_multipliers(&potential, c.xi)?;
    let shifted = alpha_unshift(solution.alpha, &potential, c.xi);
    let scale = solution.moments.x_scale();

    if (c.xi - solution.frame_center).abs() > 1e-8 * (scale + solution.frame_center.abs())
        && solution.moments.get(1).is_some()
    {
        solution.warnings.push(format!(
            "potential minimum {} differs from the mean {}",
            c.xi, solution.frame_center
        ));
    }

    match TranslatedMoments::from_moments(&solution.moments, c.xi, solution.moments.orders()) {
        Ok(tm) => {
            // Legendre transform in the translated frame; only orders with a
            // known translated moment can enter, the rest must be negligible.
            let lambda_scale = taylor
                .values()
                .map(|v| v.abs())
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE);
            let missing = taylor
                .iter()
                .filter(|(&k, &l)| k >= 1 && !tm.entries.contains_key(&k) && l.abs() > 1e-10 * lambda_scale)
                .map(|(&k, _)| k)
                .collect::<Vec<_>>();
            if missing.is_empty() {
                let sub: Multipliers = tm
                    .orders()
                    .iter()
                    .map(|&k| (k, taylor.get(&k).copied().unwrap_or(0.0)))
                    .collect();
                let via_legendre = legendre_alpha(solution.fisher, &sub, &tm)?;
                if (via_legendre - shifted).abs() > ALPHA_BAR_TOL * (1.0 + shifted.abs()) {
                    solution.warnings.push(format!(
                        "translated-frame Legendre transform gives {via_legendre}, shift relation gives {shifted}"
                    ));
                }
                solution.alpha_bar = Some(via_legendre);
            } else {
                solution.alpha_bar = Some(shifted);
            }
            solution.translated = Some(tm);
        }
        Err(e) => {
            solution.warnings.push(format!("translated moments unavailable: {e}"));
            solution.alpha_bar = Some(shifted);
        }
    }
    solution.taylor = Some(taylor);
    Ok(())
}

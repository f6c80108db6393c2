//! Finite-difference ground state of `-½ ψ'' + U(x) ψ = E ψ` (ħ = m = 1)
//! and the Fisher, moment and virial quantities read off the amplitude.
//!
//! This is the independent check on the closed form: the multipliers define
//! `U`, the eigensolver produces `ψ`, and the moments and Fisher values
//! recomputed from `ψ² ` must agree with what went in.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::moments::{
    fisher_from_constraints, fisher_virial_form, MomentLookup, MomentSet, Multipliers, ReferenceConstants,
};
use crate::pipeline::{self, ClosedFormSolution};
use crate::translation::InfoPotential;
use crate::tridiag;

/// Uniform grid `x_min + i h`, `i = 0..n_points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::config(format!(
                "grid bounds [{x_min}, {x_max}] are not an interval"
            )));
        }
        if n_points < 3 {
            return Err(Error::config(format!("grid needs at least 3 nodes, got {n_points}")));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    /// Grid of `n_points` nodes on `[center - half_span, center + half_span]`.
    pub fn centered(center: f64, half_span: f64, n_points: usize) -> Result<Self> {
        if half_span.is_nan() || half_span <= 0.0 {
            return Err(Error::config(format!(
                "grid half-span must be positive, got {half_span}"
            )));
        }
        Self::new(center - half_span, center + half_span, n_points)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.node(i))
    }

    /// Trapezoidal rule for samples on this grid.
    pub fn trapezoid(&self, samples: impl IntoIterator<Item = f64>) -> f64 {
        let last = self.n_points - 1;
        let sum: f64 = samples
            .into_iter()
            .enumerate()
            .map(|(i, v)| if i == 0 || i == last { 0.5 * v } else { v })
            .sum();
        sum * self.spacing()
    }
}

/// Tolerance on `∫ψ² dx = 1`.
pub const NORM_TOL: f64 = 1e-10;
/// Amplitude below which the state counts as decayed at the boundary.
pub const DECAY_TOL: f64 = 1e-8;

/// Real amplitude sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridWavefunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::contract(format!(
                "{} amplitude samples for a grid of {} nodes",
                values.len(),
                grid.n_points()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("amplitude has non-finite samples"));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm_squared(&self) -> f64 {
        self.grid.trapezoid(self.values.iter().map(|v| v * v))
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_squared() - 1.0).abs() <= NORM_TOL
    }

    /// Rescaled so that `∫ψ² dx = 1`.
    pub fn normalized(mut self) -> Result<Self> {
        let n2 = self.norm_squared();
        if !(n2 > 0.0 && n2.is_finite()) {
            return Err(Error::domain("amplitude cannot be normalized (∫ψ² dx = 0)"));
        }
        let s = n2.sqrt();
        self.values.iter_mut().for_each(|v| *v /= s);
        Ok(self)
    }

    fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::contract(format!(
                "amplitude is not normalized: ∫ψ² dx = {}",
                self.norm_squared()
            )))
        }
    }

    /// Largest boundary amplitude; zero for a state that has fully decayed.
    pub fn boundary_amplitude(&self) -> f64 {
        let v = &self.values;
        v[0].abs().max(v[v.len() - 1].abs())
    }
}

/// Lowest eigenpair of the discretized Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub energy: f64,
    pub psi: GridWavefunction,
    pub bisection_steps: usize,
    pub inverse_steps: usize,
    pub warnings: Vec<String>,
}

impl EigenResult {
    /// Normalization multiplier implied by the energy, `α = 8 E₀`.
    pub fn alpha(&self) -> f64 {
        8.0 * self.energy
    }
}

const EIGEN_TOL: f64 = 1e-12;
const MAX_INVERSE_ITERATIONS: usize = 200;

/// Ground state of `-½ d²/dx² + U(x)` with Dirichlet ends, 3-point Laplacian.
pub fn ground_state(potential: &InfoPotential, grid: &Grid) -> Result<EigenResult> {
    if !potential.is_confining() {
        return Err(Error::domain(format!(
            "potential of degree {} is not confining",
            potential.degree()
        )));
    }
    let n = grid.n_points();
    let h = grid.spacing();
    let kinetic = 1.0 / (h * h);
    let diag: Vec<f64> = (1..n - 1).map(|i| kinetic + potential.value(grid.node(i))).collect();
    let off = vec![-0.5 * kinetic; diag.len().saturating_sub(1)];

    let bracket = tridiag::lowest_eigenvalue(&diag, &off, EIGEN_TOL)?;
    let shift = bracket.lo - 1e-10 * bracket.lo.abs().max(1.0);
    let (vector, inverse_steps) = tridiag::inverse_iteration(&diag, &off, shift, MAX_INVERSE_ITERATIONS, EIGEN_TOL)?;
    let energy = bracket.mid();

    let edge = potential.value(grid.x_min()).min(potential.value(grid.x_max()));
    if edge <= energy {
        return Err(Error::domain(format!(
            "grid [{}, {}] ends inside the classically allowed region (U = {edge} <= E = {energy})",
            grid.x_min(),
            grid.x_max()
        )));
    }

    let mut values = Vec::with_capacity(n);
    values.push(0.0);
    values.extend(vector);
    values.push(0.0);
    let peak = values
        .iter()
        .copied()
        .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    if peak < 0.0 {
        values.iter_mut().for_each(|v| *v = -*v);
    }
    let psi = GridWavefunction::new(*grid, values)?.normalized()?;

    let max = psi.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if psi.values().iter().any(|&v| v < -1e-10 * max) {
        return Err(Error::Numeric {
            message: "eigenvector has a node; not the ground state".into(),
            iterations: inverse_steps,
        });
    }

    let mut warnings = Vec::new();
    let near_edge = psi.values()[1].abs().max(psi.values()[n - 2].abs());
    if near_edge > DECAY_TOL {
        warnings.push(format!(
            "ground state has not decayed at the grid edge (|ψ| = {near_edge:e}); widen the grid"
        ));
    }
    Ok(EigenResult {
        energy,
        psi,
        bisection_steps: bracket.iterations,
        inverse_steps,
        warnings,
    })
}

/// How to size the grid for [`self_consistency`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub nodes: usize,
    /// Half-width about the potential minimum; automatic when `None`.
    pub half_span: Option<f64>,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            nodes: 4001,
            half_span: None,
        }
    }
}

/// Height of the potential walls above the estimated energy at the edges.
pub const AUTO_GRID_MARGIN: f64 = 25.0;

/// Grid centred on `center` whose edges sit at `U ≥ E_estimate + 25`,
/// with `E_estimate` from a coarse 801-node solve.
pub fn auto_grid(potential: &InfoPotential, center: f64, nodes: usize) -> Result<Grid> {
    let mut coarse_span = 10.0;
    let estimate = loop {
        let coarse = Grid::centered(center, coarse_span, 801)?;
        match ground_state(potential, &coarse) {
            Ok(r) => break r.energy,
            Err(Error::Domain(_)) if coarse_span < 1e6 && potential.is_confining() => coarse_span *= 4.0,
            Err(e) => return Err(e),
        }
    };
    let target = estimate + AUTO_GRID_MARGIN;
    let below = |y: f64| potential.value(center - y) < target || potential.value(center + y) < target;

    // beyond every extremum U is monotone, so scan inward from a safe radius
    let mut outer = 1.0;
    while below(outer) || outer < center.abs() + extremum_radius(potential) {
        outer *= 2.0;
        if outer > 1e8 {
            return Err(Error::domain("potential does not rise above the energy estimate"));
        }
    }
    const STEPS: usize = 4000;
    let step = outer / STEPS as f64;
    let mut half = step;
    for i in (1..=STEPS).rev() {
        let y = i as f64 * step;
        if below(y) {
            half = y + step;
            break;
        }
    }
    Grid::centered(center, half, nodes)
}

/// Cauchy bound on the roots of `U'`.
fn extremum_radius(potential: &InfoPotential) -> f64 {
    let l = potential.multipliers();
    let m = potential.degree();
    let lead = f64::from(m) * potential.leading_multiplier();
    1.0 + l
        .iter()
        .filter(|(&k, _)| k >= 1 && k < m)
        .map(|(&k, &v)| (f64::from(k) * v / lead).abs())
        .fold(0.0, f64::max)
}

/// Probability density `f = ψ²` on the amplitude's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPdf {
    pub grid: Grid,
    pub density: Vec<f64>,
}

impl GridPdf {
    pub fn integral(&self) -> f64 {
        self.grid.trapezoid(self.density.iter().copied())
    }
}

pub fn pdf_from_amplitude(psi: &GridWavefunction) -> Result<GridPdf> {
    psi.require_normalized()?;
    Ok(GridPdf {
        grid: psi.grid,
        density: psi.values.iter().map(|v| v * v).collect(),
    })
}

/// `∫(ψ')² dx` from differences between neighbouring nodes.
///
/// `(ψ_{i+1} - ψ_i)/h` is the central difference at the cell midpoint, so
/// the sum is the midpoint rule on the staggered grid. It is the exact
/// kinetic term of the 3-point Hamiltonian, which keeps the amplitude,
/// constraint and virial routes consistent to discretization order.
fn gradient_energy(psi: &GridWavefunction) -> f64 {
    let h = psi.grid.spacing();
    psi.values
        .windows(2)
        .map(|w| (w[1] - w[0]) * (w[1] - w[0]))
        .sum::<f64>()
        / h
}

/// Fisher value with a boundary-leakage flag.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeFisher {
    pub fisher: f64,
    pub warning: Option<String>,
}

/// `I = 4 ∫ (ψ')² dx`.
pub fn fisher_from_amplitude(psi: &GridWavefunction) -> Result<AmplitudeFisher> {
    psi.require_normalized()?;
    let edge = psi.boundary_amplitude();
    let warning = (edge > DECAY_TOL)
        .then(|| format!("amplitude has not decayed at the boundary (|ψ| = {edge:e}); Fisher value includes leakage"));
    Ok(AmplitudeFisher {
        fisher: 4.0 * gradient_energy(psi),
        warning,
    })
}

/// `⟨x^k⟩ = ∫ x^k ψ² dx` for each requested order.
pub fn moments_from_amplitude(psi: &GridWavefunction, orders: &[u32]) -> Result<MomentSet> {
    psi.require_normalized()?;
    let grid = psi.grid;
    let entries = orders.iter().map(|&k| {
        let v = grid.trapezoid(grid.nodes().zip(&psi.values).map(|(x, p)| x.powi(k as i32) * p * p));
        (k, v)
    });
    MomentSet::new(entries)
}

/// Both sides of `⟨-d²/dx²⟩ = ⟨x U'(x)⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirialCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

pub fn virial_residual(psi: &GridWavefunction, potential: &InfoPotential) -> Result<VirialCheck> {
    psi.require_normalized()?;
    let lhs = gradient_energy(psi);
    let grid = psi.grid;
    let rhs = grid.trapezoid(
        grid.nodes()
            .zip(&psi.values)
            .map(|(x, p)| x * potential.derivative(x, 1) * p * p),
    );
    Ok(VirialCheck {
        lhs,
        rhs,
        residual: lhs - rhs,
    })
}

/// `|I[ψ] - 4 ⟨x U'(x)⟩_ψ|`: zero when the trial state obeys the virial
/// relation every exact stationary state satisfies.
pub fn approx_quality(psi: &GridWavefunction, potential: &InfoPotential) -> Result<f64> {
    let v = virial_residual(psi, potential)?;
    Ok((4.0 * v.lhs - 4.0 * v.rhs).abs())
}

/// Closed form versus Schrödinger ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub closed_form: ClosedFormSolution,
    pub eigen: EigenResult,
    pub grid: Grid,
    pub recovered: MomentSet,
    /// Recovered minus prescribed moment, per input order.
    pub moment_deltas: BTreeMap<u32, f64>,
    pub fisher_closed_form: f64,
    pub fisher_amplitude: f64,
    pub fisher_constraint: f64,
    pub fisher_virial: f64,
    pub virial: VirialCheck,
    pub warnings: Vec<String>,
}

impl ConsistencyReport {
    pub fn alpha_check(&self) -> f64 {
        self.eigen.alpha()
    }
}

/// Closed form → multipliers → potential → ground state → moments and
/// Fisher values recomputed from the amplitude.
pub fn self_consistency(
    moments: &MomentSet,
    constants: &ReferenceConstants,
    options: GridOptions,
) -> Result<ConsistencyReport> {
    let closed_form = pipeline::solve(moments, constants)?;
    let potential = closed_form
        .potential
        .clone()
        .ok_or_else(|| Error::domain("closed form yields no information potential"))?;
    let critical = closed_form
        .critical
        .ok_or_else(|| Error::domain("information potential is not confining; no ground state exists"))?;

    let grid = match options.half_span {
        Some(span) => Grid::centered(critical.xi, span, options.nodes)?,
        None => auto_grid(&potential, critical.xi, options.nodes)?,
    };
    let eigen = ground_state(&potential, &grid)?;

    let mut orders: Vec<u32> = moments.orders();
    orders.extend(closed_form.lambdas.keys().copied());
    orders.sort_unstable();
    orders.dedup();
    let recovered = moments_from_amplitude(&eigen.psi, &orders)?;
    let moment_deltas = moments
        .entries()
        .iter()
        .map(|&(k, v)| (k, recovered.get(k).unwrap_or(f64::NAN) - v))
        .collect();

    let amp = fisher_from_amplitude(&eigen.psi)?;
    let lambda_moments = MomentSet::new(
        closed_form
            .lambdas
            .keys()
            .map(|&k| (k, recovered.moment(k).unwrap_or(0.0))),
    )?;
    let lambdas: &Multipliers = &closed_form.lambdas;
    let fisher_constraint = fisher_from_constraints(eigen.alpha(), lambdas, &lambda_moments)?;
    let fisher_virial = fisher_virial_form(lambdas, &lambda_moments)?;
    let virial = virial_residual(&eigen.psi, &potential)?;

    let mut warnings = closed_form.warnings.clone();
    warnings.extend(eigen.warnings.iter().cloned());
    warnings.extend(amp.warning);

    Ok(ConsistencyReport {
        fisher_closed_form: closed_form.fisher,
        closed_form,
        grid,
        recovered,
        moment_deltas,
        fisher_amplitude: amp.fisher,
        fisher_constraint,
        fisher_virial,
        virial,
        eigen,
        warnings,
    })
}

/// Reads a `x,psi` CSV with strictly increasing, uniformly spaced `x`.
pub fn read_wavefunction_csv(reader: impl Read) -> Result<GridWavefunction> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::domain(format!("wavefunction CSV: {e}")))?
        .clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "psi" {
        return Err(Error::domain(format!(
            "wavefunction CSV header must be `x,psi`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::domain(format!("wavefunction CSV: {e}")))?;
        let parse = |field: &str| {
            field
                .parse::<f64>()
                .map_err(|e| Error::domain(format!("wavefunction CSV row {}: `{field}`: {e}", line + 2)))
        };
        xs.push(parse(&record[0])?);
        values.push(parse(&record[1])?);
    }
    if xs.len() < 3 {
        return Err(Error::domain(format!(
            "wavefunction CSV has {} rows; at least 3 are needed",
            xs.len()
        )));
    }
    let grid = Grid::new(xs[0], xs[xs.len() - 1], xs.len())?;
    let h = grid.spacing();
    for (i, w) in xs.windows(2).enumerate() {
        let dx = w[1] - w[0];
        if dx.is_nan() || dx <= 0.0 {
            return Err(Error::domain(format!("x is not strictly increasing at row {}", i + 3)));
        }
        if ((dx - h) / h).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "x spacing {dx} at row {} deviates from the uniform spacing {h}",
                i + 3
            )));
        }
    }
    GridWavefunction::new(grid, values)
}

pub fn write_wavefunction_csv(psi: &GridWavefunction, writer: impl Write) -> Result<()> {
    let io = |e: csv::Error| Error::contract(format!("writing wavefunction CSV: {e}"));
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "psi"]).map_err(io)?;
    for (x, p) in psi.grid.nodes().zip(&psi.values) {
        w.write_record([x.to_string(), p.to_string()]).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::contract(format!("writing wavefunction CSV: {e}")))?;
    Ok(())
}

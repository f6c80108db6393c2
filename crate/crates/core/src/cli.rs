//! Command-line front end: JSON requests in, deterministic JSON reports out.
//!
//! Exit codes: 0 success, 1 usage error, 2 domain error, 3 numeric failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Error;
use crate::moments::{MomentSet, Multipliers, ReferenceConstants};
use crate::pipeline::{self, ClosedFormSolution};
use crate::schrodinger::{self, ConsistencyReport, GridOptions, GridWavefunction};
use crate::translation::InfoPotential;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Domain(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Contract(_) => CliError::Domain(e.to_string()),
            Error::Config(_) => CliError::Usage(e.to_string()),
            Error::Numeric { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentEntry {
    pub k: u32,
    pub value: f64,
}

/// `{"moments": [{"k": .., "value": ..}], "x_scale": .., "constants": {"k": C_k}}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveRequest {
    pub moments: Vec<MomentEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<BTreeMap<String, f64>>,
}

impl SolveRequest {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let req: SolveRequest =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid request: {e}")))?;
        if req.moments.is_empty() {
            return Err(CliError::Usage("request needs at least one moment".into()));
        }
        if let Some(&MomentEntry { k: 0, .. }) = req.moments.iter().find(|m| m.k == 0) {
            return Err(CliError::Usage("moment orders start at 1".into()));
        }
        Ok(req)
    }

    pub fn moment_set(&self) -> Result<MomentSet, CliError> {
        MomentSet::with_scale(self.moments.iter().map(|m| (m.k, m.value)), self.x_scale.unwrap_or(1.0)).map_err(|e| {
            match e {
                Error::Contract(msg) => CliError::Usage(msg),
                other => other.into(),
            }
        })
    }

    pub fn reference_constants(&self) -> Result<ReferenceConstants, CliError> {
        let Some(map) = &self.constants else {
            return Ok(ReferenceConstants::unit());
        };
        let parsed = map
            .iter()
            .map(|(k, &c)| {
                k.parse::<u32>()
                    .map(|k| (k, c))
                    .map_err(|_| CliError::Usage(format!("constant key `{k}` is not a moment order")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        ReferenceConstants::from_overrides(parsed).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CramerRaoBlock {
    pub product: f64,
    pub variance: f64,
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub x_min: f64,
    pub x_max: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VirialBlock {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenBlock {
    pub energy: f64,
    pub alpha_check: f64,
    pub grid: GridBlock,
    pub recovered_moments: BTreeMap<u32, f64>,
    pub moment_deltas: BTreeMap<u32, f64>,
    pub fisher_closed_form: f64,
    pub fisher_amplitude: f64,
    pub fisher_constraint: f64,
    pub fisher_virial: f64,
    pub virial: VirialBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveReport {
    pub fisher: f64,
    pub per_term: BTreeMap<u32, f64>,
    pub lambdas: BTreeMap<u32, f64>,
    pub alpha: f64,
    pub alpha_bar: Option<f64>,
    pub xi: Option<f64>,
    pub u_min: Option<f64>,
    pub frame_center: f64,
    pub taylor_lambdas: Option<BTreeMap<u32, f64>>,
    pub translated_moments: Option<BTreeMap<u32, f64>>,
    pub skipped_orders: Vec<u32>,
    pub cramer_rao: Option<CramerRaoBlock>,
    pub x_scale: f64,
    pub eigensolver: Option<EigenBlock>,
    pub warnings: Vec<String>,
}

impl SolveReport {
    fn from_solution(s: &ClosedFormSolution) -> Self {
        SolveReport {
            fisher: s.fisher,
            per_term: s.per_term.clone(),
            lambdas: s.lambdas.clone(),
            alpha: s.alpha,
            alpha_bar: s.alpha_bar,
            xi: s.critical.map(|c| c.xi),
            u_min: s.critical.map(|c| c.u_min),
            frame_center: s.frame_center,
            taylor_lambdas: s.taylor.clone(),
            translated_moments: s.translated.as_ref().map(|t| t.entries.clone()),
            skipped_orders: s.skipped.clone(),
            cramer_rao: s.cramer_rao.map(|c| CramerRaoBlock {
                product: c.product,
                variance: c.variance,
                saturated: c.saturated,
            }),
            x_scale: s.moments.x_scale(),
            eigensolver: None,
            warnings: s.warnings.clone(),
        }
    }

    fn from_consistency(r: &ConsistencyReport) -> Self {
        let mut report = Self::from_solution(&r.closed_form);
        report.eigensolver = Some(EigenBlock {
            energy: r.eigen.energy,
            alpha_check: r.alpha_check(),
            grid: GridBlock {
                x_min: r.grid.x_min(),
                x_max: r.grid.x_max(),
                nodes: r.grid.n_points(),
            },
            recovered_moments: r.recovered.entries().iter().copied().collect(),
            moment_deltas: r.moment_deltas.clone(),
            fisher_closed_form: r.fisher_closed_form,
            fisher_amplitude: r.fisher_amplitude,
            fisher_constraint: r.fisher_constraint,
            fisher_virial: r.fisher_virial,
            virial: VirialBlock {
                lhs: r.virial.lhs,
                rhs: r.virial.rhs,
                residual: r.virial.residual,
            },
        });
        report.warnings = r.warnings.clone();
        report
    }
}

pub fn cmd_solve(request: &SolveRequest) -> Result<SolveReport, CliError> {
    let moments = request.moment_set()?;
    let constants = request.reference_constants()?;
    let solution = pipeline::solve(&moments, &constants)?;
    Ok(SolveReport::from_solution(&solution))
}

/// Verification report together with the ground-state amplitude.
pub fn verify_with_state(
    request: &SolveRequest,
    grid: GridOptions,
) -> Result<(SolveReport, GridWavefunction), CliError> {
    let moments = request.moment_set()?;
    let constants = request.reference_constants()?;
    let r = schrodinger::self_consistency(&moments, &constants, grid)?;
    Ok((SolveReport::from_consistency(&r), r.eigen.psi))
}

pub fn cmd_verify(request: &SolveRequest, grid: GridOptions) -> Result<SolveReport, CliError> {
    verify_with_state(request, grid).map(|(report, _)| report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradeReport {
    pub score: f64,
    pub fisher: f64,
    pub virial: VirialBlock,
    pub input_norm_squared: f64,
    pub nodes: usize,
    pub warnings: Vec<String>,
}

/// Parses `k=v[,k=v…]`.
pub fn parse_lambdas(text: &str) -> Result<Multipliers, CliError> {
    let mut out = Multipliers::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("multiplier `{part}` is not of the form k=v")))?;
        let k: u32 = k
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("multiplier order `{k}` is not an integer")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("multiplier value `{v}` is not a number")))?;
        if out.insert(k, v).is_some() {
            return Err(CliError::Usage(format!("multiplier order {k} given twice")));
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("at least one multiplier is required".into()));
    }
    Ok(out)
}

pub fn cmd_grade(csv: impl std::io::Read, lambdas: &Multipliers) -> Result<GradeReport, CliError> {
    let potential = InfoPotential::from_multipliers(lambdas)?;
    let raw = schrodinger::read_wavefunction_csv(csv)?;
    let input_norm_squared = raw.norm_squared();
    let psi = raw.normalized()?;
    let fisher = schrodinger::fisher_from_amplitude(&psi)?;
    let v = schrodinger::virial_residual(&psi, &potential)?;
    let score = schrodinger::approx_quality(&psi, &potential)?;
    Ok(GradeReport {
        score,
        fisher: fisher.fisher,
        virial: VirialBlock {
            lhs: v.lhs,
            rhs: v.rhs,
            residual: v.residual,
        },
        input_norm_squared,
        nodes: psi.grid().n_points(),
        warnings: fisher.warning.into_iter().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoParameters {
    pub omega: f64,
    pub q: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoCheck {
    pub quantity: String,
    pub expected: f64,
    pub computed: f64,
    pub abs_error: f64,
    pub tolerance: f64,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoReport {
    pub demo: String,
    pub parameters: DemoParameters,
    pub checks: Vec<DemoCheck>,
    pub all_matched: bool,
    pub report: SolveReport,
}

/// Tolerance on closed-form quantities in the demos.
pub const DEMO_CLOSED_FORM_TOL: f64 = 1e-9;
/// Tolerance on eigensolver quantities in the demos.
pub const DEMO_EIGEN_TOL: f64 = 1e-5;

/// Prior knowledge of the two worked examples.
///
/// `ho`: `⟨x²⟩ = 1/2ω`. `ho-field`: `⟨x⟩ = qε/ω²`, `⟨x²⟩ = 1/2ω + (qε/ω²)²`;
/// with `qε = 0` the vanishing first moment is left out.
pub fn demo_request(name: &str, omega: f64, q: f64, eps: f64) -> Result<SolveRequest, CliError> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(CliError::Domain(format!("omega must be positive, got {omega}")));
    }
    if !(q.is_finite() && eps.is_finite()) {
        return Err(CliError::Domain("q and eps must be finite".into()));
    }
    let variance = 1.0 / (2.0 * omega);
    let moments = match name {
        "ho" => vec![MomentEntry { k: 2, value: variance }],
        "ho-field" => {
            let shift = q * eps / (omega * omega);
            if shift == 0.0 {
                vec![MomentEntry { k: 2, value: variance }]
            } else {
                vec![
                    MomentEntry { k: 1, value: shift },
                    MomentEntry {
                        k: 2,
                        value: variance + shift * shift,
                    },
                ]
            }
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown demo `{other}` (expected ho or ho-field)"
            )))
        }
    };
    Ok(SolveRequest {
        moments,
        x_scale: None,
        constants: None,
    })
}

fn check(quantity: &str, expected: f64, computed: f64, tolerance: f64) -> DemoCheck {
    let abs_error = (computed - expected).abs();
    DemoCheck {
        quantity: quantity.into(),
        expected,
        computed,
        abs_error,
        tolerance,
        matched: abs_error <= tolerance * expected.abs().max(1.0),
    }
}

pub fn cmd_demo(name: &str, omega: f64, q: f64, eps: f64, grid: GridOptions) -> Result<DemoReport, CliError> {
    let request = demo_request(name, omega, q, eps)?;
    let report = cmd_verify(&request, grid)?;
    let eig = report
        .eigensolver
        .as_ref()
        .ok_or_else(|| CliError::Numeric("eigensolver block missing".into()))?;

    let qe = if name == "ho" { 0.0 } else { q * eps };
    let shift = qe / (omega * omega);
    let alpha = 4.0 * omega - 4.0 * qe * qe / (omega * omega);
    let lambda = |k: u32| report.lambdas.get(&k).copied().unwrap_or(0.0);
    let cf = DEMO_CLOSED_FORM_TOL;
    let mut checks = vec![
        check("fisher", 2.0 * omega, report.fisher, cf),
        check("lambda_1", 8.0 * qe, lambda(1), cf),
        check("lambda_2", -4.0 * omega * omega, lambda(2), cf),
        check("alpha", alpha, report.alpha, cf),
        check("alpha_bar", 4.0 * omega, report.alpha_bar.unwrap_or(f64::NAN), cf),
        check("xi", shift, report.xi.unwrap_or(f64::NAN), cf),
        check(
            "translated_u2",
            1.0 / (2.0 * omega),
            report
                .translated_moments
                .as_ref()
                .and_then(|t| t.get(&2).copied())
                .unwrap_or(f64::NAN),
            cf,
        ),
        check(
            "cramer_rao_product",
            1.0,
            report.cramer_rao.as_ref().map(|c| c.product).unwrap_or(f64::NAN),
            cf,
        ),
        check("energy", alpha / 8.0, eig.energy, DEMO_EIGEN_TOL),
        check(
            "recovered_x2",
            1.0 / (2.0 * omega) + shift * shift,
            eig.recovered_moments.get(&2).copied().unwrap_or(f64::NAN),
            DEMO_EIGEN_TOL,
        ),
    ];
    if shift != 0.0 {
        checks.push(check(
            "recovered_x1",
            shift,
            eig.recovered_moments.get(&1).copied().unwrap_or(f64::NAN),
            DEMO_EIGEN_TOL,
        ));
    }
    let all_matched = checks.iter().all(|c| c.matched);
    Ok(DemoReport {
        demo: name.into(),
        parameters: DemoParameters { omega, q, eps },
        checks,
        all_matched,
        report,
    })
}

fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round_sig(x)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with sorted keys and floats rounded to 12 significant digits.
pub fn render_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("reports serialize to JSON");
    let mut s = serde_json::to_string_pretty(&round_value(v)).expect("JSON values render");
    s.push('\n');
    s
}

#[derive(Debug, Parser)]
#[command(
    name = "minfisher",
    version,
    about = "Minimal Fisher information from moment constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form Fisher value, multipliers and translated frame.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve, then cross-check against the Schrödinger ground state.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 4001)]
        grid_nodes: usize,
        /// Half-width of the grid about the potential minimum (automatic if omitted).
        #[arg(long)]
        grid_span: Option<f64>,
        /// Write the ground-state amplitude as `x,psi` CSV.
        #[arg(long)]
        psi_out: Option<PathBuf>,
    },
    /// Score a trial wavefunction against the virial relation.
    Grade {
        #[arg(long)]
        psi: PathBuf,
        /// Multipliers as k=v[,k=v...]
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
    },
    /// Reproduce a worked example (`ho` or `ho-field`).
    Demo {
        name: String,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        omega: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        q: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        eps: f64,
        #[arg(long, default_value_t = 4001)]
        grid_nodes: usize,
    },
}

fn read_request(path: &Path) -> Result<SolveRequest, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    SolveRequest::from_json(&text)
}

fn emit(text: &str, output: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    match output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
        }
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("cannot write output: {e}"))),
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Solve { input, output } => {
            let report = cmd_solve(&read_request(&input)?)?;
            emit(&render_json(&report), output.as_deref(), out)
        }
        Command::Verify {
            input,
            output,
            grid_nodes,
            grid_span,
            psi_out,
        } => {
            let options = GridOptions {
                nodes: grid_nodes,
                half_span: grid_span,
            };
            let (report, psi) = verify_with_state(&read_request(&input)?, options)?;
            if let Some(path) = psi_out {
                let file = std::fs::File::create(&path)
                    .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
                schrodinger::write_wavefunction_csv(&psi, file)?;
            }
            emit(&render_json(&report), output.as_deref(), out)
        }
        Command::Grade { psi, lambda } => {
            let lambdas = parse_lambdas(&lambda)?;
            let file = std::fs::File::open(&psi)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", psi.display())))?;
            let report = cmd_grade(file, &lambdas)?;
            emit(&render_json(&report), None, out)
        }
        Command::Demo {
            name,
            omega,
            q,
            eps,
            grid_nodes,
        } => {
            let options = GridOptions {
                nodes: grid_nodes,
                half_span: None,
            };
            let report = cmd_demo(&name, omega, q, eps, options)?;
            emit(&render_json(&report), None, out)?;
            if report.all_matched {
                Ok(())
            } else {
                Err(CliError::Numeric(format!(
                    "demo `{name}` did not reproduce every expected value"
                )))
            }
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(json: &str) -> SolveRequest {
        SolveRequest::from_json(json).unwrap()
    }

    #[test]
    fn solve_examples() {
        let r = cmd_solve(&request(r#"{"moments": [{"k": 2, "value": 0.5}]}"#)).unwrap();
        assert_eq!(r.fisher, 2.0);
        assert_eq!(r.lambdas[&2], -4.0);
        assert_eq!(r.alpha, 4.0);

        let r = cmd_solve(&request(
            r#"{"moments": [{"k": 1, "value": 1.0}, {"k": 2, "value": 1.5}]}"#,
        ))
        .unwrap();
        assert_eq!(r.xi, Some(1.0));
        assert_eq!(r.translated_moments.as_ref().unwrap()[&2], 0.5);
        assert_eq!(r.fisher, 2.0);
        assert_eq!(r.lambdas[&1], 8.0);
        assert_eq!(r.lambdas[&2], -4.0);
        assert_eq!(r.alpha, 0.0);
        assert_eq!(r.alpha_bar, Some(4.0));

        let err = cmd_solve(&request(r#"{"moments": [{"k": 2, "value": 0.0}]}"#)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("order 2"));
    }

    #[test]
    fn request_validation() {
        for bad in [
            r#"{"moments": []}"#,
            r#"{"moments": [{"k": 2, "value": 0.5}], "extra": 1}"#,
            r#"{"moments": [{"k": 2, "value": 0.5, "sign": 1}]}"#,
            r#"{"moments": [{"k": 0, "value": 0.5}]}"#,
            r#"not json"#,
        ] {
            assert_eq!(SolveRequest::from_json(bad).unwrap_err().exit_code(), 1, "{bad}");
        }
        let dup = request(r#"{"moments": [{"k": 2, "value": 0.5}, {"k": 2, "value": 0.7}]}"#);
        assert_eq!(cmd_solve(&dup).unwrap_err().exit_code(), 1);
        let bad_scale = request(r#"{"moments": [{"k": 2, "value": 0.5}], "x_scale": 0.0}"#);
        assert_eq!(cmd_solve(&bad_scale).unwrap_err().exit_code(), 1);
        let bad_c = request(r#"{"moments": [{"k": 2, "value": 0.5}], "constants": {"two": 1.0}}"#);
        assert_eq!(cmd_solve(&bad_c).unwrap_err().exit_code(), 1);
        let neg_c = request(r#"{"moments": [{"k": 2, "value": 0.5}], "constants": {"2": -1.0}}"#);
        assert_eq!(cmd_solve(&neg_c).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn constants_override_is_applied() {
        let r = cmd_solve(&request(
            r#"{"moments": [{"k": 2, "value": 0.5}], "constants": {"2": 3.0}}"#,
        ))
        .unwrap();
        assert_eq!(r.fisher, 6.0);
    }

    #[test]
    fn error_mapping_covers_every_exit_code() {
        assert_eq!(CliError::from(Error::Config("x".into())).exit_code(), 1);
        assert_eq!(CliError::from(Error::Domain("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(Error::Contract("x".into())).exit_code(), 2);
        let numeric = Error::Numeric {
            message: "x".into(),
            iterations: 200,
        };
        assert_eq!(CliError::from(numeric).exit_code(), 3);
    }

    #[test]
    fn verify_examples() {
        let r = cmd_verify(
            &request(r#"{"moments": [{"k": 2, "value": 0.5}]}"#),
            GridOptions::default(),
        )
        .unwrap();
        let e = r.eigensolver.unwrap();
        assert!((e.energy - 0.5).abs() < 1e-6);
        assert!(e.moment_deltas[&2].abs() <= 1e-5);

        let r = cmd_verify(
            &request(r#"{"moments": [{"k": 1, "value": 1.0}, {"k": 2, "value": 1.5}]}"#),
            GridOptions::default(),
        )
        .unwrap();
        assert!(r.eigensolver.unwrap().energy.abs() < 1e-6);

        let r = cmd_verify(
            &request(r#"{"moments": [{"k": 4, "value": 1.0}]}"#),
            GridOptions::default(),
        )
        .unwrap();
        assert!(!r.warnings.is_empty());
        assert!(r.eigensolver.unwrap().moment_deltas[&4].abs() > 0.0);

        let err = cmd_verify(
            &request(r#"{"moments": [{"k": 2, "value": 1.0}, {"k": 3, "value": 0.5}]}"#),
            GridOptions::default(),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn lambda_parsing() {
        assert_eq!(parse_lambdas("2=-4").unwrap(), [(2, -4.0)].into());
        assert_eq!(parse_lambdas("1=8, 2=-4").unwrap(), [(1, 8.0), (2, -4.0)].into());
        assert!(parse_lambdas("").is_err());
        assert!(parse_lambdas("2").is_err());
        assert!(parse_lambdas("a=1").is_err());
        assert!(parse_lambdas("2=1,2=3").is_err());
    }

    #[test]
    fn demo_examples() {
        let d = cmd_demo("ho", 1.0, 1.0, 1.0, GridOptions::default()).unwrap();
        assert!(d.all_matched, "{:?}", d.checks);
        let d = cmd_demo("ho-field", 1.0, 1.0, 1.0, GridOptions::default()).unwrap();
        assert!(d.all_matched, "{:?}", d.checks);
        let d = cmd_demo("ho", 2.0, 1.0, 1.0, GridOptions::default()).unwrap();
        assert!((d.report.fisher - 4.0).abs() < 1e-12);
        assert!((d.report.alpha - 8.0).abs() < 1e-12);
        assert_eq!(
            cmd_demo("box", 1.0, 1.0, 1.0, GridOptions::default())
                .unwrap_err()
                .exit_code(),
            1
        );
        assert_eq!(
            cmd_demo("ho", -1.0, 1.0, 1.0, GridOptions::default())
                .unwrap_err()
                .exit_code(),
            2
        );
    }

    #[test]
    fn rendering_is_rounded_and_sorted() {
        #[derive(Serialize)]
        struct T {
            zeta: f64,
            alpha: f64,
            n: usize,
            neg_zero: f64,
            nan: f64,
        }
        let s = render_json(&T {
            zeta: 0.1 + 0.2,
            alpha: 1.0 / 3.0,
            n: 7,
            neg_zero: -0.0,
            nan: f64::NAN,
        });
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
        assert!(s.contains("\"zeta\": 0.3\n"), "{s}");
        assert!(s.contains("0.333333333333"), "{s}");
        assert!(!s.contains("0.3333333333333"), "{s}");
        assert!(s.contains("\"n\": 7"));
        assert!(s.contains("\"neg_zero\": 0.0"));
        assert!(s.contains("\"nan\": null"));
    }
}

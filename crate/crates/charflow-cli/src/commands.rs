//! The six subcommands. Every command prints one JSON report to stdout that
//! embeds the resolved configuration and the library version, writes the same
//! report (plus any data files) into the output directory, and returns the
//! process exit code: 0 when every checked identity holds, 1 when at least
//! one fails, 4 after a singular abort. Configuration and computation errors
//! are raised as [`charflow::Error`] and mapped by the caller.

use std::fs;
use std::path::{Path, PathBuf};

use charflow::algebra::{rat_from_str, rat_to_string, Rat};
use charflow::character::{CanonicalParams, GridFamily, GridSpec, SigmaGrid};
use charflow::identity::{
    all_pass, verify_bilinear_system, verify_difference_system, IdentityReport,
};
use charflow::lax::{accessory_count, lax_from_point, spectral_type, SigmaLax};
use charflow::phase::{
    integrate, integrate_partial, pvi_dictionary, pvi_reports, verify_flow_system,
    GarnierTransform, HamiltonianSystem, IntegratorOptions, SigmaPhase, Trajectory,
};
use charflow::symmetry::{
    check_relations, symplectic_residual, transport_solution, word_params, RootParams,
    SymmetryWord,
};
use charflow::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{RunConfig, Tolerances};

/// Resolved invocation context shared by all commands.
pub struct Ctx {
    pub config: RunConfig,
    pub mode: Mode,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub command: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

impl Ctx {
    fn require_exact(&self) -> Result<()> {
        if self.mode != Mode::Exact {
            return Err(Error::invalid(format!(
                "`{}` certifies exact identities and supports only --mode exact",
                self.command
            )));
        }
        Ok(())
    }

    fn family(&self) -> Result<GridFamily> {
        let (theta, nu, nu_prime) = self.config.grid_data()?;
        Ok(GridFamily::new(GridSpec::new(theta, nu, nu_prime)?))
    }

    /// Canonical parameters from explicit `e`/`kappa` lists when given,
    /// otherwise from the configured grid.
    fn params(&self) -> Result<CanonicalParams> {
        if let (Some(e), Some(kappa)) = (&self.config.e, &self.config.kappa) {
            let theta = match &self.config.theta {
                Some(t) => crate::config::parse_rat_list(t, "theta")?,
                None => {
                    return Err(Error::invalid(
                        "explicit e/kappa lists also need a theta list",
                    ))
                }
            };
            return CanonicalParams::new(
                crate::config::parse_rat_list(e, "e")?,
                crate::config::parse_rat_list(kappa, "kappa")?,
                theta,
            );
        }
        let family = self.family()?;
        family.base().require_nonzero()?;
        Ok(CanonicalParams::from_grid(&family.base()))
    }

    fn tolerances(&self) -> Tolerances {
        self.config.tolerances()
    }

    /// Prints the report to stdout and writes `<command>-report.json` plus
    /// any extra files into the output directory.
    fn emit(&self, body: serde_json::Value) -> Result<()> {
        let report = json!({
            "tool": {"name": "charflow", "version": charflow::VERSION},
            "command": self.command,
            "mode": self.mode.name(),
            "seed": self.seed,
            "config": serde_json::to_value(&self.config)
                .map_err(|e| Error::invalid(format!("config serialization: {e}")))?,
            "result": body,
        });
        let text = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::invalid(format!("report serialization: {e}")))?;
        println!("{text}");
        self.write_file(&format!("{}-report.json", self.command), &text)?;
        Ok(())
    }

    fn write_file(&self, name: &str, contents: &str) -> Result<()> {
        fs::create_dir_all(&self.out_dir).map_err(|e| {
            Error::invalid(format!(
                "cannot create output directory {}: {e}",
                self.out_dir.display()
            ))
        })?;
        let path = self.out_dir.join(name);
        fs::write(&path, contents)
            .map_err(|e| Error::invalid(format!("cannot write {}: {e}", path.display())))
    }
}

fn reports_json(reports: &[IdentityReport]) -> serde_json::Value {
    serde_json::to_value(reports).unwrap_or(serde_json::Value::Null)
}

fn failing_ids(reports: &[IdentityReport]) -> Vec<String> {
    reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{}{}", r.id, compact_indices(&r.indices)))
        .collect()
}

fn compact_indices(indices: &serde_json::Value) -> String {
    match indices {
        serde_json::Value::Null => String::new(),
        other => format!("[{other}]"),
    }
}

fn rat_strings(values: &[Rat]) -> Vec<String> {
    values.iter().map(rat_to_string).collect()
}

fn params_json(params: &CanonicalParams) -> serde_json::Value {
    let roots = RootParams::from_canonical(params);
    json!({
        "e": rat_strings(params.e_list()),
        "kappa": rat_strings(params.kappa_list()),
        "theta": rat_strings(params.theta()),
        "roots": roots.to_json(),
    })
}

fn grid_summary(family: &GridFamily) -> serde_json::Value {
    let spec = family.spec();
    json!({
        "L": spec.l(),
        "N": spec.n(),
        "theta": rat_strings(spec.theta()),
        "nu": spec.nu().components(),
        "nu_prime": spec.nu_prime().components(),
    })
}

/// Exit code from a pass flag, with the failing identity names echoed on
/// stderr so a failing run names its reason even when stdout is piped.
fn finish(pass: bool, reports: &[IdentityReport], command: &str) -> i32 {
    if pass {
        0
    } else {
        eprintln!(
            "{command}: failing identities: {}",
            failing_ids(reports).join(", ")
        );
        1
    }
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

pub fn cmd_certify(ctx: &Ctx) -> Result<i32> {
    ctx.require_exact()?;
    let family = ctx.family()?;
    family.base().require_nonzero()?;
    if let Some(corrupt) = &ctx.config.corrupt {
        let factor = rat_from_str(&corrupt.factor)?;
        let tampered: SigmaGrid =
            family
                .base()
                .with_scaled_cell(corrupt.row, corrupt.col, &factor);
        family.override_base(tampered);
    }

    let mut reports = Vec::new();
    reports.extend(verify_bilinear_system(&family));
    reports.extend(verify_difference_system(&family));
    reports.extend(verify_flow_system(&family)?);

    let phase = SigmaPhase::new(&family)?;
    let params = CanonicalParams::from_grid(&family.base());
    let sys = HamiltonianSystem::new(params)?;
    reports.extend(sys.canonical_residuals(&phase)?);

    let lax = SigmaLax::new(&phase)?;
    reports.extend(lax.structure_reports()?);
    reports.extend(lax.deformation_reports()?);
    // Reference only: the residue-by-residue derivative comparison in the
    // plain (ungauged) reading; its mismatch is reported but not gated.
    let measured = lax.schlesinger_plain_reports();

    let pass = all_pass(&reports);
    ctx.emit(json!({
        "grid": grid_summary(&family),
        "corrupted": ctx.config.corrupt.is_some(),
        "identities": reports_json(&reports),
        "reference_only": reports_json(&measured),
        "failing": failing_ids(&reports),
        "pass": pass,
    }))?;
    Ok(finish(pass, &reports, "certify"))
}

// ---------------------------------------------------------------------------
// integrate
// ---------------------------------------------------------------------------

/// Chart-ordered state of the exact rational solution at the deformation
/// point `s`, evaluated through real L-th roots of the s-values.
fn solution_state(phase: &SigmaPhase, l: usize, n: usize, svals: &[f64]) -> Result<Vec<f64>> {
    let mut tvals = vec![1.0];
    for &s in svals {
        if s <= 0.0 && l % 2 == 0 {
            return Err(Error::invalid(format!(
                "cannot take an even real root of s = {s}; give an explicit start state"
            )));
        }
        tvals.push(s.signum() * s.abs().powf(1.0 / l as f64));
    }
    let mut out = Vec::new();
    for sym in 0..2 {
        for slot in 1..l {
            for i in 1..=n {
                let f = if sym == 0 {
                    phase.q(i, slot as i64)?
                } else {
                    phase.p(i, slot as i64)?
                };
                out.push(f.eval_f64(&tvals)?);
            }
        }
    }
    Ok(out)
}

/// Largest | H_i(sample) - trace formula | over the trajectory, comparing the
/// polynomial Hamiltonian recorded during integration with the residue-matrix
/// trace evaluated independently at the same float point.
fn trace_mismatch(params: &CanonicalParams, traj: &Trajectory) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let stride = (traj.samples.len() / 32).max(1);
    for sample in traj.samples.iter().step_by(stride) {
        let plax = lax_from_point(params, &sample.s, &sample.state)?;
        for (i, h) in sample.h.iter().enumerate() {
            let tr = plax.h_trace(i + 1)?;
            worst = worst.max((h - tr).abs());
        }
    }
    Ok(worst)
}

/// Integrates from the first to the last waypoint along two staircase routes
/// (raising s_1 first versus raising s_N first) and returns the maximum
/// difference between the endpoint states.
fn two_route_error(
    sys: &HamiltonianSystem,
    state0: &[f64],
    a: &[f64],
    b: &[f64],
    samples: usize,
    opts: &IntegratorOptions,
) -> Result<f64> {
    let n = a.len();
    let mut forward = vec![a.to_vec()];
    for k in 1..=n {
        let mut w = b[..k].to_vec();
        w.extend_from_slice(&a[k..]);
        forward.push(w);
    }
    let mut backward = vec![a.to_vec()];
    for k in 1..=n {
        let mut w = a[..n - k].to_vec();
        w.extend_from_slice(&b[n - k..]);
        backward.push(w);
    }
    let t1 = integrate(sys, state0, &forward, samples, opts)?;
    let t2 = integrate(sys, state0, &backward, samples, opts)?;
    let e1 = &t1.last().state;
    let e2 = &t2.last().state;
    Ok(e1
        .iter()
        .zip(e2)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

pub fn cmd_integrate(ctx: &Ctx) -> Result<i32> {
    let family = ctx.family()?;
    family.base().require_nonzero()?;
    let spec_l = family.spec().l();
    let spec_n = family.spec().n();
    let phase = SigmaPhase::new(&family)?;
    let params = CanonicalParams::from_grid(&family.base());
    let sys = HamiltonianSystem::new(params.clone())?;

    let path = ctx
        .config
        .path
        .as_ref()
        .ok_or_else(|| Error::invalid("integrate needs a `path` section with waypoints"))?;
    if path.waypoints.is_empty() {
        return Err(Error::invalid("the path needs at least one waypoint"));
    }
    let mut waypoints = Vec::with_capacity(path.waypoints.len());
    for w in &path.waypoints {
        if w.len() != spec_n {
            return Err(Error::invalid(format!(
                "every waypoint must list {spec_n} deformation values, got {}",
                w.len()
            )));
        }
        waypoints.push(w.iter().map(|x| x.to_f64()).collect::<Result<Vec<_>>>()?);
    }

    let tol = ctx.tolerances();
    let opts = IntegratorOptions {
        rtol: tol.rtol,
        atol: tol.atol,
        singular_margin: tol.singular_margin,
        max_steps: tol.max_steps,
    };

    let (state0, from_solution) = match &ctx.config.point {
        Some(p) => (
            p.state.iter().map(|x| x.to_f64()).collect::<Result<Vec<_>>>()?,
            false,
        ),
        None => (
            solution_state(&phase, spec_l, spec_n, &waypoints[0])?,
            true,
        ),
    };

    let (traj, outcome) = integrate_partial(&sys, &state0, &waypoints, path.samples, &opts);
    ctx.write_file("trajectory.csv", &traj.to_csv())?;

    if let Err(err) = outcome {
        return match err {
            Error::SingularAbort { margin, at, detail } => {
                let last = traj.samples.last().map(|s| {
                    json!({
                        "path_param": s.path_param,
                        "s": s.s,
                        "state": s.state,
                        "h": s.h,
                    })
                });
                ctx.emit(json!({
                    "grid": grid_summary(&family),
                    "samples": traj.samples.len(),
                    "singular_abort": {
                        "margin": margin,
                        "at": at,
                        "detail": detail,
                        "last_sample": last,
                    },
                    "pass": false,
                }))?;
                eprintln!("integrate: singular abort at path parameter {at}: {detail}");
                Ok(4)
            }
            other => Err(other),
        };
    }

    let mismatch = trace_mismatch(&params, &traj)?;
    let mut pass = mismatch <= tol.float_check;
    let mut diagnostics = json!({
        "samples": traj.samples.len(),
        "steps_accepted": traj.steps_accepted,
        "steps_rejected": traj.steps_rejected,
        "trace_hamiltonian_mismatch": mismatch,
    });

    if from_solution {
        let exact_end = solution_state(&phase, spec_l, spec_n, waypoints.last().unwrap())?;
        let err = traj
            .last()
            .state
            .iter()
            .zip(&exact_end)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        diagnostics["endpoint_error"] = json!(err);
        diagnostics["endpoint_tolerance"] = json!(tol.endpoint);
        pass = pass && err <= tol.endpoint;
    }

    if spec_n >= 2 && waypoints.len() >= 2 {
        let err = two_route_error(
            &sys,
            &state0,
            &waypoints[0],
            waypoints.last().unwrap(),
            path.samples,
            &opts,
        )?;
        diagnostics["two_route_error"] = json!(err);
        diagnostics["two_route_tolerance"] = json!(tol.commute);
        pass = pass && err <= tol.commute;
    }

    ctx.emit(json!({
        "grid": grid_summary(&family),
        "start_from_exact_solution": from_solution,
        "diagnostics": diagnostics,
        "pass": pass,
    }))?;
    if !pass {
        eprintln!("integrate: diagnostics exceeded their tolerances");
    }
    Ok(if pass { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// symmetry
// ---------------------------------------------------------------------------

pub fn cmd_symmetry(ctx: &Ctx) -> Result<i32> {
    match &ctx.config.word {
        Some(text) => symmetry_word(ctx, text),
        None => symmetry_relations(ctx),
    }
}

fn symmetry_relations(ctx: &Ctx) -> Result<i32> {
    ctx.require_exact()?;
    let (l, n) = match (ctx.config.l, ctx.config.n) {
        (Some(l), Some(n)) => (l, n),
        _ => {
            let family = ctx.family()?;
            (family.spec().l(), family.spec().n())
        }
    };
    let trials = ctx.config.trials.unwrap_or(20);
    let reports = check_relations(l, n, trials, ctx.seed)?;
    let pass = all_pass(&reports);
    ctx.emit(json!({
        "L": l,
        "N": n,
        "trials": trials,
        "relations": reports_json(&reports),
        "failing": failing_ids(&reports),
        "pass": pass,
    }))?;
    Ok(finish(pass, &reports, "symmetry"))
}

fn symmetry_word(ctx: &Ctx, text: &str) -> Result<i32> {
    let word = SymmetryWord::parse(text)?;
    let family = ctx.family()?;
    family.base().require_nonzero()?;
    let spec = family.spec();
    word.validate(spec.l(), spec.n())?;

    match ctx.mode {
        Mode::Exact => {
            let before = CanonicalParams::from_grid(&family.base());
            let after = word_params(&word, &before)?;
            let sol = transport_solution(&word, &family)?;
            let pass = all_pass(&sol.reports);
            ctx.emit(json!({
                "word": word.to_string(),
                "grid": grid_summary(&family),
                "parameters_before": params_json(&before),
                "parameters_after": params_json(&after),
                "deformation_values": sol
                    .svals
                    .iter()
                    .map(|f| f.to_string())
                    .collect::<Vec<_>>(),
                "state": sol.state.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                "certification": reports_json(&sol.reports),
                "failing": failing_ids(&sol.reports),
                "pass": pass,
            }))?;
            Ok(finish(pass, &sol.reports, "symmetry"))
        }
        Mode::Float => {
            let params = CanonicalParams::from_grid(&family.base());
            let tol = ctx.tolerances();
            let trials = ctx.config.trials.unwrap_or(20);
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let dim = 2 * spec.n() * (spec.l() - 1);
            let mut worst: f64 = 0.0;
            for _ in 0..trials {
                let svals: Vec<f64> = (0..spec.n())
                    .map(|k| 1.3 + 0.9 * k as f64 + rng.random_range(0.0..0.5))
                    .collect();
                let state: Vec<f64> =
                    (0..dim).map(|_| rng.random_range(0.4..1.6)).collect();
                worst = worst.max(symplectic_residual(&word, &params, &svals, &state)?);
            }
            let pass = worst <= tol.float_check;
            ctx.emit(json!({
                "word": word.to_string(),
                "grid": grid_summary(&family),
                "trials": trials,
                "max_symplectic_residual": worst,
                "tolerance": tol.float_check,
                "pass": pass,
            }))?;
            if !pass {
                eprintln!(
                    "symmetry: symplectic residual {worst:.3e} exceeds {:.3e}",
                    tol.float_check
                );
            }
            Ok(if pass { 0 } else { 1 })
        }
    }
}

// ---------------------------------------------------------------------------
// lax
// ---------------------------------------------------------------------------

pub fn cmd_lax(ctx: &Ctx) -> Result<i32> {
    let family = ctx.family()?;
    family.base().require_nonzero()?;
    let phase = SigmaPhase::new(&family)?;
    let lax = SigmaLax::new(&phase)?;
    let spec = family.spec();

    let mut reports = lax.structure_reports()?;
    let mut float_block = serde_json::Value::Null;
    match ctx.mode {
        Mode::Exact => reports.extend(lax.deformation_reports()?),
        Mode::Float => {
            let tol = ctx.tolerances();
            let tvals: Vec<f64> = (0..=spec.n()).map(|k| 1.0 + 0.3 * k as f64).collect();
            let mut worst: f64 = 0.0;
            for i in 1..=spec.n() {
                for &z in &[0.37, 2.11, 5.3] {
                    worst = worst.max(lax.zero_curvature_float(i, &tvals, z)?.abs());
                }
            }
            float_block = json!({
                "max_zero_curvature_residual": worst,
                "tolerance": tol.float_check,
            });
            reports.push(IdentityReport {
                id: "zero-curvature-float".to_string(),
                indices: json!({"t": tvals, "z": [0.37, 2.11, 5.3]}),
                pass: worst <= tol.float_check,
                residual_terms: usize::from(worst > tol.float_check),
                timing_ms: 0,
            });
        }
    }

    let scheme = lax.riemann_scheme();
    let stype = spectral_type(spec.l(), spec.n());
    let accessory = accessory_count(&stype)?;
    ctx.write_file(
        "lax.json",
        &serde_json::to_string_pretty(&lax.to_json()?)
            .map_err(|e| Error::invalid(format!("lax serialization: {e}")))?,
    )?;

    let pass = all_pass(&reports);
    ctx.emit(json!({
        "grid": grid_summary(&family),
        "riemann_scheme": scheme.to_json(),
        "exponent_sum": rat_to_string(&scheme.exponent_sum()),
        "spectral_type": stype,
        "accessory_parameters": accessory,
        "float_check": float_block,
        "reports": reports_json(&reports),
        "failing": failing_ids(&reports),
        "pass": pass,
    }))?;
    Ok(finish(pass, &reports, "lax"))
}

// ---------------------------------------------------------------------------
// pvi-compare
// ---------------------------------------------------------------------------

pub fn cmd_pvi_compare(ctx: &Ctx) -> Result<i32> {
    ctx.require_exact()?;
    let params = ctx.params()?;
    let sys = HamiltonianSystem::new(params.clone())?;
    let reports = pvi_reports(&sys)?;
    let dictionary: Vec<serde_json::Value> = (1..params.l())
        .map(|slot| {
            let a = pvi_dictionary(&params, slot);
            json!({
                "slot": slot,
                "a": a.iter().map(rat_to_string).collect::<Vec<_>>(),
            })
        })
        .collect();
    let pass = all_pass(&reports);
    ctx.emit(json!({
        "parameters": params_json(&params),
        "dictionary": dictionary,
        "reports": reports_json(&reports),
        "failing": failing_ids(&reports),
        "pass": pass,
    }))?;
    Ok(finish(pass, &reports, "pvi-compare"))
}

// ---------------------------------------------------------------------------
// garnier-compare
// ---------------------------------------------------------------------------

pub fn cmd_garnier_compare(ctx: &Ctx) -> Result<i32> {
    ctx.require_exact()?;
    let params = ctx.params()?;
    let sys = HamiltonianSystem::new(params.clone())?;
    let transform = GarnierTransform::new(&sys)?;
    let mut reports = transform.product_reports();
    reports.extend(transform.bracket_reports());
    reports.extend(transform.reference_reports()?);
    // The transform lives over the combined symbol space: chart coordinates
    // first, then the deformation values, all printed with generic names
    // t0, t1, ... in index order.
    let mut symbols = sys.chart().var_names();
    for j in 1..=params.n() {
        symbols.push(format!("s{j}"));
    }
    let pass = all_pass(&reports);
    ctx.emit(json!({
        "parameters": params_json(&params),
        "symbols": symbols,
        "transformed_coordinates": transform
            .q_big()
            .iter()
            .map(|f| f.to_string())
            .collect::<Vec<_>>(),
        "transformed_momenta": transform
            .p_big()
            .iter()
            .map(|f| f.to_string())
            .collect::<Vec<_>>(),
        "reports": reports_json(&reports),
        "failing": failing_ids(&reports),
        "pass": pass,
    }))?;
    Ok(finish(pass, &reports, "garnier-compare"))
}

/// Maps library errors to the documented exit codes: 2 for configuration
/// problems (bad input, unparsable values, resonant parameter choices), 4 for
/// a singular abort, 3 for any other computation failure.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_) | Error::Parse(_) | Error::ZeroSigmaCell { .. } => 2,
        Error::SingularAbort { .. } => 4,
        _ => 3,
    }
}

/// Resolves the output directory, defaulting to the current directory.
pub fn resolve_out(out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

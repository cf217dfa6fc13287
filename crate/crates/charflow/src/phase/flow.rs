//! Adaptive float integration of the Hamiltonian flows along piecewise-linear
//! paths in s-space.
//!
//! The integrator is an explicit embedded Runge-Kutta pair of orders 5(4)
//! with proportional step control. Steps are clamped so every requested
//! sample parameter is hit exactly; at each accepted step the distance to the
//! singular locus (s_i = 0, s_i = 1, s_i = s_j) is checked against a guard
//! margin and the run aborts if the path gets too close.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase::hamiltonian::HamiltonianSystem;

/// Tolerances and guards for one integration run.
#[derive(Debug, Clone, Serialize)]
pub struct IntegratorOptions {
    /// Relative tolerance of the per-step error test.
    pub rtol: f64,
    /// Absolute tolerance of the per-step error test.
    pub atol: f64,
    /// Minimum allowed distance from the path to the singular locus.
    pub singular_margin: f64,
    /// Hard cap on accepted plus rejected steps.
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rtol: 1e-10,
            atol: 1e-12,
            singular_margin: 1e-3,
            max_steps: 1_000_000,
        }
    }
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySample {
    /// Ordinal of the sample within the trajectory.
    pub step: usize,
    /// Normalized arc-length parameter in [0, 1] along the path.
    pub path_param: f64,
    /// Deformation variables s_1..s_N at the sample.
    pub s: Vec<f64>,
    /// Canonical coordinates in chart order (all q, then all p).
    pub state: Vec<f64>,
    /// Hamiltonian values H_1..H_N at the sample.
    pub h: Vec<f64>,
}

/// An integrated path with its samples and integrator statistics.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    /// Column names of the canonical coordinates, in `state` order.
    pub state_names: Vec<String>,
    /// Recorded samples, ordered by path parameter.
    pub samples: Vec<TrajectorySample>,
    /// Number of accepted integration steps.
    pub steps_accepted: usize,
    /// Number of rejected (retried) integration steps.
    pub steps_rejected: usize,
    /// Options the run was performed with.
    pub options: IntegratorOptions,
}

impl Trajectory {
    /// Renders the trajectory as CSV with a fixed header layout.
    pub fn to_csv(&self) -> String {
        let n = self.samples.first().map_or(0, |s| s.s.len());
        let mut out = String::from("step,path_param");
        for i in 1..=n {
            out.push_str(&format!(",s{i}"));
        }
        for name in &self.state_names {
            out.push_str(&format!(",{name}"));
        }
        for i in 1..=n {
            out.push_str(&format!(",H{i}"));
        }
        out.push('\n');
        for sample in &self.samples {
            out.push_str(&format!("{},{:.16e}", sample.step, sample.path_param));
            for v in sample.s.iter().chain(&sample.state).chain(&sample.h) {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }

    /// The final recorded sample.
    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory has at least one sample")
    }
}

/// Distance from a point in s-space to the singular locus, together with a
/// description of the nearest component.
pub fn singular_distance(svals: &[f64]) -> (f64, String) {
    let mut best = f64::INFINITY;
    let mut what = String::from("none");
    for (i, &si) in svals.iter().enumerate() {
        let d0 = si.abs();
        if d0 < best {
            best = d0;
            what = format!("s{} = 0", i + 1);
        }
        let d1 = (si - 1.0).abs();
        if d1 < best {
            best = d1;
            what = format!("s{} = 1", i + 1);
        }
        for (j, &sj) in svals.iter().enumerate().skip(i + 1) {
            let dij = (si - sj).abs();
            if dij < best {
                best = dij;
                what = format!("s{} = s{}", i + 1, j + 1);
            }
        }
    }
    (best, what)
}

/// Checks a straight segment against the guard band. Each singular component
/// is an affine function of the segment parameter, so its minimum modulus is
/// attained at an endpoint or an interior zero crossing.
fn check_segment(a: &[f64], b: &[f64], margin: f64, lam0: f64, lam1: f64) -> Result<()> {
    let n = a.len();
    let mut constraints: Vec<(f64, f64, String)> = Vec::new();
    for i in 0..n {
        constraints.push((a[i], b[i] - a[i], format!("s{} = 0", i + 1)));
        constraints.push((a[i] - 1.0, b[i] - a[i], format!("s{} = 1", i + 1)));
        for j in (i + 1)..n {
            constraints.push((
                a[i] - a[j],
                (b[i] - a[i]) - (b[j] - a[j]),
                format!("s{} = s{}", i + 1, j + 1),
            ));
        }
    }
    for (alpha, beta, what) in constraints {
        let v0 = alpha;
        let v1 = alpha + beta;
        let (dist, at_local) = if v0.signum() != v1.signum() && beta != 0.0 {
            (0.0, -alpha / beta)
        } else if v0.abs() <= v1.abs() {
            (v0.abs(), 0.0)
        } else {
            (v1.abs(), 1.0)
        };
        if dist < margin {
            return Err(Error::SingularAbort {
                margin,
                at: lam0 + at_local * (lam1 - lam0),
                detail: format!("path approaches {what} (distance {dist:.3e})"),
            });
        }
    }
    Ok(())
}

/// Nodes and weights of the embedded 5(4) pair.
const RK_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const RK_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const RK_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const RK_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Segment {
    a: Vec<f64>,
    b: Vec<f64>,
    lam0: f64,
    lam1: f64,
}

impl Segment {
    fn s_at(&self, lam: f64) -> Vec<f64> {
        let u = (lam - self.lam0) / (self.lam1 - self.lam0);
        self.a
            .iter()
            .zip(&self.b)
            .map(|(&x, &y)| x + u * (y - x))
            .collect()
    }

    /// ds/d(lambda), constant along the segment.
    fn velocity(&self) -> Vec<f64> {
        let inv = 1.0 / (self.lam1 - self.lam0);
        self.a
            .iter()
            .zip(&self.b)
            .map(|(&x, &y)| (y - x) * inv)
            .collect()
    }
}

/// Integrates the canonical flows from `state0` along the piecewise-linear
/// path through `waypoints`, recording `samples_per_unit`-spaced samples plus
/// every waypoint. A path of zero total length yields the single initial
/// sample.
pub fn integrate(
    sys: &HamiltonianSystem,
    state0: &[f64],
    waypoints: &[Vec<f64>],
    n_samples: usize,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    let (traj, res) = integrate_partial(sys, state0, waypoints, n_samples, opts);
    res.map(|()| traj)
}

/// Like [`integrate`], but always returns the portion of the trajectory that
/// was recorded before any failure, so callers can report the last reached
/// state after a singular abort or step underflow.
pub fn integrate_partial(
    sys: &HamiltonianSystem,
    state0: &[f64],
    waypoints: &[Vec<f64>],
    n_samples: usize,
    opts: &IntegratorOptions,
) -> (Trajectory, Result<()>) {
    let mut traj = Trajectory {
        state_names: sys.chart().var_names(),
        samples: Vec::new(),
        steps_accepted: 0,
        steps_rejected: 0,
        options: opts.clone(),
    };
    let res = run_path(sys, state0, waypoints, n_samples, opts, &mut traj);
    (traj, res)
}

fn run_path(
    sys: &HamiltonianSystem,
    state0: &[f64],
    waypoints: &[Vec<f64>],
    n_samples: usize,
    opts: &IntegratorOptions,
    traj: &mut Trajectory,
) -> Result<()> {
    let n = sys.chart().n();
    let dim = sys.chart().dim();
    if waypoints.is_empty() {
        return Err(Error::invalid("path needs at least one waypoint"));
    }
    if waypoints.iter().any(|w| w.len() != n) {
        return Err(Error::invalid(format!(
            "every waypoint must list {n} deformation variables"
        )));
    }
    if state0.len() != dim {
        return Err(Error::invalid(format!(
            "initial state must have {dim} coordinates, got {}",
            state0.len()
        )));
    }

    // Arc-length parametrization of the path.
    let mut lengths = vec![0.0];
    for w in waypoints.windows(2) {
        let d: f64 = w[0]
            .iter()
            .zip(&w[1])
            .map(|(&x, &y)| (y - x) * (y - x))
            .sum::<f64>()
            .sqrt();
        lengths.push(lengths.last().unwrap() + d);
    }
    let total = *lengths.last().unwrap();

    let record =
        |traj: &mut Trajectory, lam: f64, svals: &[f64], state: &[f64]| -> Result<()> {
            let mut h = Vec::with_capacity(n);
            for j in 1..=n {
                h.push(sys.eval_f64(sys.h(j), svals, state)?);
            }
            traj.samples.push(TrajectorySample {
                step: traj.samples.len(),
                path_param: lam,
                s: svals.to_vec(),
                state: state.to_vec(),
                h,
            });
            Ok(())
        };

    let start = &waypoints[0];
    let (d0, what0) = singular_distance(start);
    if d0 < opts.singular_margin {
        return Err(Error::SingularAbort {
            margin: opts.singular_margin,
            at: 0.0,
            detail: format!("initial point sits at {what0} (distance {d0:.3e})"),
        });
    }
    if total == 0.0 {
        record(traj, 0.0, start, state0)?;
        return Ok(());
    }

    // Segments with their normalized parameter spans; zero-length segments
    // (repeated waypoints) are skipped.
    let mut segments = Vec::new();
    for (k, w) in waypoints.windows(2).enumerate() {
        if lengths[k + 1] > lengths[k] {
            segments.push(Segment {
                a: w[0].clone(),
                b: w[1].clone(),
                lam0: lengths[k] / total,
                lam1: lengths[k + 1] / total,
            });
        }
    }
    // Record the start before the pre-flight path checks, so an aborted run
    // still reports the last reached (here: initial) state.
    let mut state = state0.to_vec();
    record(traj, 0.0, start, &state)?;
    for seg in &segments {
        check_segment(&seg.a, &seg.b, opts.singular_margin, seg.lam0, seg.lam1)?;
    }

    // Sample targets: uniform grid plus all segment boundaries.
    let mut targets: Vec<f64> = (0..=n_samples.max(1))
        .map(|k| k as f64 / n_samples.max(1) as f64)
        .collect();
    for seg in &segments {
        targets.push(seg.lam0);
        targets.push(seg.lam1);
    }
    targets.sort_by(f64::total_cmp);
    targets.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

    let mut h_step = 1e-3_f64; // initial guess; adapted immediately
    for seg in &segments {
        let vel = seg.velocity();
        let field = |lam: f64, y: &[f64]| -> Result<Vec<f64>> {
            let svals = seg.s_at(lam);
            let mut out = vec![0.0; dim];
            for j in 1..=n {
                if vel[j - 1] == 0.0 {
                    continue;
                }
                let fj = sys.flow_f64(j, &svals, y)?;
                for (o, f) in out.iter_mut().zip(&fj) {
                    *o += vel[j - 1] * f;
                }
            }
            Ok(out)
        };
        let seg_targets: Vec<f64> = targets
            .iter()
            .copied()
            .filter(|&t| t > seg.lam0 + 1e-14 && t <= seg.lam1 + 1e-14)
            .collect();
        let mut lam = seg.lam0;
        for &target in &seg_targets {
            while lam < target - 1e-14 {
                let mut h_try = h_step.min(target - lam);
                loop {
                    if traj.steps_accepted + traj.steps_rejected >= opts.max_steps {
                        return Err(Error::invalid(format!(
                            "integration exceeded the step budget of {}",
                            opts.max_steps
                        )));
                    }
                    if h_try < 1e-15 {
                        return Err(Error::StepUnderflow { at: lam });
                    }
                    // One embedded step of size h_try.
                    let mut k_stages: Vec<Vec<f64>> = Vec::with_capacity(7);
                    for stage in 0..7 {
                        let mut y = state.clone();
                        for (w, k_prev) in RK_A[stage].iter().zip(&k_stages) {
                            if *w != 0.0 {
                                for (yv, kv) in y.iter_mut().zip(k_prev) {
                                    *yv += h_try * w * kv;
                                }
                            }
                        }
                        k_stages.push(field(lam + RK_C[stage] * h_try, &y)?);
                    }
                    let mut y5 = state.clone();
                    let mut err = vec![0.0; dim];
                    for stage in 0..7 {
                        for v in 0..dim {
                            y5[v] += h_try * RK_B5[stage] * k_stages[stage][v];
                            err[v] += h_try * (RK_B5[stage] - RK_B4[stage]) * k_stages[stage][v];
                        }
                    }
                    let mut norm = 0.0;
                    for v in 0..dim {
                        let scale =
                            opts.atol + opts.rtol * state[v].abs().max(y5[v].abs());
                        norm += (err[v] / scale) * (err[v] / scale);
                    }
                    let norm = (norm / dim as f64).sqrt();
                    if norm <= 1.0 {
                        traj.steps_accepted += 1;
                        lam += h_try;
                        state = y5;
                        let grow = if norm == 0.0 {
                            5.0
                        } else {
                            (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
                        };
                        h_step = (h_try * grow).min(1.0);
                        let svals = seg.s_at(lam);
                        let (dist, what) = singular_distance(&svals);
                        if dist < opts.singular_margin {
                            return Err(Error::SingularAbort {
                                margin: opts.singular_margin,
                                at: lam,
                                detail: format!("state reached {what} (distance {dist:.3e})"),
                            });
                        }
                        break;
                    }
                    traj.steps_rejected += 1;
                    let shrink = (0.9 * norm.powf(-0.2)).clamp(0.2, 0.9);
                    h_try *= shrink;
                }
            }
            lam = target;
            record(traj, lam, &seg.s_at(lam), &state)?;
        }
    }
    Ok(())
}

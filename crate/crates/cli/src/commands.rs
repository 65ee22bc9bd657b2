use clap::ValueEnum;
use liesys::ermakov::{
    ermakov_invariant, generalized_invariant, integrate_ermakov, integrate_generalized, integrate_pinney,
    integrate_triple, triple_invariants, ErmakovState, PinneySpec, PinneySuperposition,
};
use liesys::numerics::{integrate_ode, EventKind, IntegratorConfig, Trajectory};
use liesys::oscillator::{
    linear_rhs, linear_superposition, partial_superposition_with, reduce_ck_autonomous, CubicHermite, PhaseState,
    QuarticReduction,
};
use liesys::riccati::{
    check_integrability, cross_ratio, solve_numeric, solve_numeric_mobius, solve_via_criterion, superpose_cross_ratio,
    verify_report, RiccatiProblem,
};
use liesys::sl2::{fundamental_solution, ExtReal, Sl2Coeffs};
use liesys::{linspace, Error, Expr};

use crate::output::{Body, Output, Table};
use crate::system::{OscKind, RunConfig, System};
use crate::CliError;

/// Grid size of the integrability check when fewer samples are requested.
const CHECK_GRID: usize = 200;
const QUAD_TOL: f64 = 1e-12;
/// Samples behind the interpolated seed of the partial rule.
const SEED_GRID: usize = 4001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Adaptive Runge-Kutta on the equation itself.
    Numeric,
    /// The fundamental solution acting on the initial data.
    Fundamental,
    /// Scaling to a constant-coefficient equation (Riccati only).
    Criterion,
    /// The autonomous reduction (caldirola-kanai only).
    Reduced,
    /// The closed form (quartic-family only).
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    CrossRatio,
    Linear,
    Partial,
    Pinney,
}

/// Rule constants from the command line.
#[derive(Debug, Clone, Default)]
pub struct RuleArgs {
    pub seeds: Vec<f64>,
    pub k: Option<f64>,
    pub kp: Option<f64>,
    pub k1: f64,
    pub k2: f64,
}

fn numeric(e: Error) -> CliError {
    CliError::Numeric(e.to_string())
}

fn integrator(cfg: &RunConfig) -> IntegratorConfig<f64> {
    IntegratorConfig::with_tolerances(cfg.rtol, cfg.atol)
}

fn times(cfg: &RunConfig) -> Vec<f64> {
    linspace(cfg.t_span.0, cfg.t_span.1, cfg.samples)
}

/// Status 3 when the integration stopped at the edge of the domain.
fn halted(table: Table, tr: &Trajectory<f64>) -> Output {
    let mut out = Output::table(table);
    if let Some(ev) = tr.events().iter().find(|e| e.kind == EventKind::Domain) {
        eprintln!("integration stopped at t = {}: state left the domain", ev.t);
        out.status = 3;
    }
    out
}

fn ermakov_state(s: &[f64]) -> ErmakovState<f64> {
    ErmakovState::from_slice(s).expect("4 or 6 components")
}

pub fn integrate(cfg: &RunConfig, method: Method) -> Result<Output, CliError> {
    let ts = times(cfg);
    let ic = integrator(cfg);
    let span = cfg.t_span;
    let [x0, v0, y0, vy0, z0, vz0] = cfg.init;
    let only_numeric = |what: &str| {
        if method == Method::Numeric {
            Ok(())
        } else {
            Err(CliError::Usage(format!("{what} supports --method numeric only")))
        }
    };
    match &cfg.system {
        System::Riccati(c) => {
            let p = RiccatiProblem::new(c.clone(), x0, span.0, span.1).map_err(|e| CliError::Usage(e.to_string()))?;
            let tr = match method {
                Method::Numeric => solve_numeric(&p, &ts, &ic),
                Method::Fundamental => solve_numeric_mobius(&p, &ts, &ic),
                Method::Criterion => solve_via_criterion(&p, &ts, liesys::numerics::DEFAULT_CONSTANCY_TOL),
                _ => {
                    return Err(CliError::Usage(format!(
                        "method {method:?} does not apply to a Riccati equation"
                    )))
                }
            }
            .map_err(numeric)?;
            let mut table = Table::new(&["t", "x"]);
            for (i, &t) in tr.times().iter().enumerate() {
                table.push(vec![t, tr.state(i)[0]]);
            }
            table.add_events(tr.events());
            Ok(Output::table(table))
        }
        System::Oscillator(c, kind) => {
            let main = oscillator_states(c, kind, method, [x0, v0], cfg)?;
            // paired with the solution from (0, 1) the Wronskian starts at x0
            let reference = oscillator_states(c, kind, method, [0.0, 1.0], cfg)?;
            let mut table = Table::new(&["t", "x", "p", "wronskian"]);
            for ((&t, s), r) in ts.iter().zip(&main).zip(&reference) {
                table.push(vec![t, s[0], s[1], s[0] * r[1] - r[0] * s[1]]);
            }
            Ok(Output::table(table))
        }
        System::Pinney(spec) => {
            only_numeric("pinney")?;
            let st = ermakov_state(&[x0, v0, y0, vy0, 0.0, 1.0]);
            let tr = integrate_triple(spec, st, span, &ts, &ic).map_err(numeric)?;
            let mut table = Table::new(&["t", "x", "v", "y", "vy", "I1"]);
            for (i, s) in tr.states().enumerate() {
                let inv = triple_invariants(&ermakov_state(s), spec.k).map_err(numeric)?;
                table.push(vec![tr.times()[i], s[0], s[1], s[2], s[3], inv.i1]);
            }
            table.add_events(tr.events());
            Ok(halted(table, &tr))
        }
        System::Ermakov(spec) => {
            only_numeric("ermakov")?;
            let tr = integrate_ermakov(spec, ErmakovState::planar(x0, v0, y0, vy0), span, &ts, &ic).map_err(numeric)?;
            let mut table = Table::new(&["t", "x", "vx", "y", "vy", "psi"]);
            for (i, s) in tr.states().enumerate() {
                let psi = ermakov_invariant(&ermakov_state(s), spec.k).map_err(numeric)?;
                table.push(vec![tr.times()[i], s[0], s[1], s[2], s[3], psi]);
            }
            table.add_events(tr.events());
            Ok(halted(table, &tr))
        }
        System::Generalized(spec) => {
            only_numeric("ermakov-generalized")?;
            let tr =
                integrate_generalized(spec, ErmakovState::planar(x0, v0, y0, vy0), span, &ts, &ic).map_err(numeric)?;
            let mut table = Table::new(&["t", "x", "vx", "y", "vy", "invariant"]);
            let mut warned = false;
            for (i, s) in tr.states().enumerate() {
                let inv = generalized_invariant(spec, &ermakov_state(s), QUAD_TOL).unwrap_or_else(|e| {
                    if !warned {
                        eprintln!("invariant unavailable: {e}");
                        warned = true;
                    }
                    f64::NAN
                });
                table.push(vec![tr.times()[i], s[0], s[1], s[2], s[3], inv]);
            }
            table.add_events(tr.events());
            Ok(halted(table, &tr))
        }
        System::Triple(spec) => {
            only_numeric("pinney-triple")?;
            let st = ermakov_state(&[x0, v0, y0, vy0, z0, vz0]);
            let tr = integrate_triple(spec, st, span, &ts, &ic).map_err(numeric)?;
            let mut table = Table::new(&["t", "x", "vx", "y", "vy", "z", "vz", "I1", "I2", "W"]);
            for (i, s) in tr.states().enumerate() {
                let inv = triple_invariants(&ermakov_state(s), spec.k).map_err(numeric)?;
                let mut row = vec![tr.times()[i]];
                row.extend_from_slice(s);
                row.extend([inv.i1, inv.i2, inv.w]);
                table.push(row);
            }
            table.add_events(tr.events());
            Ok(halted(table, &tr))
        }
    }
}

/// `(x, p)` at every sample time.
fn oscillator_states(
    c: &Sl2Coeffs,
    kind: &OscKind,
    method: Method,
    s0: [f64; 2],
    cfg: &RunConfig,
) -> Result<Vec<[f64; 2]>, CliError> {
    let ts = times(cfg);
    let from_zero = |name: &str| {
        if cfg.t_span.0 == 0.0 {
            Ok(())
        } else {
            Err(CliError::Usage(format!("{name} starts at t = 0; drop --t0")))
        }
    };
    match (method, kind) {
        (Method::Numeric, _) => {
            let tr =
                integrate_ode(linear_rhs(c), &s0, cfg.t_span, &ts, &integrator(cfg)).map_err(|e| numeric(e.into()))?;
            Ok(tr.states().map(|s| [s[0], s[1]]).collect())
        }
        (Method::Fundamental, _) => {
            let phi = fundamental_solution(c, cfg.t_span, &ts, &integrator(cfg)).map_err(numeric)?;
            Ok(phi.mats.iter().map(|m| m.apply(s0[0], s0[1]).into()).collect())
        }
        (Method::Reduced, OscKind::CaldirolaKanai { m0, mu, omega0 }) => {
            from_zero("the reduction")?;
            let red = reduce_ck_autonomous(*m0, *mu, *omega0).map_err(numeric)?;
            Ok(ts
                .iter()
                .map(|&t| red.solve(PhaseState::new(s0[0], s0[1]), t).to_array())
                .collect())
        }
        (Method::Closed, OscKind::Quartic { u0, u1, omega0 }) => {
            from_zero("the closed form")?;
            let q = QuarticReduction::new(*u0, *u1, *omega0).map_err(numeric)?;
            ts.iter()
                .map(|&t| {
                    Ok(q.state(PhaseState::new(s0[0], s0[1]), t, QUAD_TOL)
                        .map_err(numeric)?
                        .to_array())
                })
                .collect()
        }
        (m, _) => Err(CliError::Usage(format!(
            "method {m:?} does not apply to this oscillator"
        ))),
    }
}

pub fn check(cfg: &RunConfig, tol: f64) -> Result<Output, CliError> {
    let c = match &cfg.system {
        System::Riccati(c) | System::Oscillator(c, _) => c,
        _ => {
            return Err(CliError::Usage(
                "check needs Riccati or oscillator coefficients (explicit or an oscillator preset)".into(),
            ))
        }
    };
    let grid = linspace(cfg.t_span.0, cfg.t_span.1, cfg.samples.max(CHECK_GRID));
    let e12 = liesys::numerics::fmt_e12;
    let (lines, status) = match check_integrability(c, &grid, tol) {
        Ok(r) => {
            let (product_err, coeff_err) = verify_report(c, &r, &grid).map_err(numeric)?;
            let lines = vec![
                format!("K={} L={} D={} integrable=yes", e12(r.k), e12(r.l), r.target.d),
                format!(
                    "c0={} c1={} c2={}",
                    e12(r.target.c0),
                    e12(r.target.c1),
                    e12(r.target.c2)
                ),
                format!("scaling G={}", r.scaling),
                format!("max_deviation={}", e12(r.diagnostics.max_deviation)),
                format!(
                    "verify product_error={} coefficient_error={}",
                    e12(product_err),
                    e12(coeff_err)
                ),
            ];
            (lines, 0)
        }
        Err(Error::Rejected { report }) => {
            let lines = vec![
                format!("K={} integrable=no", e12(report.mean)),
                format!("max_deviation={}", e12(report.max_deviation)),
            ];
            (lines, 1)
        }
        Err(Error::VanishingProduct { t }) => (vec![format!("integrable=no b0*b2 vanishes near t={}", e12(t))], 1),
        Err(e) => return Err(numeric(e)),
    };
    Ok(Output {
        body: Body::Lines(lines),
        status,
    })
}

fn rel(a: f64, b: f64) -> f64 {
    if a.is_finite() && b.is_finite() {
        (a - b).abs() / b.abs().max(1.0)
    } else {
        ExtReal::from_real(a).chordal_distance(ExtReal::from_real(b))
    }
}

pub fn superpose(cfg: &RunConfig, rule: Rule, args: &RuleArgs) -> Result<Output, CliError> {
    match rule {
        Rule::CrossRatio => cross_ratio_rule(cfg, args),
        Rule::Linear => linear_rule(cfg, args),
        Rule::Partial => partial_rule(cfg, args),
        Rule::Pinney => pinney_rule(cfg),
    }
}

fn cross_ratio_rule(cfg: &RunConfig, args: &RuleArgs) -> Result<Output, CliError> {
    let System::Riccati(c) = &cfg.system else {
        return Err(CliError::Usage(
            "the cross-ratio rule needs --riccati coefficients".into(),
        ));
    };
    let &[a, b, d] = args.seeds.as_slice() else {
        return Err(CliError::Usage("the cross-ratio rule needs three --seeds".into()));
    };
    let ext = ExtReal::from_real;
    let k = match args.k {
        Some(k) => k,
        None => cross_ratio(ext(cfg.init[0]), ext(a), ext(b), ext(d)).map_err(numeric)?,
    };
    let ts = times(cfg);
    let ic = integrator(cfg);
    let solve = |x0: f64| -> Result<Vec<f64>, CliError> {
        let p = RiccatiProblem::new(c.clone(), x0, cfg.t_span.0, cfg.t_span.1)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(solve_numeric(&p, &ts, &ic).map_err(numeric)?.component(0))
    };
    let seeds = [solve(a)?, solve(b)?, solve(d)?];
    let x_start = superpose_cross_ratio(ext(a), ext(b), ext(d), k).map_err(numeric)?;
    let direct = solve(x_start.to_real())?;
    let mut table = Table::new(&["t", "x1", "x2", "x3", "x", "x_direct", "residual"]);
    for (i, &t) in ts.iter().enumerate() {
        let (s1, s2, s3) = (seeds[0][i], seeds[1][i], seeds[2][i]);
        let x = superpose_cross_ratio(ext(s1), ext(s2), ext(s3), k)
            .map_err(numeric)?
            .to_real();
        table.push(vec![t, s1, s2, s3, x, direct[i], rel(x, direct[i])]);
    }
    Ok(Output::table(table))
}

fn oscillator_coeffs(cfg: &RunConfig, rule: &str) -> Result<Sl2Coeffs, CliError> {
    match &cfg.system {
        System::Oscillator(c, _) => Ok(c.clone()),
        _ => Err(CliError::Usage(format!(
            "the {rule} rule needs an oscillator (preset or --b0/--b1/--b2 without --riccati)"
        ))),
    }
}

fn linear_rule(cfg: &RunConfig, args: &RuleArgs) -> Result<Output, CliError> {
    let c = oscillator_coeffs(cfg, "linear")?;
    let ts = times(cfg);
    let ic = integrator(cfg);
    let [_, _, y0, vy0, z0, vz0] = cfg.init;
    let run = |s0: [f64; 2]| integrate_ode(linear_rhs(&c), &s0, cfg.t_span, &ts, &ic).map_err(|e| numeric(e.into()));
    let (y, z) = (run([y0, vy0])?, run([z0, vz0])?);
    let sum = linear_superposition(&y, &z, args.k1, args.k2).map_err(numeric)?;
    let direct = run([sum.state(0)[0], sum.state(0)[1]])?;
    let mut table = Table::new(&["t", "x", "p", "x_direct", "p_direct", "residual"]);
    for (i, &t) in ts.iter().enumerate() {
        let (s, d) = (sum.state(i), direct.state(i));
        table.push(vec![t, s[0], s[1], d[0], d[1], rel(s[0], d[0]).max(rel(s[1], d[1]))]);
    }
    Ok(Output::table(table))
}

fn partial_rule(cfg: &RunConfig, args: &RuleArgs) -> Result<Output, CliError> {
    let c = oscillator_coeffs(cfg, "partial")?;
    if c.b(0) != &Expr::one() || !c.b(1).is_identically_zero() {
        return Err(CliError::Usage(
            "the partial rule needs unit mass: x'' = -omega2(t) x".into(),
        ));
    }
    let (Some(k), Some(kp)) = (args.k, args.kp) else {
        return Err(CliError::Usage("the partial rule needs --k and --kp".into()));
    };
    let ts = times(cfg);
    let ic = integrator(cfg);
    let [_, _, y0, vy0, _, _] = cfg.init;
    let run = |s0: [f64; 2], at: &[f64]| {
        integrate_ode(linear_rhs(&c), &s0, cfg.t_span, at, &ic).map_err(|e| numeric(e.into()))
    };
    if y0 == 0.0 {
        return Err(CliError::Numeric("degenerate input: the seed vanishes at t0".into()));
    }
    let dense = linspace(cfg.t_span.0, cfg.t_span.1, SEED_GRID.max(cfg.samples));
    let interp = CubicHermite::from_trajectory(&run([y0, vy0], &dense)?).map_err(numeric)?;
    // x2 = kp x1 + k x1 * integral of x1^-2 from t0
    let direct = run([kp * y0, kp * vy0 + k / y0], &ts)?;
    let mut table = Table::new(&["t", "x1", "x2", "x2_direct", "residual"]);
    for (i, &t) in ts.iter().enumerate() {
        let x2 = partial_superposition_with(|s| interp.eval(s), k, kp, cfg.t_span.0, t, QUAD_TOL).map_err(numeric)?;
        let d = direct.state(i)[0];
        table.push(vec![t, interp.eval(t), x2, d, rel(x2, d)]);
    }
    Ok(Output::table(table))
}

fn pinney_rule(cfg: &RunConfig) -> Result<Output, CliError> {
    let spec: &PinneySpec = match &cfg.system {
        System::Pinney(s) | System::Triple(s) => s,
        _ => return Err(CliError::Usage("the pinney rule needs --preset pinney".into())),
    };
    let ts = times(cfg);
    let ic = integrator(cfg);
    let [x0, v0, y0, vy0, z0, vz0] = cfg.init;
    let rule = PinneySuperposition::from_initial(&ermakov_state(&cfg.init), spec.k).map_err(numeric)?;
    if rule.inv.w == 0.0 {
        return Err(CliError::Numeric(
            "degenerate input: W = 0, the oscillator seeds are dependent".into(),
        ));
    }
    let c = Sl2Coeffs::new(Expr::one(), Expr::zero(), spec.omega2.clone()).map_err(numeric)?;
    let run = |s0: [f64; 2]| integrate_ode(linear_rhs(&c), &s0, cfg.t_span, &ts, &ic).map_err(|e| numeric(e.into()));
    let (y, z) = (run([y0, vy0])?, run([z0, vz0])?);
    let direct = integrate_pinney(spec, [x0, v0], cfg.t_span, &ts, &ic).map_err(numeric)?;
    let mut table = Table::new(&["t", "y", "z", "x", "x_direct", "residual"]);
    for (i, &t) in direct.times().iter().enumerate() {
        let (yi, zi) = (y.state(i)[0], z.state(i)[0]);
        let x = rule.eval(yi, zi).map_err(numeric)?;
        let d = direct.state(i)[0];
        table.push(vec![t, yi, zi, x, d, rel(x, d)]);
    }
    table.add_events(direct.events());
    Ok(halted(table, &direct))
}

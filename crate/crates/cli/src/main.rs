//! `ej`: CSV/JSON front end for the junction solvers and the interaction
//! asymptotics. Exit codes: 0 success, 2 input or solver error, 3 the blow-up
//! chain left the perturbative regime.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::{Args, Parser, Subcommand};
use ej_core::asymptotics::{
    chi_closed, extract_interaction_series, interaction_h_grid, reference_state,
};
use ej_core::coupling::{det_criterion, SectionProfile};
use ej_core::junction::{chain_propagate, solve_junction_riemann, stationary_profile};
use ej_core::waves::solve_riemann;
use ej_core::{CouplingKind, Error, GasLaw, GasState, SolverOptions, REFERENCE_GAMMA};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "ej", version, about = "Euler flow through duct junctions")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunConfig {
    /// Coupling condition: S, P, L or p.
    #[arg(long, global = true, env = "EJ_KIND", default_value = "S")]
    kind: CouplingKind,
    #[arg(long, global = true, env = "EJ_GAMMA", default_value_t = REFERENCE_GAMMA)]
    gamma: f64,
    /// Newton tolerance on the scaled residual.
    #[arg(long, global = true, env = "EJ_TOL")]
    tol: Option<f64>,
    /// Main artifact path; standard output when absent.
    #[arg(long, global = true, env = "EJ_OUT")]
    out: Option<PathBuf>,
    /// Add coefficients fitted from the numerical solvers next to the closed forms.
    #[arg(long, global = true, env = "EJ_WITH_ORACLE")]
    with_oracle: bool,
    /// Seed for randomized inputs.
    #[arg(long, global = true, env = "EJ_SEED", default_value_t = 0)]
    seed: u64,
    /// Reference density of the theta-parametrized states.
    #[arg(long, global = true, env = "EJ_RHO_BAR", default_value_t = 1.0)]
    rho_bar: f64,
    /// Reference internal energy of the theta-parametrized states.
    #[arg(long, global = true, env = "EJ_E_BAR", default_value_t = 1.0)]
    e_bar: f64,
}

#[derive(Subcommand)]
enum Command {
    /// chi(theta) from the closed form, optionally with the fitted value.
    ChiScan {
        #[arg(long, default_value_t = 0.02)]
        theta_min: f64,
        #[arg(long, default_value_t = 0.98)]
        theta_max: f64,
        #[arg(long, default_value_t = 97)]
        samples: usize,
    },
    /// Chain of junction pairs a -> a + h a -> a acting on one 3-wave.
    Blowup {
        #[arg(long)]
        theta: f64,
        /// Incoming strength in units of rho_bar.
        #[arg(long, default_value_t = 1e-4)]
        sigma0: f64,
        #[arg(long, default_value_t = 0.05)]
        h: f64,
        #[arg(long, default_value_t = 40)]
        pairs: usize,
    },
    /// Riemann problem at a single junction; states as rho,v,p.
    Junction {
        #[arg(long, allow_hyphen_values = true)]
        a_minus: f64,
        #[arg(long, allow_hyphen_values = true)]
        a_plus: f64,
        #[arg(long, value_parser = parse_triplet, allow_hyphen_values = true)]
        left: [f64; 3],
        #[arg(long, value_parser = parse_triplet, allow_hyphen_values = true)]
        right: [f64; 3],
    },
    /// Piecewise-constant stationary solution over a list of sections.
    Stationary {
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        /// Comma-separated sections a_0,a_1,...
        #[arg(
            long,
            value_delimiter = ',',
            conflicts_with = "random_pieces",
            required_unless_present = "random_pieces"
        )]
        sections: Option<Vec<f64>>,
        /// Number of random sections drawn from --seed.
        #[arg(long)]
        random_pieces: Option<usize>,
        /// Maximum relative deviation of random sections from 1.
        #[arg(long, default_value_t = 0.01)]
        amplitude: f64,
    },
    /// Standard Riemann problem; states as rho,v,p.
    Riemann {
        #[arg(long, value_parser = parse_triplet, allow_hyphen_values = true)]
        left: [f64; 3],
        #[arg(long, value_parser = parse_triplet, allow_hyphen_values = true)]
        right: [f64; 3],
    },
}

fn parse_triplet(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected rho,v,p, got {} values", parts.len()));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.parse().map_err(|_| format!("'{p}' is not a number"))?;
    }
    Ok(out)
}

#[derive(Debug)]
struct CliError {
    exit: u8,
    kind: String,
    field: Option<String>,
    message: String,
}

impl CliError {
    fn input(field: &str, message: impl Into<String>) -> Self {
        CliError {
            exit: 2,
            kind: "invalid_input".into(),
            field: Some(field.into()),
            message: message.into(),
        }
    }

    fn solver(err: &Error, field: Option<&str>) -> Self {
        CliError {
            exit: 2,
            kind: err.code().into(),
            field: field.map(Into::into),
            message: err.to_string(),
        }
    }

    fn emit(&self) -> ExitCode {
        let body = serde_json::json!({
            "error": { "kind": self.kind, "field": self.field, "message": self.message }
        });
        eprintln!("{body}");
        ExitCode::from(self.exit)
    }
}

fn from_clap(err: clap::Error) -> CliError {
    let field = match err.get(ContextKind::InvalidArg) {
        Some(ContextValue::String(s)) => Some(
            s.trim_start_matches('-')
                .split([' ', '='])
                .next()
                .unwrap_or("")
                .to_string(),
        ),
        _ => None,
    };
    let rendered = err.render().to_string();
    let message = rendered
        .lines()
        .next()
        .unwrap_or("")
        .trim_start_matches("error: ")
        .to_string();
    CliError {
        exit: 2,
        kind: "invalid_input".into(),
        field,
        message,
    }
}

fn require(ok: bool, field: &str, message: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::input(field, message))
    }
}

struct Context {
    kind: CouplingKind,
    law: GasLaw,
    opts: SolverOptions,
    out: Option<PathBuf>,
    with_oracle: bool,
    seed: u64,
    rho_bar: f64,
    e_bar: f64,
}

impl Context {
    fn new(c: RunConfig) -> Result<Self, CliError> {
        let law = GasLaw::new(c.gamma).map_err(|e| CliError::solver(&e, Some("gamma")))?;
        require(
            c.rho_bar.is_finite() && c.rho_bar > 0.0,
            "rho-bar",
            "must be positive",
        )?;
        require(
            c.e_bar.is_finite() && c.e_bar > 0.0,
            "e-bar",
            "must be positive",
        )?;
        let mut opts = SolverOptions::default();
        if let Some(tol) = c.tol {
            require(tol.is_finite() && tol > 0.0, "tol", "must be positive")?;
            opts = opts.with_tolerance(tol);
        }
        Ok(Context {
            kind: c.kind,
            law,
            opts,
            out: c.out,
            with_oracle: c.with_oracle,
            seed: c.seed,
            rho_bar: c.rho_bar,
            e_bar: c.e_bar,
        })
    }

    fn state_at(&self, theta: f64) -> Result<GasState, CliError> {
        require(theta > 0.0 && theta < 1.0, "theta", "must lie in (0, 1)")?;
        reference_state(theta, self.rho_bar, self.e_bar, &self.law)
            .map_err(|e| CliError::solver(&e, Some("theta")))
    }

    fn primitive_state(
        &self,
        w: [f64; 3],
        field: &str,
        subsonic: bool,
    ) -> Result<GasState, CliError> {
        let [rho, v, p] = w;
        require(
            rho > 0.0 && p > 0.0,
            field,
            "density and pressure must be positive",
        )?;
        let u = GasState::from_primitive(rho, v, p / ((self.law.gamma() - 1.0) * rho))
            .map_err(|e| CliError::solver(&e, Some(field)))?;
        require(
            !subsonic || u.is_subsonic(&self.law),
            field,
            "state must satisfy 0 < v < c",
        )?;
        Ok(u)
    }

    /// Writes the main artifact; returns whether it went to a file.
    fn write_artifact(&self, content: &str) -> Result<bool, CliError> {
        match &self.out {
            Some(path) => {
                std::fs::write(path, content).map_err(|e| CliError {
                    exit: 2,
                    kind: "io".into(),
                    field: Some("out".into()),
                    message: format!("{}: {e}", path.display()),
                })?;
                Ok(true)
            }
            None => {
                print!("{content}");
                Ok(false)
            }
        }
    }

    /// Summary JSON goes to stdout when the artifact went to a file, to stderr otherwise.
    fn write_summary<T: Serialize>(&self, to_file: bool, summary: &T) {
        let text = serde_json::to_string_pretty(summary).expect("summary serializes");
        if to_file {
            println!("{text}");
        } else {
            eprintln!("{text}");
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn closed_chi(ctx: &Context, theta: f64) -> Result<f64, Error> {
    if !ctx.law.is_reference() {
        return Err(Error::UnsupportedGamma(ctx.law.gamma()));
    }
    chi_closed(ctx.kind, theta)
}

fn chi_scan(ctx: &Context, theta_min: f64, theta_max: f64, samples: usize) -> Result<(), CliError> {
    require(theta_min > 0.0, "theta-min", "must be positive")?;
    require(theta_max < 1.0, "theta-max", "must be below 1")?;
    require(theta_min < theta_max, "theta-max", "must exceed theta-min")?;
    require(samples >= 2, "samples", "need at least 2 samples")?;

    let thetas: Vec<f64> = (0..samples)
        .map(|i| theta_min + (theta_max - theta_min) * i as f64 / (samples - 1) as f64)
        .collect();
    type ScanRow = (f64, Option<f64>, Option<(f64, f64)>, Vec<String>);
    let rows: Vec<ScanRow> = thetas
        .par_iter()
        .map(|&theta| {
            let mut diag = Vec::new();
            let closed = closed_chi(ctx, theta)
                .map_err(|e| diag.push(format!("closed: {e}")))
                .ok();
            let fitted = if ctx.with_oracle {
                extract_interaction_series(
                    ctx.kind,
                    theta,
                    ctx.rho_bar,
                    ctx.e_bar,
                    &ctx.law,
                    &ctx.opts,
                    &interaction_h_grid(theta),
                )
                .map(|s| (s.chi, s.fit_residual))
                .map_err(|e| diag.push(format!("oracle: {e}")))
                .ok()
            } else {
                None
            };
            (theta, closed, fitted, diag)
        })
        .collect();

    // the diagnostic column only appears when some row needs it
    let with_diag = rows.iter().any(|r| !r.3.is_empty());
    let mut csv = String::from("theta,chi_closed,chi_fitted,fit_residual");
    csv.push_str(if with_diag { ",diagnostic\n" } else { "\n" });
    for (theta, closed, fitted, diag) in &rows {
        write!(
            csv,
            "{},{},{},{}",
            num(*theta),
            opt_num(*closed),
            opt_num(fitted.map(|f| f.0)),
            opt_num(fitted.map(|f| f.1))
        )
        .unwrap();
        if with_diag {
            csv.push(',');
            csv.push_str(&diag.join("; ").replace([',', '\n'], ";"));
        }
        csv.push('\n');
    }
    ctx.write_artifact(&csv)?;
    Ok(())
}

#[derive(Serialize)]
struct BlowupSummary {
    kind: CouplingKind,
    theta: f64,
    h: f64,
    sigma0: f64,
    pairs_requested: usize,
    pairs_completed: usize,
    overflow: bool,
    /// Slope of ln|sigma3| against the pair index.
    growth_exponent: f64,
    growth_factor: f64,
    cumulative_factor: f64,
    chi_closed: Option<f64>,
    /// ln(1 + chi h^2) from the closed form.
    predicted_exponent: Option<f64>,
    chi_fitted: Option<f64>,
    predicted_exponent_fitted: Option<f64>,
    note: &'static str,
}

fn log_slope(traj: &[f64]) -> f64 {
    let n = traj.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let ys: Vec<f64> = traj.iter().map(|s| s.abs().ln()).collect();
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    sxy / sxx
}

fn blowup(
    ctx: &Context,
    theta: f64,
    sigma0: f64,
    h: f64,
    pairs: usize,
) -> Result<ExitCode, CliError> {
    require(
        h.is_finite() && h.abs() <= 0.2,
        "h",
        "|h| must not exceed 0.2",
    )?;
    require(pairs >= 1, "pairs", "need at least one pair")?;
    require(
        sigma0 != 0.0 && sigma0.abs() <= 0.2,
        "sigma0",
        "must be nonzero with |sigma0| <= 0.2",
    )?;
    let u = ctx.state_at(theta)?;
    let sigma = sigma0 * ctx.rho_bar;

    let (trajectory, ratios, predicted, overflow) =
        match chain_propagate(ctx.kind, &u, sigma, 1.0, h, pairs, &ctx.law, &ctx.opts) {
            Ok(c) => (c.trajectory, c.ratios, c.predicted, false),
            Err(Error::AmplitudeOverflow {
                trajectory,
                ratios,
                predicted,
                ..
            }) => (trajectory, ratios, predicted, true),
            Err(e) => return Err(CliError::solver(&e, None)),
        };

    let mut csv = String::from("pair_index,sigma3,ratio,predicted_ratio\n");
    for (i, (r, p)) in ratios.iter().zip(&predicted).enumerate() {
        writeln!(
            csv,
            "{},{},{},{}",
            i + 1,
            num(trajectory[i + 1]),
            num(*r),
            opt_num(*p)
        )
        .unwrap();
    }
    let to_file = ctx.write_artifact(&csv)?;

    let exponent = |chi: f64| {
        let g = 1.0 + chi * h * h;
        (g > 0.0).then(|| g.ln())
    };
    let chi = closed_chi(ctx, theta).ok();
    let chi_fitted = if ctx.with_oracle {
        extract_interaction_series(
            ctx.kind,
            theta,
            ctx.rho_bar,
            ctx.e_bar,
            &ctx.law,
            &ctx.opts,
            &interaction_h_grid(theta),
        )
        .ok()
        .map(|s| s.chi)
    } else {
        None
    };
    let slope = log_slope(&trajectory);
    let summary = BlowupSummary {
        kind: ctx.kind,
        theta,
        h,
        sigma0,
        pairs_requested: pairs,
        pairs_completed: ratios.len(),
        overflow,
        growth_exponent: slope,
        growth_factor: slope.exp(),
        cumulative_factor: trajectory[trajectory.len() - 1] / trajectory[0],
        chi_closed: chi,
        predicted_exponent: chi.and_then(exponent),
        chi_fitted,
        predicted_exponent_fitted: chi_fitted.and_then(exponent),
        note: "only the transmitted 3-wave is carried to the next junction; reflected 1-waves and contact 2-waves are discarded, and each pair starts from the state the previous pair left behind the wave",
    };
    ctx.write_summary(to_file, &summary);
    Ok(if overflow {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    })
}

#[derive(Serialize)]
struct Traces {
    left: GasState,
    right: GasState,
}

#[derive(Serialize)]
struct JunctionReport {
    kind: CouplingKind,
    sigma: [f64; 3],
    traces: Traces,
    residual: f64,
    iterations: usize,
    det_numeric: f64,
    det_analytic: f64,
    det_printed: f64,
    /// `-det_analytic * det[r1 r2 r3]`, the value `det_numeric` should match.
    det_cross_check: f64,
    det_relative_gap: f64,
}

fn junction(
    ctx: &Context,
    a_minus: f64,
    a_plus: f64,
    left: [f64; 3],
    right: [f64; 3],
) -> Result<(), CliError> {
    require(
        a_minus.is_finite() && a_minus > 0.0,
        "a-minus",
        "must be positive",
    )?;
    require(
        a_plus.is_finite() && a_plus > 0.0,
        "a-plus",
        "must be positive",
    )?;
    let ul = ctx.primitive_state(left, "left", true)?;
    let ur = ctx.primitive_state(right, "right", true)?;
    let fan = solve_junction_riemann(ctx.kind, a_minus, a_plus, &ul, &ur, &ctx.law, &ctx.opts)
        .map_err(|e| CliError::solver(&e, None))?;
    let det = det_criterion(ctx.kind, a_minus, &ul, &ctx.law, &ctx.opts)
        .map_err(|e| CliError::solver(&e, None))?;
    let report = JunctionReport {
        kind: ctx.kind,
        sigma: fan.sigma,
        traces: Traces {
            left: fan.trace_left,
            right: fan.trace_right,
        },
        residual: fan.residual,
        iterations: fan.iterations,
        det_numeric: det.numeric,
        det_analytic: det.analytic,
        det_printed: det.printed,
        det_cross_check: det.cross_check,
        det_relative_gap: det.relative_gap(),
    };
    ctx.write_artifact(&(serde_json::to_string_pretty(&report).unwrap() + "\n"))?;
    Ok(())
}

#[derive(Serialize)]
struct RiemannReport {
    sigma: [f64; 3],
    left: GasState,
    star_left: GasState,
    star_right: GasState,
    right: GasState,
    star_velocity: f64,
    star_pressure: f64,
    residual: f64,
    iterations: usize,
}

fn riemann(ctx: &Context, left: [f64; 3], right: [f64; 3]) -> Result<(), CliError> {
    let ul = ctx.primitive_state(left, "left", false)?;
    let ur = ctx.primitive_state(right, "right", false)?;
    let fan = solve_riemann(&ul, &ur, &ctx.law, &ctx.opts.newton)
        .map_err(|e| CliError::solver(&e, None))?;
    let report = RiemannReport {
        sigma: fan.sigma,
        left: fan.u_left,
        star_left: fan.u_star_left,
        star_right: fan.u_star_right,
        right: fan.u_right,
        star_velocity: fan.u_star_left.velocity(),
        star_pressure: fan.u_star_left.pressure(&ctx.law),
        residual: fan.residual,
        iterations: fan.iterations,
    };
    ctx.write_artifact(&(serde_json::to_string_pretty(&report).unwrap() + "\n"))?;
    Ok(())
}

#[derive(Serialize)]
struct StationarySummary {
    kind: CouplingKind,
    pieces: usize,
    total_variation: f64,
    section_variation: f64,
    tv_ratio: Option<f64>,
    max_residual: f64,
}

fn stationary(
    ctx: &Context,
    theta: f64,
    sections: Option<Vec<f64>>,
    random_pieces: Option<usize>,
    amplitude: f64,
) -> Result<(), CliError> {
    let sections = match (sections, random_pieces) {
        (Some(s), _) => s,
        (None, Some(n)) => {
            require(n >= 1, "random-pieces", "need at least one section")?;
            require(
                (0.0..=0.09).contains(&amplitude),
                "amplitude",
                "must lie in [0, 0.09]",
            )?;
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            (0..n)
                .map(|_| 1.0 + amplitude * rng.gen_range(-1.0..=1.0))
                .collect()
        }
        (None, None) => {
            return Err(CliError::input(
                "sections",
                "give --sections or --random-pieces",
            ))
        }
    };
    require(
        !sections.is_empty(),
        "sections",
        "need at least one section",
    )?;
    let u0 = ctx.state_at(theta)?;
    let breaks: Vec<f64> = (1..sections.len()).map(|j| j as f64).collect();
    let profile = SectionProfile::pieces(breaks, sections.clone())
        .map_err(|e| CliError::solver(&e, Some("sections")))?;
    let st = stationary_profile(ctx.kind, &profile, &u0, &ctx.law, &ctx.opts)
        .map_err(|e| CliError::solver(&e, None))?;

    let mut csv = String::from("index,section,rho,q,E,residual\n");
    for (j, (a, u)) in sections.iter().zip(&st.states).enumerate() {
        let res = if j == 0 {
            None
        } else {
            Some(st.residuals[j - 1])
        };
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            j,
            num(*a),
            num(u.rho()),
            num(u.q()),
            num(u.energy()),
            opt_num(res)
        )
        .unwrap();
    }
    let to_file = ctx.write_artifact(&csv)?;
    let summary = StationarySummary {
        kind: ctx.kind,
        pieces: sections.len(),
        total_variation: st.total_variation,
        section_variation: st.section_variation,
        tv_ratio: (st.section_variation > 0.0).then(|| st.total_variation / st.section_variation),
        max_residual: st.residuals.iter().cloned().fold(0.0, f64::max),
    };
    ctx.write_summary(to_file, &summary);
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let ctx = Context::new(cli.config)?;
    match cli.command {
        Command::ChiScan {
            theta_min,
            theta_max,
            samples,
        } => chi_scan(&ctx, theta_min, theta_max, samples)?,
        Command::Blowup {
            theta,
            sigma0,
            h,
            pairs,
        } => return blowup(&ctx, theta, sigma0, h, pairs),
        Command::Junction {
            a_minus,
            a_plus,
            left,
            right,
        } => junction(&ctx, a_minus, a_plus, left, right)?,
        Command::Stationary {
            theta,
            sections,
            random_pieces,
            amplitude,
        } => stationary(&ctx, theta, sections, random_pieces, amplitude)?,
        Command::Riemann { left, right } => riemann(&ctx, left, right)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => return from_clap(e).emit(),
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => e.emit(),
    }
}

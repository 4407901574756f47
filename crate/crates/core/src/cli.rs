//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 numerical
//! failure.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::circuit::{channel_pair, NoiseModel, Route};
use crate::error::Error;
use crate::fixedpoint::{solve_fixed_points, OptimizerConfig};
use crate::ising::{
    brute_force_gamma, stationary_distribution, transition_probabilities, IsingParams,
};
use crate::machine::complexities;
use crate::pipeline::{
    ambiguity_csv, ambiguity_map, complexity_sweep, emit_outputs, read_sweep_csv, render_svg,
    theory_band, write_ambiguity_csv, AmbiguityMap, ChannelSource, OutputPaths, RunConfig, Source,
    PAPER_T_GRID,
};
use crate::tomography::{generate_tomography_data, reconstruct_channels, TomographyDataset};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "emachine",
    version,
    about = "Classical and quantum ε-machines of the Ising chain"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print Γ, the stationary distribution and both complexities.
    Gamma(PointArgs),
    /// Run the full temperature sweep and write all outputs.
    Sweep(SweepArgs),
    /// Consistency map from an existing sweep CSV.
    Ambiguity(AmbiguityArgs),
    /// Simulate tomography of the conditional maps and report its accuracy.
    Tomography(TomographyArgs),
    /// Solve for fixed-point states of the noisy conditional maps.
    FixedPoint(FixedPointArgs),
    /// Cross-check Γ against brute-force enumeration of a finite chain.
    Oracle(OracleArgs),
}

#[derive(Args, Debug, Clone)]
pub struct PointArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub j: f64,
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, default_value_t = 2.0)]
    pub t: f64,
}

#[derive(Args, Debug, Clone, Default)]
pub struct NoiseArgs {
    /// Two-qubit depolarizing weight.
    #[arg(long)]
    pub noise_p: Option<f64>,
    /// Y over-rotation after each single-qubit gate (radians).
    #[arg(long, allow_negative_numbers = true)]
    pub noise_eps: Option<f64>,
    /// Readout flip probability.
    #[arg(long)]
    pub noise_q: Option<f64>,
}

impl NoiseArgs {
    fn apply(&self, base: NoiseModel) -> NoiseModel {
        NoiseModel {
            depolarizing: self.noise_p.unwrap_or(base.depolarizing),
            overrotation: self.noise_eps.unwrap_or(base.overrotation),
            readout_flip: self.noise_q.unwrap_or(base.readout_flip),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteArg {
    Direct,
    Decomposed,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Direct => Route::Direct,
            RouteArg::Decomposed => Route::Decomposed,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelsArg {
    Analytic,
    Tomography,
}

impl From<ChannelsArg> for ChannelSource {
    fn from(c: ChannelsArg) -> Self {
        match c {
            ChannelsArg::Analytic => ChannelSource::Analytic,
            ChannelsArg::Tomography => ChannelSource::Tomography,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceArg {
    Theory,
    M,
    S,
}

impl From<SourceArg> for Source {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Theory => Source::Theory,
            SourceArg::M => Source::M,
            SourceArg::S => Source::S,
        }
    }
}

/// Parsed `--t-grid` value.
#[derive(Debug, Clone, PartialEq)]
pub struct TGrid(pub Vec<f64>);

/// `paper` or a comma-separated list of temperatures.
pub fn parse_t_grid(s: &str) -> Result<TGrid, String> {
    if s.trim() == "paper" {
        return Ok(TGrid(PAPER_T_GRID.to_vec()));
    }
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| format!("not a temperature: {x:?}"))
        })
        .collect::<Result<_, _>>()
        .map(TGrid)
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub j: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, value_parser = parse_t_grid)]
    pub t_grid: Option<TGrid>,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Shots per causal state for the statistics.
    #[arg(long)]
    pub shots: Option<u64>,
    /// Shots per tomography setting.
    #[arg(long)]
    pub tomo_shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Exact probabilities everywhere (infinite shots).
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Also write a heatmap of the consistency map.
    #[arg(long)]
    pub svg: bool,
    #[arg(long, value_enum)]
    pub route: Option<RouteArg>,
    #[arg(long, value_enum)]
    pub channels: Option<ChannelsArg>,
    /// Map shown in the heatmap.
    #[arg(long, value_enum, default_value = "theory")]
    pub source: SourceArg,
}

impl SweepArgs {
    pub fn resolve(&self) -> Result<RunConfig, Failure> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?;
                serde_json::from_str::<RunConfig>(&text)
                    .map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(j) = self.j {
            cfg.j = j;
        }
        if let Some(b) = self.b {
            cfg.b_nominal = b;
        }
        if let Some(g) = &self.t_grid {
            cfg.t_grid = g.0.clone();
        }
        cfg.noise = self.noise.apply(cfg.noise);
        if let Some(n) = self.shots {
            cfg.shots = Some(n);
        }
        if let Some(n) = self.tomo_shots {
            cfg.tomography_shots = Some(n);
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.exact {
            cfg = cfg.exact();
        }
        if let Some(d) = &self.out_dir {
            cfg.out_dir = d.clone();
        }
        cfg.svg |= self.svg;
        if let Some(r) = self.route {
            cfg.route = r.into();
        }
        if let Some(c) = self.channels {
            cfg.channel_source = c.into();
        }
        cfg.validate().map_err(Failure::from_error)?;
        Ok(cfg)
    }
}

#[derive(Args, Debug, Clone)]
pub struct AmbiguityArgs {
    /// Sweep CSV written by `sweep`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "theory")]
    pub source: SourceArg,
    /// Write the map here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a heatmap.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct TomographyArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long, default_value_t = 100_000)]
    pub tomo_shots: u64,
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "decomposed")]
    pub route: RouteArg,
    /// Save the simulated dataset as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct FixedPointArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long, value_enum, default_value = "analytic")]
    pub channels: ChannelsArg,
    /// Reconstruct the maps from this tomography dataset instead.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    pub tomo_shots: u64,
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "decomposed")]
    pub route: RouteArg,
    /// Save the solution as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Chain length of the enumeration.
    #[arg(long, default_value_t = 24)]
    pub length: usize,
}

/// Error carried to the exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }

    /// Bad parameters and unreadable inputs are usage errors; the rest are
    /// numerical failures.
    pub fn from_error(e: Error) -> Self {
        match e {
            Error::InvalidParams(_)
            | Error::TooLarge(_)
            | Error::Io { .. }
            | Error::Format { .. } => Failure::usage(e.to_string()),
            _ => Failure::numerical(e.to_string()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::from_error(e)
    }
}

fn point_params(p: &PointArgs) -> Result<IsingParams, Failure> {
    IsingParams::new(p.j, p.b, p.t).map_err(Failure::from_error)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::usage(format!("cannot write output: {e}")))
}

fn cmd_gamma(a: &PointArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let g = transition_probabilities(&point_params(a)?)?;
    let p = stationary_distribution(&g)?;
    let c = complexities(&g)?;
    let e = g.entries();
    let text = format!(
        "gamma00={}\ngamma01={}\ngamma10={}\ngamma11={}\np0={}\np1={}\nc_c={}\nc_q={}\n",
        e[0][0], e[0][1], e[1][0], e[1][1], p.p0, p.p1, c.c_c, c.c_q
    );
    emit(out, &text)
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let cfg = a.resolve()?;
    let records = complexity_sweep(&cfg)?;
    let first = Source::from(a.source);
    let mut sources = vec![first];
    sources.extend(Source::ALL.into_iter().filter(|s| *s != first));
    let maps: Vec<AmbiguityMap> = sources
        .iter()
        .map(|&s| ambiguity_map(&records, s))
        .collect();
    let band = theory_band(&records, cfg.j).ok();
    let paths = OutputPaths::in_dir(&cfg.out_dir, cfg.svg);
    emit_outputs(&cfg, &records, &maps, band.as_ref(), &paths)?;
    let failed: Vec<_> = records.iter().filter(|r| !r.status.is_ok()).collect();
    emit(
        out,
        &format!(
            "{} records ({} failed) written to {}\n",
            records.len(),
            failed.len(),
            cfg.out_dir.display()
        ),
    )?;
    if let Some(r) = failed.first() {
        for r in &failed {
            let _ = writeln!(err, "record T={}: {}", r.t_nominal, r.status.label());
        }
        return Err(Failure::numerical(format!(
            "{} of {} grid points failed (first at T={})",
            failed.len(),
            records.len(),
            r.t_nominal
        )));
    }
    Ok(())
}

fn cmd_ambiguity(a: &AmbiguityArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let records = read_sweep_csv(&a.input)?;
    if records.len() < 2 {
        return Err(Failure::usage(
            "an ambiguity map needs at least two records",
        ));
    }
    let map = ambiguity_map(&records, a.source.into());
    match &a.out {
        Some(p) => write_ambiguity_csv(p, std::slice::from_ref(&map))?,
        None => emit(out, &ambiguity_csv(std::slice::from_ref(&map)))?,
    }
    if let Some(p) = &a.svg {
        std::fs::write(p, render_svg(&map)).map_err(|e| Failure::from_error(Error::io(p, e)))?;
    }
    Ok(())
}

fn cmd_tomography(a: &TomographyArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let g = transition_probabilities(&point_params(&a.point)?)?;
    let noise = a.noise.apply(NoiseModel::default());
    let (_, pair) = channel_pair(&g, a.route.into(), &noise)?;
    let shots = (!a.exact).then_some(a.tomo_shots);
    let data = generate_tomography_data(&pair, shots, a.seed)?;
    if let Some(p) = &a.out {
        data.save_json(p)?;
    }
    let rec = reconstruct_channels(&data)?;
    let d0 = crate::qmath::trace_distance(pair.e0.choi(), rec.e0_hat.choi())?;
    let d1 = crate::qmath::trace_distance(pair.e1.choi(), rec.e1_hat.choi())?;
    let tp = rec.pair().total().trace_preservation_defect();
    emit(
        out,
        &format!(
            "shots={}\nchoi_distance_e0={d0}\nchoi_distance_e1={d1}\ntrace_preservation_defect={tp}\nfit_residual={}\n",
            shots.map(|s| s.to_string()).unwrap_or_else(|| "exact".into()),
            rec.fit_residual
        ),
    )
}

fn cmd_fixed_point(a: &FixedPointArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let g = transition_probabilities(&point_params(&a.point)?)?;
    let noise = a.noise.apply(NoiseModel::default());
    let pair = if let Some(p) = &a.input {
        reconstruct_channels(&TomographyDataset::load_json(p)?)?.pair()
    } else {
        let (_, device) = channel_pair(&g, a.route.into(), &noise)?;
        match a.channels {
            ChannelsArg::Analytic => device,
            ChannelsArg::Tomography => {
                let shots = (!a.exact).then_some(a.tomo_shots);
                reconstruct_channels(&generate_tomography_data(&device, shots, a.seed)?)?.pair()
            }
        }
    };
    let cfg = OptimizerConfig {
        seed: a.seed,
        ..OptimizerConfig::default()
    };
    let sol = solve_fixed_points(&pair, &cfg, a.point.j, Some(&g))?;
    if let Some(p) = &a.out {
        sol.save_json(p)?;
    }
    let text = serde_json::to_string_pretty(&sol.to_json()).expect("solution serialises");
    emit(out, &(text + "\n"))
}

fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let params = point_params(&a.point)?;
    let exact = transition_probabilities(&params)?;
    let brute = brute_force_gamma(&params, a.length)?;
    emit(
        out,
        &format!(
            "length={}\ntransfer_gamma00={}\ntransfer_gamma10={}\nbrute_gamma00={}\nbrute_gamma10={}\nmax_abs_diff={}\n",
            a.length,
            exact.get(0, 0),
            exact.get(1, 0),
            brute.get(0, 0),
            brute.get(1, 0),
            exact.max_abs_diff(&brute)
        ),
    )
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
            } else {
                let _ = out.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Gamma(a) => cmd_gamma(a, out),
        Command::Sweep(a) => cmd_sweep(a, out, err),
        Command::Ambiguity(a) => cmd_ambiguity(a, out),
        Command::Tomography(a) => cmd_tomography(a, out),
        Command::FixedPoint(a) => cmd_fixed_point(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

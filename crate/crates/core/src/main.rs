use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use infocost::mc::McConfig;
use infocost::model::expected_utility;
use infocost::params::{feasibility_check, gamma_bound, horizon_bound};
use infocost::report::{
    cost_table, figure_csv, figure_data, format_percent, mc_check, table_csv, table_text, Figure,
    McCheckReport, ScenarioSpec, TableRow, TABLE_GAMMAS, TABLE_HORIZONS, TABLE_SIGMAS,
};
use infocost::{cost, CostKind, CostPair, Error, InvestorProfile, InvestorType, MarketParams};

#[derive(Parser, Debug)]
#[command(
    name = "infocost",
    version,
    about = "Welfare costs of information, predictability and learning for CRRA investors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expected utility and certainty equivalent per investor type.
    Value {
        #[arg(
            long = "type",
            value_delimiter = ',',
            help = "investor types, e.g. U,M,R,I"
        )]
        types: Vec<InvestorType>,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Wealth-equivalent costs between investor types.
    Cost {
        #[command(flatten)]
        costs: CostArgs,
        #[arg(long, help = "cumulated or annual")]
        kind: Option<CostKind>,
    },
    /// Annualized costs between investor types.
    AnnualCost {
        #[command(flatten)]
        costs: CostArgs,
    },
    /// Cost tables over the standard (gamma, T) grid.
    Table {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2),
              help = "1 = cumulated costs, 2 = annual costs")]
        which: u8,
        #[arg(
            long = "extra-T",
            value_delimiter = ',',
            help = "horizons appended to the grid"
        )]
        extra_horizons: Vec<f64>,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cost curves and relative contributions behind the figures.
    FigureData {
        #[arg(long, help = "costs-vs-T, costs-vs-T-long or costs-vs-gamma")]
        figure: Figure,
        #[arg(long)]
        kind: Option<CostKind>,
        #[arg(long, help = "grid points per curve [default: 60]")]
        points: Option<usize>,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo cross-check of the closed-form expected utilities.
    McCheck {
        #[arg(long = "type", value_delimiter = ',')]
        types: Vec<InvestorType>,
        #[arg(long, help = "number of paths [default: 100000]")]
        paths: Option<usize>,
        #[arg(long = "steps-per-year", help = "time steps per year [default: 100]")]
        steps_per_year: Option<usize>,
        #[arg(long, help = "RNG seed [default: 1]")]
        seed: Option<u64>,
        #[arg(long, help = "pair every draw with its mirrored path")]
        antithetic: bool,
        #[arg(long = "zero-weight", help = "check the bond-only strategy instead")]
        zero_weight: bool,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct CostArgs {
    #[arg(
        long = "pair",
        value_delimiter = ',',
        help = "pairs such as UM,MR,RI,UI"
    )]
    pairs: Vec<CostPair>,
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Clone, Default)]
struct ScenarioArgs {
    #[arg(long, help = "relative risk aversion")]
    gamma: Option<f64>,
    #[arg(long = "T", help = "investment horizon in years")]
    horizon: Option<f64>,
    #[arg(long, help = "stock volatility [default: 0.202]")]
    sigma: Option<f64>,
    #[arg(
        long,
        help = "prior mean of the market price of risk [default: 0.08/sigma]"
    )]
    theta0: Option<f64>,
    #[arg(long, help = "prior variance [default: (0.0243/sigma)^2]")]
    v0: Option<f64>,
    #[arg(long, help = "risk-free rate [default: 0.05]")]
    r: Option<f64>,
    #[arg(long, help = "initial wealth [default: 1]")]
    x: Option<f64>,
    #[arg(long = "wide-prior", help = "use v0 = (0.0452/sigma)^2")]
    wide_prior: bool,
    #[arg(long, help = "key=value file; command-line flags take precedence")]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
struct OutputArgs {
    #[arg(long, help = "write to this file instead of stdout")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug)]
enum CliError {
    /// Invalid or infeasible input.
    Input(String),
    /// The simulation disagrees with the closed forms.
    Mismatch(String),
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => 2,
            Self::Mismatch(_) => 3,
            Self::Other(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Input(m) | Self::Mismatch(m) | Self::Other(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InternalConsistency(_) => Self::Other(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

const CONFIG_KEYS: &[&str] = &[
    "gamma",
    "T",
    "sigma",
    "theta0",
    "v0",
    "r",
    "x",
    "wide_prior",
    "kind",
    "paths",
    "steps_per_year",
    "seed",
    "antithetic",
    "points",
    "format",
];

/// `key = value` settings; `#` starts a comment.
#[derive(Debug, Default)]
struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("line {}: expected key=value", n + 1));
            };
            let key = key.trim().replace('-', "_");
            let key = if key.eq_ignore_ascii_case("t") {
                "T".to_string()
            } else {
                key
            };
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key `{key}`", n + 1));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(Self { entries })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.entries
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| CliError::Input(format!("config key `{key}` = `{v}`: {e}")))
            })
            .transpose()
    }

    fn flag(&self, key: &str) -> CliResult<bool> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }

    fn format(&self) -> CliResult<Option<Format>> {
        self.entries
            .get("format")
            .map(|v| {
                Format::from_str(v, true).map_err(|_| {
                    CliError::Input(format!(
                        "config key `format` = `{v}`: expected csv, json or text"
                    ))
                })
            })
            .transpose()
    }
}

/// Flags, then config file, then the default calibration.
struct Resolved {
    config: ConfigFile,
    args: ScenarioArgs,
}

impl Resolved {
    fn new(args: &ScenarioArgs) -> CliResult<Self> {
        Ok(Self {
            config: ConfigFile::load(args.config.as_deref())?,
            args: args.clone(),
        })
    }

    fn pick<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.config.get(key),
        }
    }

    fn scenario(&self) -> CliResult<ScenarioSpec> {
        let defaults = ScenarioSpec::default();
        Ok(ScenarioSpec {
            sigma: self
                .pick(self.args.sigma, "sigma")?
                .unwrap_or(defaults.sigma),
            theta0: self.pick(self.args.theta0, "theta0")?,
            v0: self.pick(self.args.v0, "v0")?,
            r: self.pick(self.args.r, "r")?.unwrap_or(defaults.r),
            wide_prior: self.args.wide_prior || self.config.flag("wide_prior")?,
        })
    }

    fn market(&self) -> CliResult<MarketParams> {
        Ok(self.scenario()?.market()?)
    }

    fn profile(&self) -> CliResult<InvestorProfile> {
        let gamma = self.pick(self.args.gamma, "gamma")?.ok_or_else(|| {
            CliError::Input("missing --gamma (or gamma= in the config file)".into())
        })?;
        let horizon = self
            .pick(self.args.horizon, "T")?
            .ok_or_else(|| CliError::Input("missing --T (or T= in the config file)".into()))?;
        Ok(InvestorProfile::new(gamma, horizon)?)
    }

    /// Profile that also passes the feasibility condition.
    fn feasible_profile(&self, params: &MarketParams) -> CliResult<InvestorProfile> {
        let profile = self.profile()?;
        if !feasibility_check(params, &profile) {
            return Err(CliError::Input(infeasible_message(params, &profile)));
        }
        Ok(profile)
    }

    fn wealth(&self) -> CliResult<f64> {
        let x = self.pick(self.args.x, "x")?.unwrap_or(1.0);
        if !(x.is_finite() && x > 0.0) {
            return Err(CliError::Input(format!(
                "initial wealth --x must be positive, got {x}"
            )));
        }
        Ok(x)
    }

    fn format(&self, flag: Option<Format>, default: Format) -> CliResult<Format> {
        Ok(flag.or(self.config.format()?).unwrap_or(default))
    }
}

fn infeasible_message(params: &MarketParams, profile: &InvestorProfile) -> String {
    let (g, t, v0) = (profile.gamma, profile.horizon, params.v0);
    let mut msg = format!(
        "infeasible parameters: the condition gamma*(1+v0*T) - v0*T > 0 fails \
         (gamma = {g}, T = {t}, v0 = {v0}, margin = {:e})",
        profile.feasibility_margin(params)
    );
    if g < 1.0 {
        let _ = write!(
            msg,
            "; for gamma = {g} the horizon must satisfy T < T_bar = {:.4}, \
             and for T = {t} risk aversion must exceed gamma_bar = {:.6}",
            horizon_bound(g, v0),
            gamma_bound(t, v0)
        );
    }
    msg
}

fn emit(output: &OutputArgs, body: &str) -> CliResult<()> {
    match &output.out {
        Some(path) => fs::write(path, body)
            .map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Other(format!("serialization failed: {e}")))
}

#[derive(Debug, Serialize)]
struct ValueRecord {
    #[serde(rename = "type")]
    investor: InvestorType,
    gamma: f64,
    #[serde(rename = "T")]
    horizon: f64,
    x: f64,
    value: f64,
    certainty_equivalent: f64,
    log_ce: f64,
}

fn cmd_value(
    types: &[InvestorType],
    scenario: &ScenarioArgs,
    output: &OutputArgs,
) -> CliResult<()> {
    let resolved = Resolved::new(scenario)?;
    let params = resolved.market()?;
    let profile = resolved.feasible_profile(&params)?;
    let x = resolved.wealth()?;
    let types = if types.is_empty() {
        &InvestorType::ALL[..]
    } else {
        types
    };
    let records = types
        .iter()
        .map(|&t| {
            let eu = expected_utility(t, x, &params, &profile)?;
            Ok(ValueRecord {
                investor: t,
                gamma: profile.gamma,
                horizon: profile.horizon,
                x,
                value: eu.value(),
                certainty_equivalent: eu.certainty_equivalent(),
                log_ce: eu.log_ce,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let body = match resolved.format(output.format, Format::Csv)? {
        Format::Json => to_json(&records)?,
        Format::Csv => {
            let mut s = String::from("type,gamma,T,x,value,certainty_equivalent,log_ce\n");
            for r in &records {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.investor, r.gamma, r.horizon, r.x, r.value, r.certainty_equivalent, r.log_ce
                );
            }
            s
        }
        Format::Text => {
            let mut s = format!(
                "gamma = {}, T = {}, x = {}, sigma = {}, theta0 = {:.6}, v0 = {:.6}\n",
                profile.gamma, profile.horizon, x, params.sigma, params.theta0, params.v0
            );
            let _ = writeln!(
                s,
                "{:<4} {:>22} {:>22}",
                "type", "value", "certainty equiv."
            );
            for r in &records {
                let _ = writeln!(
                    s,
                    "{:<4} {:>22.12e} {:>22.12}",
                    r.investor, r.value, r.certainty_equivalent
                );
            }
            s
        }
    };
    emit(output, &body)
}

#[derive(Debug, Serialize)]
struct CostRecord {
    pair: String,
    kind: CostKind,
    gamma: f64,
    #[serde(rename = "T")]
    horizon: f64,
    sigma: f64,
    cost: f64,
}

fn cmd_cost(args: &CostArgs, kind: Option<CostKind>) -> CliResult<()> {
    let resolved = Resolved::new(&args.scenario)?;
    let kind = match kind {
        Some(k) => k,
        None => resolved.config.get("kind")?.unwrap_or(CostKind::Cumulated),
    };
    let params = resolved.market()?;
    let profile = resolved.feasible_profile(&params)?;
    let pairs = if args.pairs.is_empty() {
        vec![CostPair::UM, CostPair::MR, CostPair::RI, CostPair::UI]
    } else {
        args.pairs.clone()
    };
    let records = pairs
        .iter()
        .map(|&pair| {
            Ok(CostRecord {
                pair: pair.to_string(),
                kind,
                gamma: profile.gamma,
                horizon: profile.horizon,
                sigma: params.sigma,
                cost: cost(kind, pair, &params, &profile)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let body = match resolved.format(args.output.format, Format::Csv)? {
        Format::Json => to_json(&records)?,
        Format::Csv => {
            let mut s = String::from("pair,kind,gamma,T,sigma,cost\n");
            for r in &records {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    r.pair, r.kind, r.gamma, r.horizon, r.sigma, r.cost
                );
            }
            s
        }
        Format::Text => {
            let mut s = format!(
                "{kind} costs, gamma = {}, T = {}, sigma = {}\n",
                profile.gamma, profile.horizon, params.sigma
            );
            for r in &records {
                let _ = writeln!(s, "{:<3} {:>8} %", r.pair, format_percent(100.0 * r.cost));
            }
            s
        }
    };
    emit(&args.output, &body)
}

fn cmd_table(
    which: u8,
    extra: &[f64],
    scenario: &ScenarioArgs,
    output: &OutputArgs,
) -> CliResult<()> {
    let resolved = Resolved::new(scenario)?;
    let kind = if which == 1 {
        CostKind::Cumulated
    } else {
        CostKind::Annual
    };
    let sigmas: Vec<f64> = match resolved.pick(scenario.sigma, "sigma")? {
        Some(s) => vec![s],
        None => TABLE_SIGMAS.to_vec(),
    };
    let mut horizons = TABLE_HORIZONS.to_vec();
    horizons.extend_from_slice(extra);
    let base = resolved.scenario()?;
    let mut rows: Vec<TableRow> = Vec::new();
    for sigma in sigmas {
        let params = ScenarioSpec { sigma, ..base }.market()?;
        rows.extend(cost_table(kind, &params, &TABLE_GAMMAS, &horizons)?);
    }
    let body = match resolved.format(output.format, Format::Csv)? {
        Format::Csv => table_csv(&rows),
        Format::Json => to_json(&rows)?,
        Format::Text => table_text(&rows),
    };
    emit(output, &body)
}

fn cmd_figure(
    figure: Figure,
    kind: Option<CostKind>,
    points: Option<usize>,
    scenario: &ScenarioArgs,
    output: &OutputArgs,
) -> CliResult<()> {
    let resolved = Resolved::new(scenario)?;
    let kind = match kind {
        Some(k) => k,
        None => resolved.config.get("kind")?.unwrap_or(CostKind::Cumulated),
    };
    let points = resolved.pick(points, "points")?.unwrap_or(60);
    if points == 0 {
        return Err(CliError::Input("--points must be >= 1".into()));
    }
    let params = resolved.market()?;
    let data = figure_data(figure, kind, &params, points);
    for s in &data.skipped {
        eprintln!(
            "skipped gamma = {}, T = {}: {}",
            s.gamma, s.horizon, s.reason
        );
    }
    let body = match resolved.format(output.format, Format::Csv)? {
        Format::Csv => figure_csv(&data),
        Format::Json => to_json(&data)?,
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{} ({kind}), costs and shares in percent",
                figure.as_str()
            );
            for p in &data.points {
                let r = &p.row;
                let _ = writeln!(
                    s,
                    "gamma {:>8.4} T {:>8.3} | UM {:>6} MR {:>6} RI {:>6} UI {:>6} | {:>6} {:>6} {:>6}",
                    r.gamma,
                    r.horizon,
                    format_percent(100.0 * r.c_um),
                    format_percent(100.0 * r.c_mr),
                    format_percent(100.0 * r.c_ri),
                    format_percent(100.0 * r.c_ui),
                    format_percent(100.0 * p.shares[0]),
                    format_percent(100.0 * p.shares[1]),
                    format_percent(100.0 * p.shares[2]),
                );
            }
            s
        }
    };
    emit(output, &body)
}

#[allow(clippy::too_many_arguments)]
fn cmd_mc_check(
    types: &[InvestorType],
    paths: Option<usize>,
    steps_per_year: Option<usize>,
    seed: Option<u64>,
    antithetic: bool,
    zero_weight: bool,
    scenario: &ScenarioArgs,
    output: &OutputArgs,
) -> CliResult<()> {
    let resolved = Resolved::new(scenario)?;
    let params = resolved.market()?;
    let profile = resolved.feasible_profile(&params)?;
    let x = resolved.wealth()?;
    let config = McConfig::new(
        resolved.pick(paths, "paths")?.unwrap_or(100_000),
        resolved
            .pick(steps_per_year, "steps_per_year")?
            .unwrap_or(100),
        resolved.pick(seed, "seed")?.unwrap_or(1),
        antithetic || resolved.config.flag("antithetic")?,
    )?;
    let types = if types.is_empty() {
        &InvestorType::ALL[..]
    } else {
        types
    };
    let report = mc_check(types, zero_weight, x, &params, &profile, &config)?;
    let body = match resolved.format(output.format, Format::Json)? {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut s = String::from(
                "strategy,closed_form,mc_mean,mc_se,z_score,closed_form_ce,mc_ce,ce_rel_error\n",
            );
            for r in &report.rows {
                let z = r.z_score.map(|z| z.to_string()).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    r.strategy,
                    r.closed_form,
                    r.mc_mean,
                    r.mc_se,
                    z,
                    r.closed_form_ce,
                    r.mc_ce,
                    r.ce_rel_error
                );
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for r in &report.rows {
                let z = r
                    .z_score
                    .map(|z| format!("{z:+.3}"))
                    .unwrap_or_else(|| "n/a".into());
                let _ = writeln!(
                    s,
                    "{:<12} closed {:>16.10e} mc {:>16.10e} se {:>10.3e} z {:>7} ce err {:+.3e}",
                    r.strategy, r.closed_form, r.mc_mean, r.mc_se, z, r.ce_rel_error
                );
            }
            s
        }
    };
    emit(output, &body)?;
    oracle_verdict(&report)
}

fn oracle_verdict(report: &McCheckReport) -> CliResult<()> {
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!(
            "oracle disagreement: max |z| = {} exceeds {}",
            report
                .max_abs_z
                .map_or("undefined".to_string(), |z| format!("{z:.3}")),
            report.z_threshold
        )))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Value {
            types,
            scenario,
            output,
        } => cmd_value(&types, &scenario, &output),
        Command::Cost { costs, kind } => cmd_cost(&costs, kind),
        Command::AnnualCost { costs } => cmd_cost(&costs, Some(CostKind::Annual)),
        Command::Table {
            which,
            extra_horizons,
            scenario,
            output,
        } => cmd_table(which, &extra_horizons, &scenario, &output),
        Command::FigureData {
            figure,
            kind,
            points,
            scenario,
            output,
        } => cmd_figure(figure, kind, points, &scenario, &output),
        Command::McCheck {
            types,
            paths,
            steps_per_year,
            seed,
            antithetic,
            zero_weight,
            scenario,
            output,
        } => cmd_mc_check(
            &types,
            paths,
            steps_per_year,
            seed,
            antithetic,
            zero_weight,
            &scenario,
            &output,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

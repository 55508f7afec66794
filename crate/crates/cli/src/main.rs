use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use boxjenkins::arima::{self, ArimaFit, ArimaOrder};
use boxjenkins::pipeline::{self, Format, PipelineConfig};
use boxjenkins::series::{fire_incidence, load_csv, BoxCoxLambda, TimeSeries};
use boxjenkins::{Error, ErrorKind};

mod commands;

#[derive(Parser)]
#[command(
    name = "boxjenkins",
    version,
    about = "Box-Jenkins ARIMA modelling for monthly count series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// `date,value` CSV file; the bundled fire incidence series when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Box-Cox lambda (0 is the log transform).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    lambda: f64,
    /// Use only the first N observations.
    #[arg(long, value_name = "N")]
    train: Option<usize>,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct ModelArgs {
    /// Fit this order on the (training) data.
    #[arg(long, value_name = "p,d,q", value_parser = parse_order)]
    order: Option<ArimaOrder>,
    /// Reuse a fit saved by `fit --save`.
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Stationarity tests, correlograms and tentative orders.
    Identify {
        #[command(flatten)]
        data: DataArgs,
        /// Differencing order; chosen with the ADF test when omitted.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        max_lag: Option<usize>,
    },
    /// Estimate one model and test its coefficients.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_name = "p,d,q", value_parser = parse_order)]
        order: ArimaOrder,
        /// Write the fitted model as JSON.
        #[arg(long, value_name = "FILE")]
        save: Option<PathBuf>,
    },
    /// Residual checks of a fitted model.
    Diagnose {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Ljung-Box lag.
        #[arg(long, default_value_t = 10)]
        lag: usize,
        /// Degrees of freedom to subtract in the Ljung-Box test.
        #[arg(long, default_value_t = 0)]
        fitdf: usize,
    },
    /// One-step forecasts over a holdout window with fixed parameters.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Holdout length; training defaults to everything before it.
        #[arg(long, default_value_t = 12)]
        validation: usize,
    },
    /// Forecasts with prediction intervals past the end of the data.
    Forecast {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 12)]
        horizon: usize,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
    },
    /// Full pipeline from identification to forecasts.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    d: Option<usize>,
    /// Candidate orders separated by `;`, e.g. `0,1,1;1,1,1`. Derived from
    /// the correlograms when omitted.
    #[arg(long, value_name = "ORDERS")]
    grid: Option<String>,
    #[arg(long, default_value_t = 12)]
    validation: usize,
    /// Skip the one-step evaluation; the validation window is still used as
    /// forecast history.
    #[arg(long)]
    no_evaluate: bool,
    #[arg(long, default_value_t = 12)]
    horizon: usize,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    max_lag: Option<usize>,
    /// Directory for report files.
    #[arg(long, value_name = "DIR")]
    output_dir: Option<PathBuf>,
    /// Files to write into the output directory: text, json, plotdata.
    #[arg(long = "format", value_name = "FORMAT", value_delimiter = ',')]
    formats: Vec<String>,
}

fn parse_order(s: &str) -> Result<ArimaOrder, String> {
    ArimaOrder::parse(s).map_err(|e| e.to_string())
}

impl DataArgs {
    fn lambda(&self) -> Result<BoxCoxLambda, Error> {
        BoxCoxLambda::new(self.lambda)
    }

    /// Full input series.
    fn load(&self) -> Result<TimeSeries, Error> {
        match &self.input {
            Some(p) => load_csv(p),
            None => Ok(fire_incidence()),
        }
    }

    /// First `--train` observations, or everything.
    fn training(&self) -> Result<TimeSeries, Error> {
        let s = self.load()?;
        match self.train {
            Some(n) => prefix(&s, n),
            None => Ok(s),
        }
    }
}

fn prefix(s: &TimeSeries, n: usize) -> Result<TimeSeries, Error> {
    if n == 0 || n > s.len() {
        return Err(Error::InvalidArgument(format!(
            "--train {n} must be in 1..={}",
            s.len()
        )));
    }
    TimeSeries::new(s.start(), s.values()[..n].to_vec())
}

impl ModelArgs {
    /// Loads the saved fit or estimates `--order` on `train`.
    fn resolve(&self, train: &TimeSeries, lambda: BoxCoxLambda) -> Result<ArimaFit, Error> {
        match (&self.model, self.order) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                ArimaFit::from_json(&text)
            }
            (None, Some(order)) => arima::fit(train, order, lambda),
            (None, None) => Err(Error::InvalidArgument(
                "either --order or --model is required".into(),
            )),
        }
    }
}

impl RunArgs {
    fn config(&self) -> Result<PipelineConfig, Error> {
        let grid = match &self.grid {
            Some(g) => Some(
                g.split(';')
                    .filter(|s| !s.trim().is_empty())
                    .map(ArimaOrder::parse)
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            None => None,
        };
        let formats = if self.formats.is_empty() {
            vec![Format::Text]
        } else {
            self.formats
                .iter()
                .map(|f| f.parse())
                .collect::<Result<Vec<Format>, _>>()?
        };
        Ok(PipelineConfig {
            input: self.data.input.clone(),
            lambda: self.data.lambda()?,
            d: self.d,
            grid,
            train: self.data.train,
            validation: self.validation,
            evaluate: !self.no_evaluate,
            horizon: self.horizon,
            level: self.level,
            alpha: self.alpha,
            max_lag: self.max_lag,
            output_dir: self.output_dir.clone(),
            formats,
            ..PipelineConfig::default()
        })
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Config => 2,
        ErrorKind::Data => 3,
        ErrorKind::Numeric => 4,
    }
}

fn execute(cli: Cli) -> Result<String, Error> {
    match cli.command {
        Command::Identify { data, d, max_lag } => commands::identify(&data, d, max_lag),
        Command::Fit { data, order, save } => commands::fit(&data, order, save.as_deref()),
        Command::Diagnose {
            data,
            model,
            lag,
            fitdf,
        } => commands::diagnose(&data, &model, lag, fitdf),
        Command::Evaluate {
            data,
            model,
            validation,
        } => commands::evaluate(&data, &model, validation),
        Command::Forecast {
            data,
            model,
            horizon,
            level,
        } => commands::forecast(&data, &model, horizon, level),
        Command::Run(args) => {
            let config = args.config()?;
            let report = pipeline::run_pipeline(&config)?;
            if let Some(dir) = &config.output_dir {
                pipeline::write_outputs(&report, dir, &config.formats)?;
            }
            Ok(pipeline::render(
                &report,
                if args.data.json {
                    Format::Json
                } else {
                    Format::Text
                },
            ))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

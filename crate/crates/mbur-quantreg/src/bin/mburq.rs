//! Command-line front end: parses arguments, loads data, and delegates to
//! the library's report runners.

use clap::{Args, Parser, Subcommand};
use mbur_quantreg::dataio::{self, DataTable, TransformSpec};
use mbur_quantreg::links::LinkKind;
use mbur_quantreg::report::{self, ReportOptions};
use mbur_quantreg::{mbur, Error};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mburq",
    version,
    about = "MBUR parametric quantile regression for unit-interval responses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataArg {
    /// CSV input (header row, row-label first column); defaults to the
    /// bundled OECD table.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Args)]
struct CommonFitArgs {
    /// Response column (must lie strictly inside (0,1)).
    #[arg(long)]
    response: String,
    /// Comma-separated predictor columns.
    #[arg(long, value_delimiter = ',')]
    predictors: Vec<String>,
    /// Quantile link.
    #[arg(long, default_value = "logit")]
    link: String,
    /// Modeled quantile level.
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    /// Use predictors on their raw scale instead of ln(x/100).
    #[arg(long)]
    no_transform: bool,
    /// Copy this stamp into the report provenance.
    #[arg(long)]
    stamp: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Summary statistics per column.
    Describe {
        #[command(flatten)]
        data: DataArg,
        /// Columns to describe; all columns when omitted.
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
        /// Optional CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit one quantile-regression model and write its report bundle.
    Fit {
        #[command(flatten)]
        data: DataArg,
        #[command(flatten)]
        common: CommonFitArgs,
        /// Output directory for report.json and the plot-data CSVs.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the full model and a ladder of reduced models.
    Ladder {
        #[command(flatten)]
        data: DataArg,
        #[command(flatten)]
        common: CommonFitArgs,
        /// Removal sets, ';'-separated groups of ','-separated predictors
        /// (e.g. "x1;x2;x1,x2"). Defaults to every single removal plus the
        /// null model.
        #[arg(long)]
        subsets: Option<String>,
        /// Output path for the ladder JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Kendall correlation matrix plus VIF and condition indices.
    Corr {
        #[command(flatten)]
        data: DataArg,
        /// Response column shown in the matrix but excluded from the
        /// collinearity screens.
        #[arg(long)]
        response: Option<String>,
        /// Predictor columns.
        #[arg(long, value_delimiter = ',')]
        predictors: Vec<String>,
        #[arg(long)]
        no_transform: bool,
        #[arg(long)]
        stamp: Option<String>,
        /// Output path for the correlation JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named study end to end into a report directory.
    Report {
        #[command(flatten)]
        data: DataArg,
        /// Study name: education, water, support or safety.
        #[arg(long)]
        study: String,
        /// Output directory for the bundle.
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        no_transform: bool,
        #[arg(long)]
        stamp: Option<String>,
    },
    /// Draw a deterministic MBUR sample.
    Sample {
        /// Shape parameter alpha.
        #[arg(long)]
        alpha: f64,
        /// Sample size.
        #[arg(long)]
        n: usize,
        /// Stream seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_table(arg: &DataArg) -> Result<DataTable, Error> {
    match &arg.data {
        Some(path) => {
            let file = std::fs::File::open(path)?;
            dataio::load_csv(file)
        }
        None => Ok(dataio::oecd_bli()),
    }
}

fn report_options(tau: f64, no_transform: bool, stamp: Option<String>) -> ReportOptions {
    ReportOptions {
        tau,
        transforms: if no_transform {
            TransformSpec::identity()
        } else {
            TransformSpec::standard()
        },
        stamp,
        ..ReportOptions::default()
    }
}

fn run() -> Result<(), Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Describe { data, columns, out } => {
            let table = load_table(&data)?;
            let stats = report::run_describe(&table, &columns)?;
            let header = "column,n,mean,sd,skewness,kurtosis,min,max,q25,median,q75";
            let mut lines = vec![header.to_string()];
            for (name, s) in &stats {
                lines.push(format!(
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    name,
                    s.n,
                    s.mean,
                    s.sd,
                    s.skewness,
                    s.kurtosis,
                    s.min,
                    s.max,
                    s.q25,
                    s.median,
                    s.q75
                ));
            }
            let text = lines.join("\n") + "\n";
            if let Some(path) = out {
                std::fs::write(path, &text)?;
            }
            print!("{text}");
        }
        Command::Fit { data, common, out } => {
            let table = load_table(&data)?;
            let link: LinkKind = common.link.parse()?;
            let predictors: Vec<&str> = common.predictors.iter().map(String::as_str).collect();
            let options = report_options(common.tau, common.no_transform, common.stamp);
            let bundle = report::run_fit(&table, &common.response, &predictors, link, &options)?;
            if let Some(dir) = out {
                let written = report::write_fit_bundle(&bundle, &dir)?;
                for path in written {
                    eprintln!("wrote {}", path.display());
                }
            }
            print!("{}", report::to_json(&bundle.report)?);
        }
        Command::Ladder {
            data,
            common,
            subsets,
            out,
        } => {
            let table = load_table(&data)?;
            let link: LinkKind = common.link.parse()?;
            let predictors: Vec<&str> = common.predictors.iter().map(String::as_str).collect();
            let subset_list: Vec<Vec<String>> = match subsets {
                Some(s) => s
                    .split(';')
                    .map(|group| {
                        group
                            .split(',')
                            .filter(|t| !t.is_empty())
                            .map(str::to_string)
                            .collect()
                    })
                    .collect(),
                None => Vec::new(),
            };
            let options = report_options(common.tau, common.no_transform, common.stamp);
            let ladder = report::run_ladder(
                &table,
                &common.response,
                &predictors,
                link,
                &subset_list,
                &options,
            )?;
            let text = report::to_json(&ladder)?;
            if let Some(path) = out {
                std::fs::write(path, &text)?;
            }
            print!("{text}");
        }
        Command::Corr {
            data,
            response,
            predictors,
            no_transform,
            stamp,
            out,
        } => {
            let table = load_table(&data)?;
            let predictor_refs: Vec<&str> = predictors.iter().map(String::as_str).collect();
            let options = report_options(0.5, no_transform, stamp);
            let corr = report::run_corr(&table, response.as_deref(), &predictor_refs, &options)?;
            let text = report::to_json(&corr)?;
            if let Some(path) = out {
                std::fs::write(path, &text)?;
            }
            print!("{text}");
        }
        Command::Report {
            data,
            study,
            out_dir,
            no_transform,
            stamp,
        } => {
            let table = load_table(&data)?;
            let def = report::study(&study)?;
            let options = report_options(0.5, no_transform, stamp);
            let manifest = report::run_study(&table, def, &out_dir, &options)?;
            print!("{}", report::to_json(&manifest)?);
            for (step, err) in &manifest.failures {
                eprintln!("warning: {step}: {err}");
            }
        }
        Command::Sample {
            alpha,
            n,
            seed,
            out,
        } => {
            let params = mbur::MburParams::new(alpha)?;
            let values = mbur::sample(n, &params, seed);
            let mut text = String::from("y\n");
            for v in values {
                text.push_str(&format!("{v}\n"));
            }
            if let Some(path) = out {
                std::fs::write(path, &text)?;
            } else {
                std::io::stdout().write_all(text.as_bytes())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

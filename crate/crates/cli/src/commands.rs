//! Subcommand definitions and implementations.
//!
//! Each command reads its inputs, delegates the actual work to the library,
//! and writes exactly one artifact (plus an optional saved model) with a
//! reproducibility header. Human-oriented notes — skipped segments, where a
//! file landed — go to stderr/stdout, never into artifacts.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use dstlab_core::{
    acf, apply_scaling, ar_forecast, difference, extract_windows, fit_ar, fit_scaling, lag_pairs,
    measure_all_with, pacf, persistence_forecast, read_table, read_table_segmented, run_cv,
    split_by_month, ARSpec, Error as CoreError, FillPolicy, ForecasterSpec, Frame, Hour, Schema,
    Series, SplitSpec, Table, TARGET_FEATURE,
};
use serde_json::Value;

use crate::fixture::{self, FixtureSpec};
use crate::pipeline::{delta_frame, forecast_segments, DeltaFeatures, ModelFile, Target};
use crate::render;
use crate::report;
use crate::stamp::{json_artifact, Stamp};
use crate::tables::{
    attach_observation, emit, forecast_csv, frame_csv, read_forecast_csv, read_observation,
    write_text,
};

/// Environment variable naming the default data directory; `report` looks
/// for `omni_hourly.csv` there when `--archive` is not given.
pub const DATA_DIR_ENV: &str = "DSTLAB_DATA_DIR";
const DEFAULT_ARCHIVE: &str = "omni_hourly.csv";

/// Errors only the command layer can classify (the library's own errors
/// carry their exit class themselves).
#[derive(Debug)]
pub enum CliError {
    /// Reproduction checks ran and at least one number disagreed.
    ReproductionMismatch(usize),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::ReproductionMismatch(n) => {
                write!(f, "{n} reproduction check(s) failed")
            }
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean a raw hourly CSV: map columns, mask fill sentinels, split at
    /// time gaps, and write the canonical feature table.
    Ingest(IngestArgs),
    /// Assign calendar months to train/validation/test, write one table per
    /// split plus a JSON bundle (assignment, scaling, validity statistics).
    Split(SplitArgs),
    /// Produce a forecast table from a cleaned feature table.
    Forecast(ForecastArgs),
    /// Score a forecast against observations: RMSE, MSE, MAE, ME, linear
    /// fit, correlation, prediction efficiency, per horizon.
    Evaluate(EvaluateArgs),
    /// Histogram the time shifts of the warping path between forecast and
    /// observation, per horizon.
    WarpMeasure(WarpArgs),
    /// Autocorrelation, partial autocorrelation, or lagged scatters of one
    /// series.
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Seeded k-fold cross-validation over calendar months.
    Cv(CvArgs),
    /// Run the reproduction checklist (fixture checks always; archive
    /// checks when the hourly archive is available).
    Report(ReportArgs),
    /// Write the built-in synthetic archive for demos and pipeline tests.
    Fixture(FixtureArgs),
}

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Split(args) => cmd_split(args),
        Command::Forecast(args) => cmd_forecast(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::WarpMeasure(args) => cmd_warp(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Cv(args) => cmd_cv(args),
        Command::Report(args) => cmd_report(args),
        Command::Fixture(args) => cmd_fixture(args),
    }
}

// ----------------------------------------------------------------- ingest

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Raw hourly CSV with a timestamp column and the five feature columns.
    #[arg(long)]
    input: PathBuf,
    /// Cleaned feature table to write.
    #[arg(long)]
    output: PathBuf,
    /// Header of the timestamp column in the input.
    #[arg(long, default_value = "timestamp")]
    timestamp_column: String,
    /// Rename an input column: FEATURE=HEADER (repeatable).
    #[arg(long = "column", value_name = "FEATURE=HEADER")]
    columns: Vec<String>,
    /// Add a fill sentinel: FEATURE=VALUE (repeatable).
    #[arg(long = "fill", value_name = "FEATURE=VALUE")]
    fills: Vec<String>,
    /// Start from no fill sentinels instead of the hourly-archive defaults.
    #[arg(long)]
    no_default_fills: bool,
}

fn cmd_ingest(args: IngestArgs) -> Result<()> {
    let mut schema = Schema { timestamp: args.timestamp_column.clone(), ..Schema::default() };
    for (feature, header) in parse_pairs(&args.columns, "--column")? {
        if !schema.columns.contains_key(&feature) {
            return Err(CoreError::InvalidParameter {
                name: "--column".into(),
                reason: format!(
                    "unknown feature '{feature}' (features: {})",
                    schema.columns.keys().cloned().collect::<Vec<_>>().join(", ")
                ),
            }
            .into());
        }
        schema.columns.insert(feature, header);
    }

    let mut fills = if args.no_default_fills { FillPolicy::none() } else { FillPolicy::default() };
    for (feature, value) in parse_pairs(&args.fills, "--fill")? {
        let value: f64 = value.parse().map_err(|_| CoreError::InvalidParameter {
            name: "--fill".into(),
            reason: format!("'{value}' is not a number"),
        })?;
        fills.sentinels.entry(feature).or_default().push(value);
    }

    let frames: Vec<Frame> = read_table_segmented(&args.input, &schema, &fills)
        .with_context(|| format!("ingesting {}", args.input.display()))?;

    let mut stamp = Stamp::new("ingest")
        .with("input", args.input.display())
        .with("output", args.output.display())
        .with("timestamp-column", &args.timestamp_column)
        .with("columns", render_schema(&schema))
        .with("fills", render_fills(&fills));
    let rows: usize = frames.iter().map(Frame::len).sum();
    stamp.set("segments", frames.len());
    stamp.set("rows", rows);

    write_text(&args.output, &frame_csv(&stamp, &frames))?;
    println!("ingested {} rows in {} segment(s) -> {}", rows, frames.len(), args.output.display());
    for (name, valid) in validity(&frames) {
        println!("  {name}: {valid}/{rows} valid");
    }
    Ok(())
}

fn render_schema(schema: &Schema) -> String {
    schema
        .columns
        .iter()
        .map(|(f, c)| format!("{f}={c}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn render_fills(fills: &FillPolicy) -> String {
    if fills.sentinels.is_empty() {
        return "none".to_string();
    }
    fills
        .sentinels
        .iter()
        .map(|(f, vs)| {
            let list = vs.iter().map(f64::to_string).collect::<Vec<_>>().join("|");
            format!("{f}={list}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn validity(frames: &[Frame]) -> Vec<(String, usize)> {
    let mut counts: Vec<(String, usize)> = Vec::new();
    for frame in frames {
        for (i, (name, series)) in frame.features().enumerate() {
            if counts.len() <= i {
                counts.push((name.to_string(), 0));
            }
            counts[i].1 += series.valid_count();
        }
    }
    counts
}

// ------------------------------------------------------------------ split

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Cleaned feature table (must be one hourly-contiguous stretch).
    #[arg(long)]
    input: PathBuf,
    /// Directory receiving train.csv, validation.csv, test.csv, split.json.
    #[arg(long)]
    out_dir: PathBuf,
    /// Calendar months (1–12) reserved for the test split.
    #[arg(long, default_value = "4,8,12")]
    test_months: String,
    /// Fraction of the remaining months assigned to training.
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    /// Seed for the month shuffle.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Window length used for the bundle's sample-count statistics.
    #[arg(long, default_value_t = 6)]
    lag: usize,
    /// Horizon count used for the bundle's sample-count statistics.
    #[arg(long, default_value_t = 6)]
    horizons: usize,
}

fn cmd_split(args: SplitArgs) -> Result<()> {
    let frame: Frame = read_table(&args.input, &Schema::default(), &FillPolicy::none())
        .with_context(|| {
            format!(
                "reading {} (the splitter needs one hourly-contiguous table; run ingest first)",
                args.input.display()
            )
        })?;
    let spec = SplitSpec {
        test_months: parse_months(&args.test_months)?,
        train_fraction: args.train_fraction,
        rng_seed: args.seed,
    };
    let split = split_by_month(&frame, &spec)?;
    let scaling = fit_scaling(&split.train).context("fitting scaling on the training split")?;

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;

    let stamp = Stamp::new("split")
        .with("input", args.input.display())
        .with("out-dir", args.out_dir.display())
        .with("test-months", &args.test_months)
        .with("train-fraction", args.train_fraction)
        .with("seed", args.seed)
        .with("lag", args.lag)
        .with("horizons", args.horizons);

    let mut splits_json = serde_json::Map::new();
    for (name, frames) in [("train", &split.train), ("validation", &split.validation), ("test", &split.test)] {
        let path = args.out_dir.join(format!("{name}.csv"));
        write_text(&path, &frame_csv(&stamp, frames))?;

        let mut windows = 0usize;
        for f in frames.iter() {
            windows += extract_windows(f, args.lag, args.horizons)?.len();
        }
        let rows: usize = frames.iter().map(Frame::len).sum();
        let mut entry = serde_json::Map::new();
        entry.insert("months".into(), frames.len().into());
        entry.insert("rows".into(), rows.into());
        entry.insert("window_samples".into(), windows.into());
        let mut valid = serde_json::Map::new();
        for (feature, count) in validity(frames) {
            valid.insert(feature, count.into());
        }
        entry.insert("valid_cells".into(), Value::Object(valid));
        splits_json.insert(name.to_string(), Value::Object(entry));
        println!("{name}: {} month(s), {rows} rows, {windows} window samples", frames.len());
    }

    let assignment: Vec<Value> = split
        .assignment
        .iter()
        .map(|(month, label)| {
            let mut map = serde_json::Map::new();
            map.insert("year".into(), month.year.into());
            map.insert("month".into(), month.month.into());
            map.insert(
                "split".into(),
                serde_json::to_value(label).expect("label serializes"),
            );
            Value::Object(map)
        })
        .collect();
    let bundle = json_artifact(
        &stamp,
        vec![
            ("assignment", Value::Array(assignment)),
            ("scaling", serde_json::to_value(&scaling)?),
            ("splits", Value::Object(splits_json)),
        ],
    );
    let bundle_path = args.out_dir.join("split.json");
    write_text(&bundle_path, &bundle)?;
    println!("wrote split bundle -> {}", bundle_path.display());
    Ok(())
}

// --------------------------------------------------------------- forecast

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// Predict the origin value at every horizon.
    Persistence,
    /// Linear autoregression over lag windows of all features.
    Ar,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    /// Cleaned feature table to forecast.
    #[arg(long)]
    input: PathBuf,
    /// Forecast CSV to write (`origin,h1,...,hH`).
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Forecast the index itself or its first difference.
    #[arg(long, value_enum, default_value_t = Target::Dst)]
    target: Target,
    /// Number of horizons H.
    #[arg(long, default_value_t = 6)]
    horizons: usize,
    /// Input window length L (autoregression only).
    #[arg(long, default_value_t = 6)]
    lag: usize,
    /// Training table for the autoregression; defaults to --input.
    #[arg(long)]
    train: Option<PathBuf>,
    /// With --target delta-dst: keep the undifferenced index as an input
    /// column, or replace it entirely.
    #[arg(long, value_enum, default_value_t = DeltaFeatures::Augment)]
    delta_features: DeltaFeatures,
    /// Save the fitted model (autoregression only).
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Apply a previously saved model instead of fitting one.
    #[arg(long, conflicts_with_all = ["train", "model_out", "target", "lag", "delta_features", "horizons"])]
    model_in: Option<PathBuf>,
}

fn cmd_forecast(args: ForecastArgs) -> Result<()> {
    let frames: Vec<Frame> =
        read_table_segmented(&args.input, &Schema::default(), &FillPolicy::none())
            .with_context(|| format!("reading {}", args.input.display()))?;

    let mut stamp = Stamp::new("forecast")
        .with("input", args.input.display())
        .with("output", args.output.display());

    let (table, skipped) = match args.model {
        ModelKind::Persistence => {
            stamp.set("model", "persistence");
            stamp.set("target", target_name(args.target));
            stamp.set("horizons", args.horizons);
            let target = args.target;
            let horizons = args.horizons;
            forecast_segments(&frames, |frame| {
                let obs: Series = match target {
                    Target::Dst => frame.target()?.clone(),
                    Target::DeltaDst => difference(frame.target()?)?,
                };
                Ok(persistence_forecast(&obs, horizons)?)
            })?
        }
        ModelKind::Ar => {
            let file = match &args.model_in {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .with_context(|| format!("reading model {}", path.display()))?;
                    let file: ModelFile = serde_json::from_str(&text)
                        .with_context(|| format!("parsing model {}", path.display()))?;
                    stamp.set("model-in", path.display());
                    file
                }
                None => fit_model(&args, &frames)?,
            };
            stamp.set("model", "ar");
            stamp.set("target", target_name(file.target));
            stamp.set("horizons", file.model.horizons);
            stamp.set("lag", file.model.lag);
            if let Some(mode) = file.delta_features {
                stamp.set("delta-features", mode_name(mode));
            }
            if file.model.ridge_fallback {
                stamp.set("ridge-fallback", "true");
            }
            if let Some(out) = &args.model_out {
                write_text(out, &model_artifact(&stamp, &file))?;
                println!("wrote model -> {}", out.display());
            }

            forecast_segments(&frames, |frame| {
                let frame = match file.target {
                    Target::Dst => frame.clone(),
                    Target::DeltaDst => delta_frame(
                        frame,
                        file.delta_features.unwrap_or(DeltaFeatures::Augment),
                    )?,
                };
                let scaled = apply_scaling(&frame, &file.scaling)?;
                Ok(ar_forecast(&file.model, &scaled)?)
            })?
        }
    };
    if skipped > 0 {
        eprintln!("note: skipped {skipped} segment(s) too short to forecast");
    }
    stamp.set("origins", table.origins().len());

    write_text(&args.output, &forecast_csv(&stamp, &table))?;
    println!(
        "forecast {} origins x {} horizons -> {}",
        table.origins().len(),
        table.horizons(),
        args.output.display()
    );
    Ok(())
}

/// Fit the autoregression: transform the training segments for the chosen
/// target, standardize on them, and solve the per-horizon least squares.
fn fit_model(args: &ForecastArgs, input_frames: &[Frame]) -> Result<ModelFile> {
    let train_frames: Vec<Frame> = match &args.train {
        Some(path) => read_table_segmented(path, &Schema::default(), &FillPolicy::none())
            .with_context(|| format!("reading training table {}", path.display()))?,
        None => input_frames.to_vec(),
    };
    let transformed: Vec<Frame> = match args.target {
        Target::Dst => train_frames,
        Target::DeltaDst => train_frames
            .iter()
            .filter(|f| f.len() >= 2)
            .map(|f| delta_frame(f, args.delta_features))
            .collect::<Result<_>>()?,
    };
    let scaling = fit_scaling(&transformed).context("fitting scaling on the training table")?;

    let mut samples = Vec::new();
    for frame in &transformed {
        let scaled = apply_scaling(frame, &scaling)?;
        samples.extend(extract_windows(&scaled, args.lag, args.horizons)?);
    }
    let mut spec = ARSpec::new(args.lag, args.horizons);
    spec.features = transformed
        .first()
        .ok_or(CoreError::EmptySeries)?
        .names()
        .map(str::to_string)
        .collect();
    spec.target_scale = Some(scaling.get(TARGET_FEATURE)?);
    let model = fit_ar(&samples, &spec).context("fitting the autoregression")?;

    Ok(ModelFile {
        model,
        scaling,
        target: args.target,
        delta_features: (args.target == Target::DeltaDst).then_some(args.delta_features),
    })
}

fn model_artifact(stamp: &Stamp, file: &ModelFile) -> String {
    let mut map = serde_json::Map::new();
    map.insert("config".into(), stamp.json_value());
    if let Value::Object(fields) = serde_json::to_value(file).expect("model serializes") {
        map.extend(fields);
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(map))
        .expect("artifact serialization cannot fail");
    text.push('\n');
    text
}

fn target_name(target: Target) -> &'static str {
    match target {
        Target::Dst => "dst",
        Target::DeltaDst => "delta-dst",
    }
}

fn mode_name(mode: DeltaFeatures) -> &'static str {
    match mode {
        DeltaFeatures::Augment => "augment",
        DeltaFeatures::Replace => "replace",
    }
}

// --------------------------------------------------------------- evaluate

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
    Markdown,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Forecast CSV (`origin,h1,...,hH`).
    #[arg(long)]
    pred: PathBuf,
    /// Observation CSV (`timestamp,value`, or any cleaned table).
    #[arg(long)]
    obs: PathBuf,
    /// Observation column; default: `value`, then `dst`.
    #[arg(long)]
    obs_column: Option<String>,
    /// Difference the observations first (for forecasts of the differenced
    /// index).
    #[arg(long)]
    difference_obs: bool,
    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let (table, stamp) = load_scored_table(
        "evaluate",
        &args.pred,
        &args.obs,
        args.obs_column.as_deref(),
        args.difference_obs,
    )?;
    let mut reports = Vec::with_capacity(table.horizons());
    for h in 1..=table.horizons() {
        let aligned = table.align(h)?;
        reports.push(
            dstlab_core::metrics::report(&aligned.model, &aligned.observed)
                .with_context(|| format!("no evaluable pairs at horizon {h}"))?,
        );
    }
    let text = match args.format {
        TableFormat::Csv => render::metrics_csv(&stamp, &reports),
        TableFormat::Json => render::metrics_json(&stamp, &reports),
        TableFormat::Markdown => render::metrics_markdown(&stamp, &reports),
    };
    emit(args.output.as_deref(), &text)
}

/// Shared by `evaluate` and `warp-measure`: read the forecast file, read
/// and optionally difference the observations, pair them, and start the
/// stamp with the flags both commands share.
fn load_scored_table(
    command: &'static str,
    pred: &Path,
    obs: &Path,
    obs_column: Option<&str>,
    difference_obs: bool,
) -> Result<(Table, Stamp)> {
    let file = read_forecast_csv(pred)?;
    let (mut series, column) = read_observation(obs, obs_column)?;
    if difference_obs {
        series = difference(&series)?;
    }
    let stamp = Stamp::new(command)
        .with("pred", pred.display())
        .with("obs", obs.display())
        .with("obs-column", &column)
        .with("difference-obs", difference_obs)
        .with("horizons", file.horizons);
    let table = attach_observation(file, series)?;
    Ok((table, stamp))
}

// ------------------------------------------------------------ warp-measure

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WarpFormat {
    Csv,
    Json,
    Markdown,
    Svg,
}

#[derive(Debug, Args)]
pub struct WarpArgs {
    /// Forecast CSV (`origin,h1,...,hH`).
    #[arg(long)]
    pred: PathBuf,
    /// Observation CSV (`timestamp,value`, or any cleaned table).
    #[arg(long)]
    obs: PathBuf,
    /// Observation column; default: `value`, then `dst`.
    #[arg(long)]
    obs_column: Option<String>,
    /// Difference the observations first.
    #[arg(long)]
    difference_obs: bool,
    /// Causal window width for every horizon (default: w = horizon; must be
    /// at least the largest horizon when given).
    #[arg(long)]
    window: Option<usize>,
    /// Minimum usable segment length (default: 3·(w+1)).
    #[arg(long)]
    min_segment: Option<usize>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = WarpFormat::Csv)]
    format: WarpFormat,
}

fn cmd_warp(args: WarpArgs) -> Result<()> {
    let (table, mut stamp) = load_scored_table(
        "warp-measure",
        &args.pred,
        &args.obs,
        args.obs_column.as_deref(),
        args.difference_obs,
    )?;
    stamp.set("window", opt_name(args.window, "horizon"));
    stamp.set("min-segment", opt_name(args.min_segment, "3*(w+1)"));
    let wm = measure_all_with(&table, args.window, args.min_segment)?;
    let text = match args.format {
        WarpFormat::Csv => render::warp_csv(&stamp, &wm),
        WarpFormat::Json => render::warp_json(&stamp, &wm),
        WarpFormat::Markdown => render::warp_markdown(&stamp, &wm),
        WarpFormat::Svg => render::warp_svg(&stamp, &wm),
    };
    emit(args.output.as_deref(), &text)
}

fn opt_name(value: Option<usize>, default: &str) -> String {
    value.map_or_else(|| format!("default ({default})"), |v| v.to_string())
}

// ------------------------------------------------------------------ stats

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatsFormat {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum StatsCommand {
    /// Sample autocorrelation at lags 0..=max-lag.
    Acf(StatsArgs),
    /// Partial autocorrelation at lags 0..=max-lag (lag 0 is 1 by
    /// convention).
    Pacf(StatsArgs),
    /// Lagged scatter pairs (x(t−lag), x(t)) for lags 1..=max-lag.
    Lag(StatsArgs),
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Series CSV: `timestamp,value` or any cleaned table.
    #[arg(long)]
    input: PathBuf,
    /// Value column; default: `value`, then `dst`.
    #[arg(long)]
    column: Option<String>,
    /// Analyze the first difference instead of the series itself.
    #[arg(long)]
    difference: bool,
    #[arg(long, default_value_t = 48)]
    max_lag: usize,
    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = StatsFormat::Csv)]
    format: StatsFormat,
}

fn cmd_stats(command: StatsCommand) -> Result<()> {
    let (kind, args) = match &command {
        StatsCommand::Acf(args) => ("acf", args),
        StatsCommand::Pacf(args) => ("pacf", args),
        StatsCommand::Lag(args) => ("lag", args),
    };
    let (mut series, column) = read_observation(&args.input, args.column.as_deref())?;
    if args.difference {
        series = difference(&series)?;
    }
    let stamp = Stamp::new("stats")
        .with("kind", kind)
        .with("input", args.input.display())
        .with("column", &column)
        .with("difference", args.difference)
        .with("max-lag", args.max_lag);

    let text = match kind {
        "lag" => {
            let mut panels = Vec::with_capacity(args.max_lag);
            for lag in 1..=args.max_lag {
                panels.push((lag, lag_pairs(&series, lag)?));
            }
            match args.format {
                StatsFormat::Csv => render::lag_csv(&stamp, &panels),
                StatsFormat::Json => render::lag_json(&stamp, &panels),
                StatsFormat::Svg => render::lag_svg(&stamp, &panels),
            }
        }
        _ => {
            let rows = if kind == "acf" {
                acf(&series, args.max_lag)?
            } else {
                pacf(&series, args.max_lag)?
            };
            match args.format {
                StatsFormat::Csv => render::correlogram_csv(&stamp, &rows),
                StatsFormat::Json => render::correlogram_json(&stamp, kind, &rows),
                StatsFormat::Svg => render::correlogram_svg(&stamp, kind, &rows),
            }
        }
    };
    emit(args.output.as_deref(), &text)
}

// -------------------------------------------------------------------- cv

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CvFormat {
    Json,
    Csv,
    Markdown,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    /// Cleaned feature table (one hourly-contiguous stretch).
    #[arg(long)]
    input: PathBuf,
    /// Number of folds k.
    #[arg(long, default_value_t = 6)]
    folds: usize,
    /// Seed for the month shuffle.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Input window length L (autoregression only).
    #[arg(long, default_value_t = 6)]
    lag: usize,
    /// Number of horizons H.
    #[arg(long, default_value_t = 6)]
    horizons: usize,
    /// Calendar months excluded from the fold pool (`none` to keep all).
    #[arg(long, default_value = "4,8,12")]
    exclude_months: String,
    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = CvFormat::Json)]
    format: CvFormat,
}

fn cmd_cv(args: CvArgs) -> Result<()> {
    let frame: Frame = read_table(&args.input, &Schema::default(), &FillPolicy::none())
        .with_context(|| {
            format!(
                "reading {} (cross-validation needs one hourly-contiguous table)",
                args.input.display()
            )
        })?;
    let forecaster = match args.model {
        ModelKind::Persistence => ForecasterSpec::Persistence { horizons: args.horizons },
        ModelKind::Ar => ForecasterSpec::Ar { lag: args.lag, horizons: args.horizons },
    };
    let exclude = parse_months_or_none(&args.exclude_months)?;
    let report = run_cv(&frame, &forecaster, args.folds, args.seed, &exclude)?;

    let mut stamp = Stamp::new("cv")
        .with("input", args.input.display())
        .with("folds", args.folds)
        .with("seed", args.seed)
        .with("model", match args.model {
            ModelKind::Persistence => "persistence",
            ModelKind::Ar => "ar",
        })
        .with("horizons", args.horizons)
        .with("exclude-months", &args.exclude_months);
    if args.model == ModelKind::Ar {
        stamp.set("lag", args.lag);
    }

    let text = match args.format {
        CvFormat::Json => render::cv_json(&stamp, &report),
        CvFormat::Csv => render::cv_csv(&stamp, &report),
        CvFormat::Markdown => render::cv_markdown(&stamp, &report),
    };
    emit(args.output.as_deref(), &text)
}

// ---------------------------------------------------------------- report

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Markdown,
    Json,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Cleaned hourly archive; default: $DSTLAB_DATA_DIR/omni_hourly.csv.
    /// Archive checks are skipped (successfully) when it is absent.
    #[arg(long)]
    archive: Option<PathBuf>,
    /// Seed for the fixture and the split.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Markdown)]
    format: ReportFormat,
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let archive: Option<PathBuf> = args.archive.clone().or_else(|| {
        std::env::var_os(DATA_DIR_ENV).map(|dir| PathBuf::from(dir).join(DEFAULT_ARCHIVE))
    });
    let stamp = Stamp::new("report")
        .with(
            "archive",
            archive.as_ref().map_or("none".to_string(), |p| p.display().to_string()),
        )
        .with("seed", args.seed);

    let list = report::run(archive.as_deref(), args.seed)?;
    let text = match args.format {
        ReportFormat::Markdown => report::markdown(&stamp, &list),
        ReportFormat::Json => report::json(&stamp, &list),
    };
    emit(args.output.as_deref(), &text)?;

    let failures = list.failures();
    if failures > 0 {
        return Err(CliError::ReproductionMismatch(failures).into());
    }
    Ok(())
}

// --------------------------------------------------------------- fixture

#[derive(Debug, Args)]
pub struct FixtureArgs {
    /// Where to write the synthetic archive CSV.
    #[arg(long)]
    output: PathBuf,
    /// Number of hourly rows.
    #[arg(long, default_value_t = 17_544)]
    hours: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// First timestamp (ISO-8601, UTC).
    #[arg(long, default_value = "2015-01-01T00:00:00Z")]
    start: String,
    /// Probability that a driver cell is replaced by its fill sentinel.
    #[arg(long, default_value_t = 0.02)]
    fill_fraction: f64,
}

fn cmd_fixture(args: FixtureArgs) -> Result<()> {
    if !(0.0..0.5).contains(&args.fill_fraction) {
        return Err(CoreError::InvalidParameter {
            name: "--fill-fraction".into(),
            reason: format!("{} is outside [0, 0.5)", args.fill_fraction),
        }
        .into());
    }
    let spec = FixtureSpec {
        hours: args.hours,
        seed: args.seed,
        start: Hour::parse(&args.start)?,
        fill_fraction: args.fill_fraction,
    };
    let stamp = Stamp::new("fixture")
        .with("output", args.output.display())
        .with("hours", args.hours)
        .with("seed", args.seed)
        .with("start", &args.start)
        .with("fill-fraction", args.fill_fraction);
    let fx = fixture::generate(&spec);
    write_text(&args.output, &fx.csv(&stamp))?;
    println!("wrote {} synthetic rows -> {}", fx.len(), args.output.display());
    Ok(())
}

// ---------------------------------------------------------------- helpers

fn parse_pairs(items: &[String], flag: &str) -> Result<Vec<(String, String)>> {
    items
        .iter()
        .map(|item| {
            item.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .filter(|(k, v)| !k.is_empty() && !v.is_empty())
                .ok_or_else(|| {
                    CoreError::InvalidParameter {
                        name: flag.into(),
                        reason: format!("'{item}' is not KEY=VALUE"),
                    }
                    .into()
                })
        })
        .collect()
}

fn parse_months(text: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(str::trim)
        .filter(|part| !part.is_empty())
        .map(|part| {
            part.parse::<u32>().map_err(|_| {
                CoreError::InvalidParameter {
                    name: "months".into(),
                    reason: format!("'{part}' is not a calendar month number"),
                }
                .into()
            })
        })
        .collect()
}

fn parse_months_or_none(text: &str) -> Result<Vec<u32>> {
    if text.eq_ignore_ascii_case("none") {
        return Ok(Vec::new());
    }
    parse_months(text)
}

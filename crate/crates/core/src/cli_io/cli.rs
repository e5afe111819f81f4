use super::config::RunConfig;
use super::csv;
use super::{write_atomic, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
use crate::error::Error;
use crate::events::{detect_steps, DetectorConfig};
use crate::filtering::{
    apply_zero_phase, default_notch_bandwidth_hz, design_bandstop, DEFAULT_NOTCH_HARMONICS,
};
use crate::shape::{reconstruct, wavelength_to_curvature, CalibrationModel, CmGeometry};
use crate::spectral::{analyze_channel, magnitude_spectrum, FeatureConfig, SpectralFeatures, Window};
use crate::sweep::{
    default_sweep_template, log_rpm_grid, run_sweep, sweep_from_traces, DEFAULT_GRID_MAX_RPM,
    DEFAULT_GRID_MIN_RPM, DEFAULT_GRID_POINTS,
};
use crate::trace::WavelengthTrace;
use crate::vib_model::{calibrate_default_params, BendProfile, Scenario, TwoDofParams};
use crate::vib_model::{
    DEFAULT_DAMPING_RATIO, DEFAULT_F1_HZ, DEFAULT_F2_HZ, DEFAULT_MASS_RATIO, DEFAULT_PEAK_OUTPUT_NM,
};
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "fbgvib", version, about = "FBG wavelength simulation and vibration-aware analysis")]
pub struct Cli {
    /// TOML run configuration
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// RNG seed for anything stochastic
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a wavelength trace CSV
    Simulate(SimulateArgs),
    /// Spectrum and tool-frequency features of one channel
    Analyze(AnalyzeArgs),
    /// Remove tool harmonics with zero-phase notches
    Filter(FilterArgs),
    /// Reconstruct the centerline from wavelengths
    Shape(ShapeArgs),
    /// Detect level shifts in one channel
    Detect(DetectArgs),
    /// Amplitude-vs-RPM sweep and resonance report
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Tool velocity (rev/min)
    #[arg(long)]
    rpm: Option<f64>,
    /// Record length (s)
    #[arg(long)]
    duration: Option<f64>,
    /// Sampling rate (Hz)
    #[arg(long)]
    sample_rate: Option<f64>,
    /// Enable the bend profile, optionally with key=value overrides
    /// (cable_speed, pull_s, hold_s, cycles, curvature_gain, slack_scale)
    #[arg(long, num_args = 0..=1, default_missing_value = "default", value_name = "KEY=VAL,...")]
    bend: Option<String>,
    /// Gaussian noise standard deviation (nm)
    #[arg(long)]
    noise: Option<f64>,
    /// Number of fibers (1 or 2)
    #[arg(long)]
    fibers: Option<u8>,
    /// soft-70rpm, hard-2250rpm or paper
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Output trace CSV (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ChannelArgs {
    #[arg(long, default_value_t = 0)]
    fiber: u8,
    #[arg(long, default_value_t = 0)]
    aa: u8,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    input: PathBuf,
    #[command(flatten)]
    channel: ChannelArgs,
    /// Tool velocity hint (rev/min)
    #[arg(long)]
    rpm: Option<f64>,
    /// Window for the written spectrum: hann or rectangular
    #[arg(long, default_value = "hann")]
    window: String,
    /// Spectrum CSV
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FilterArgs {
    input: PathBuf,
    /// Tool velocity (rev/min); estimated from the spectrum if omitted
    #[arg(long)]
    rpm: Option<f64>,
    #[arg(long)]
    notch_harmonics: Option<usize>,
    /// Notch -3 dB width (Hz)
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Also write the section coefficients here
    #[arg(long)]
    coefficients: Option<PathBuf>,
    /// Filtered trace CSV (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ShapeArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    fiber: u8,
    /// Calibration CSV
    #[arg(long)]
    calibration: Option<PathBuf>,
    /// Time of the written centerline (s); last sample if omitted
    #[arg(long)]
    at: Option<f64>,
    /// Centerline polyline CSV (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tip position for every sample
    #[arg(long)]
    tips: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DetectArgs {
    input: PathBuf,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    drift: Option<f64>,
    #[arg(long)]
    window: Option<f64>,
    /// Notch this tool velocity (rev/min) out before detecting
    #[arg(long)]
    notch_rpm: Option<f64>,
    #[arg(long)]
    notch_harmonics: Option<usize>,
    /// Events CSV (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// paper: the default 40-point grid from 10 to 2400 rpm
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    rpm_min: Option<f64>,
    #[arg(long)]
    rpm_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Record length per point (s)
    #[arg(long)]
    duration: Option<f64>,
    /// Directory of rpm_<value>.csv traces to analyze instead of simulating
    #[arg(long)]
    input_dir: Option<PathBuf>,
    /// Sweep CSV
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Config(_) | Error::Parameter(_) | Error::Design(_) => Failure::Usage(msg),
            _ => Failure::Runtime(msg),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `argv` (program name first), runs the command and returns the
/// process exit status.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("error: invalid arguments"));
            return EXIT_USAGE;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {}", one_line(&m));
            EXIT_USAGE
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {}", one_line(&m));
            EXIT_RUNTIME
        }
    }
}

fn one_line(s: &str) -> String {
    s.split('\n').map(str::trim).collect::<Vec<_>>().join("; ")
}

fn run(cli: Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(path) => {
            require_file(path)?;
            RunConfig::load(path)?
        }
        None => RunConfig::default(),
    };
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    match cli.command {
        Command::Simulate(a) => simulate_cmd(a, &config, seed),
        Command::Analyze(a) => analyze_cmd(a, &config),
        Command::Filter(a) => filter_cmd(a, &config),
        Command::Shape(a) => shape_cmd(a, &config),
        Command::Detect(a) => detect_cmd(a, &config),
        Command::Sweep(a) => sweep_cmd(a, &config, seed),
    }
}

fn require_file(path: &Path) -> CliResult<()> {
    let meta = std::fs::metadata(path)
        .map_err(|_| Failure::Usage(format!("input file '{}' not found", path.display())))?;
    if !meta.is_file() {
        return Err(Failure::Usage(format!("'{}' is not a file", path.display())));
    }
    if meta.len() == 0 {
        return Err(Failure::Usage(format!("input file '{}' is empty", path.display())));
    }
    Ok(())
}

fn load_trace(path: &Path) -> CliResult<WavelengthTrace> {
    require_file(path)?;
    Ok(csv::read_trace(path)?)
}

/// Explicit path, else `output_dir/default_name`, else none.
fn output_path(explicit: Option<PathBuf>, config: &RunConfig, default_name: &str) -> Option<PathBuf> {
    explicit.or_else(|| config.output_dir.as_ref().map(|d| d.join(default_name)))
}

fn emit(path: Option<&Path>, contents: &str) -> CliResult<()> {
    match path {
        Some(p) => Ok(write_atomic(p, contents)?),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn model_params(config: &RunConfig) -> CliResult<TwoDofParams> {
    let p = calibrate_default_params(
        config.f1_hz.unwrap_or(DEFAULT_F1_HZ),
        config.f2_hz.unwrap_or(DEFAULT_F2_HZ),
        config.mass_ratio.unwrap_or(DEFAULT_MASS_RATIO),
        config.damping_ratio.unwrap_or(DEFAULT_DAMPING_RATIO),
    )?;
    Ok(p.with_peak_output(config.peak_output_nm.unwrap_or(DEFAULT_PEAK_OUTPUT_NM))?)
}

fn calibration(explicit: Option<&Path>, config: &RunConfig) -> CliResult<CalibrationModel> {
    match explicit.or(config.calibration_file.as_deref()) {
        Some(path) => {
            require_file(path)?;
            Ok(csv::parse_calibration_csv(path)?)
        }
        None => Ok(CalibrationModel::default()),
    }
}

fn apply_bend_overrides(profile: &mut BendProfile, spec: &str) -> CliResult<()> {
    let spec = spec.trim();
    if spec.is_empty() || spec == "default" {
        return Ok(());
    }
    let mut pull_s = None;
    let mut hold_s = None;
    let mut cycles = None;
    for pair in spec.split(',') {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--bend expects key=value, got '{pair}'")))?;
        let key = key.trim();
        let num: f64 = value
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("--bend {key}: '{value}' is not a number")))?;
        match key {
            "cable_speed" => profile.cable_speed_mm_s = num,
            "curvature_gain" => profile.curvature_gain = num,
            "slack_scale" => profile.slack_amplitude_scale = num,
            "pull_s" => pull_s = Some(num),
            "hold_s" => hold_s = Some(num),
            "cycles" => {
                if num < 1.0 || num.fract() != 0.0 {
                    return Err(Failure::Usage(format!("--bend cycles must be a positive integer, got {num}")));
                }
                cycles = Some(num as usize)
            }
            other => {
                return Err(Failure::Usage(format!(
                    "unknown --bend key '{other}' (expected cable_speed, pull_s, hold_s, cycles, curvature_gain, slack_scale)"
                )))
            }
        }
    }
    if pull_s.is_some() || hold_s.is_some() || cycles.is_some() {
        rebuild_segments(profile, pull_s, hold_s, cycles);
    }
    Ok(())
}

fn rebuild_segments(profile: &mut BendProfile, pull_s: Option<f64>, hold_s: Option<f64>, cycles: Option<usize>) {
    use crate::vib_model::BendPhase;
    let old_pull = profile
        .segments
        .iter()
        .find(|s| s.phase == BendPhase::Pull)
        .map(|s| s.duration_s)
        .unwrap_or(44.0);
    let old_hold = profile
        .segments
        .iter()
        .find(|s| s.phase == BendPhase::Hold)
        .map(|s| s.duration_s)
        .unwrap_or(0.0);
    let old_cycles = profile
        .segments
        .iter()
        .filter(|s| s.phase == BendPhase::Pull)
        .count()
        .max(1);
    let rebuilt = BendProfile::cycles(
        profile.cable_speed_mm_s,
        pull_s.unwrap_or(old_pull),
        hold_s.unwrap_or(old_hold),
        cycles.unwrap_or(old_cycles),
        profile.curvature_gain,
    );
    profile.segments = rebuilt.segments;
}

fn build_scenario(a: &ScenarioArgs, config: &RunConfig) -> CliResult<Scenario> {
    let preset = a.preset.as_deref().or(config.preset.as_deref());
    let mut s = match preset {
        Some(name) => Scenario::preset(name)?,
        None => Scenario::default(),
    };

    if let Some(v) = config.tool_rpm {
        s.rpm = v;
    }
    if let Some(v) = config.sample_rate_hz {
        s.sample_rate_hz = v;
    }
    if let Some(v) = config.noise_sigma_nm {
        s.noise_sigma_nm = v;
    }
    if let Some(v) = config.fibers {
        s.fibers = v;
    }
    if let Some(v) = &config.harmonic_amplitudes {
        s.harmonics = v.clone();
    }

    let bend_wanted = a.bend.is_some() || config.bend == Some(true) || s.bend.is_some();
    if config.bend == Some(false) && a.bend.is_none() {
        s.bend = None;
    } else if bend_wanted {
        let mut profile = s.bend.take().unwrap_or_default();
        if let Some(v) = config.bend_cable_speed_mm_s {
            profile.cable_speed_mm_s = v;
        }
        if let Some(v) = config.bend_curvature_gain_invm_per_mm {
            profile.curvature_gain = v;
        }
        if let Some(v) = config.bend_slack_scale {
            profile.slack_amplitude_scale = v;
        }
        if config.bend_pull_s.is_some() || config.bend_hold_s.is_some() || config.bend_cycles.is_some() {
            rebuild_segments(&mut profile, config.bend_pull_s, config.bend_hold_s, config.bend_cycles);
        }
        if let Some(spec) = &a.bend {
            apply_bend_overrides(&mut profile, spec)?;
        }
        s.duration_s = profile.total_duration_s();
        s.bend = Some(profile);
    }

    if let Some(v) = config.duration_s {
        s.duration_s = v;
    }
    if let Some(v) = a.rpm {
        s.rpm = v;
    }
    if let Some(v) = a.duration {
        s.duration_s = v;
    }
    if let Some(v) = a.sample_rate {
        s.sample_rate_hz = v;
    }
    if let Some(v) = a.noise {
        s.noise_sigma_nm = v;
    }
    if let Some(v) = a.fibers {
        s.fibers = v;
    }
    if let Some(path) = &config.calibration_file {
        s.calibration = calibration(Some(path), config)?;
    }
    s.validate()?;
    Ok(s)
}

fn simulate_cmd(a: SimulateArgs, config: &RunConfig, seed: u64) -> CliResult<()> {
    let scenario = build_scenario(&a.scenario, config)?;
    let params = model_params(config)?;
    let trace = crate::vib_model::simulate(&scenario, &params, seed)?;
    let out = output_path(a.out, config, "trace.csv");
    emit(out.as_deref(), &csv::format_trace(&trace))
}

fn select_channel<'a>(trace: &'a WavelengthTrace, ch: &ChannelArgs) -> CliResult<&'a [f64]> {
    trace.channel(ch.fiber, ch.aa).ok_or_else(|| {
        Failure::Usage(format!("trace has no channel for fiber {} aa {}", ch.fiber, ch.aa))
    })
}

fn format_features(f: &SpectralFeatures, fiber: u8, aa: u8) -> String {
    let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x}"));
    let mut s = String::new();
    let _ = writeln!(s, "channel: fiber {fiber} aa {aa}");
    let _ = writeln!(s, "bin_width_hz: {}", f.bin_width_hz);
    let _ = writeln!(s, "base_frequency_hz: {}", opt(f.base_frequency_hz));
    let _ = writeln!(s, "fundamental_hz: {}", opt(f.fundamental_hz));
    let harmonics = if f.harmonics_hz.is_empty() {
        "none".to_string()
    } else {
        f.harmonics_hz.iter().map(|h| format!("{h}")).collect::<Vec<_>>().join(", ")
    };
    let _ = writeln!(s, "harmonics_hz: {harmonics}");
    let _ = writeln!(s, "peaks: {}", f.peaks.len());
    for p in &f.peaks {
        let _ = writeln!(
            s,
            "  {} Hz: {} nm (prominence {} nm)",
            p.frequency_hz, p.magnitude_nm, p.prominence_nm
        );
    }
    s
}

fn analyze_cmd(a: AnalyzeArgs, config: &RunConfig) -> CliResult<()> {
    let window: Window = a.window.parse()?;
    let trace = load_trace(&a.input)?;
    let channel = select_channel(&trace, &a.channel)?;
    let hint = a.rpm.or(config.tool_rpm);
    let (_, features) = analyze_channel(channel, trace.sample_rate_hz, hint, &FeatureConfig::default())?;

    let out = output_path(a.out, config, "spectrum.csv");
    if let Some(path) = out {
        let spectrum = match window {
            Window::Hann => crate::spectral::feature_spectrum(channel, trace.sample_rate_hz)?,
            Window::Rectangular => {
                magnitude_spectrum(channel, trace.sample_rate_hz, Window::Rectangular, None)?
            }
        };
        write_atomic(&path, &csv::format_spectrum(&spectrum))?;
    }
    print!("{}", format_features(&features, a.channel.fiber, a.channel.aa));
    Ok(())
}

fn fundamental_for(trace: &WavelengthTrace, rpm: Option<f64>) -> CliResult<f64> {
    if let Some(rpm) = rpm {
        if !(rpm.is_finite() && rpm > 0.0) {
            return Err(Failure::Usage(format!("rpm must be positive, got {rpm}")));
        }
        return Ok(rpm / 60.0);
    }
    let (_, f) = analyze_channel(&trace.channels[0], trace.sample_rate_hz, None, &FeatureConfig::default())?;
    f.fundamental_hz.ok_or_else(|| {
        Failure::Runtime("no tool fundamental found in the first channel; pass --rpm".into())
    })
}

fn notch_filter(
    trace: &WavelengthTrace,
    fundamental_hz: f64,
    harmonics: usize,
    bandwidth_hz: Option<f64>,
) -> CliResult<crate::filtering::FilterSpec> {
    let bw = bandwidth_hz.unwrap_or_else(|| default_notch_bandwidth_hz(fundamental_hz));
    Ok(design_bandstop(fundamental_hz, harmonics, bw, trace.sample_rate_hz)?)
}

fn filter_cmd(a: FilterArgs, config: &RunConfig) -> CliResult<()> {
    let trace = load_trace(&a.input)?;
    let f0 = fundamental_for(&trace, a.rpm.or(config.tool_rpm))?;
    let harmonics = a
        .notch_harmonics
        .or(config.notch_harmonics)
        .unwrap_or(DEFAULT_NOTCH_HARMONICS);
    let spec = notch_filter(&trace, f0, harmonics, a.bandwidth.or(config.notch_bandwidth_hz))?;
    let filtered = trace.map_channels(|c| apply_zero_phase(&spec, c))?;

    if let Some(path) = &a.coefficients {
        write_atomic(path, &spec.to_coefficient_text())?;
    }
    let out = output_path(a.out, config, "filtered.csv");
    emit(out.as_deref(), &csv::format_trace(&filtered))
}

fn shape_cmd(a: ShapeArgs, config: &RunConfig) -> CliResult<()> {
    let trace = load_trace(&a.input)?;
    let calib = calibration(a.calibration.as_deref(), config)?;
    let geometry = CmGeometry::default();
    if !trace.fibers().contains(&a.fiber) {
        return Err(Failure::Usage(format!("trace has no fiber {}", a.fiber)));
    }
    // the second fiber sits opposite the first: flip into the common frame
    let sign = if a.fiber == 0 { 1.0 } else { -1.0 };
    let curvatures_at = |n: usize| -> CliResult<Vec<f64>> {
        let k = wavelength_to_curvature(&trace.fiber_sample(a.fiber, n), &calib)?;
        Ok(k.into_iter().map(|v| sign * v).collect())
    };

    let mut times = Vec::with_capacity(trace.len());
    let mut tips = Vec::with_capacity(trace.len());
    if a.tips.is_some() {
        for n in 0..trace.len() {
            times.push(trace.time_s(n));
            tips.push(reconstruct(&curvatures_at(n)?, &geometry)?.tip);
        }
    }

    let index = match a.at {
        Some(t) => {
            let n = ((t - trace.t0) * trace.sample_rate_hz).round();
            if !(n >= 0.0 && (n as usize) < trace.len()) {
                return Err(Failure::Usage(format!("--at {t} s lies outside the trace")));
            }
            n as usize
        }
        None => trace.len() - 1,
    };
    let shape = reconstruct(&curvatures_at(index)?, &geometry)?;

    let polyline = csv::format_polyline(&shape);
    let tips_text = a.tips.as_ref().map(|_| csv::format_tips(&times, &tips));
    if let (Some(path), Some(text)) = (&a.tips, &tips_text) {
        write_atomic(path, text)?;
    }
    let out = output_path(a.out, config, "shape.csv");
    emit(out.as_deref(), &polyline)
}

fn detect_cmd(a: DetectArgs, config: &RunConfig) -> CliResult<()> {
    let trace = load_trace(&a.input)?;
    let channel = select_channel(&trace, &a.channel)?;
    let detector = DetectorConfig {
        threshold_nm: a
            .threshold
            .or(config.detector_threshold_nm)
            .unwrap_or(crate::events::DEFAULT_THRESHOLD_NM),
        drift_nm: a
            .drift
            .or(config.detector_drift_nm)
            .unwrap_or(crate::events::DEFAULT_DRIFT_NM),
        window_s: a
            .window
            .or(config.detector_window_s)
            .unwrap_or(crate::events::DEFAULT_WINDOW_S),
    };
    detector.validate()?;

    let filtered;
    let samples = match a.notch_rpm {
        Some(rpm) => {
            let f0 = fundamental_for(&trace, Some(rpm))?;
            let harmonics = a
                .notch_harmonics
                .or(config.notch_harmonics)
                .unwrap_or(DEFAULT_NOTCH_HARMONICS);
            let spec = notch_filter(&trace, f0, harmonics, config.notch_bandwidth_hz)?;
            filtered = apply_zero_phase(&spec, channel)?;
            filtered.as_slice()
        }
        None => channel,
    };
    let report = detect_steps(samples, &detector, trace.sample_rate_hz)?;
    let out = output_path(a.out, config, "events.csv");
    emit(out.as_deref(), &csv::format_events(&report, trace.t0))
}

fn ingest_sweep_dir(dir: &Path) -> CliResult<Vec<(f64, WavelengthTrace)>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|_| Failure::Usage(format!("sweep directory '{}' not found", dir.display())))?;
    let mut traces = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Failure::Runtime(e.to_string()))?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let Some(value) = name.strip_prefix("rpm_").and_then(|n| n.strip_suffix(".csv")) else {
            continue;
        };
        let rpm: f64 = value
            .parse()
            .map_err(|_| Failure::Usage(format!("cannot read an rpm from '{name}'")))?;
        traces.push((rpm, load_trace(&path)?));
    }
    traces.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(traces)
}

fn sweep_cmd(a: SweepArgs, config: &RunConfig, seed: u64) -> CliResult<()> {
    if let Some(p) = &a.preset {
        if p != "paper" {
            return Err(Failure::Usage(format!("unknown sweep preset '{p}' (expected paper)")));
        }
    }
    let params = model_params(config)?;
    let report = match &a.input_dir {
        Some(dir) => sweep_from_traces(&ingest_sweep_dir(dir)?, &params)?,
        None => {
            let grid = log_rpm_grid(
                a.rpm_min.or(config.sweep_min_rpm).unwrap_or(DEFAULT_GRID_MIN_RPM),
                a.rpm_max.or(config.sweep_max_rpm).unwrap_or(DEFAULT_GRID_MAX_RPM),
                a.points.or(config.sweep_points).unwrap_or(DEFAULT_GRID_POINTS),
            );
            let mut template = default_sweep_template();
            if let Some(v) = config.sample_rate_hz {
                template.sample_rate_hz = v;
            }
            if let Some(v) = config.noise_sigma_nm {
                template.noise_sigma_nm = v;
            }
            if let Some(v) = a.duration.or(config.duration_s) {
                template.duration_s = v;
            }
            run_sweep(&grid, &template, &params, seed).map_err(|e| match e {
                Error::Input(m) => Failure::Usage(m),
                other => other.into(),
            })?
        }
    };
    if let Some(path) = output_path(a.out, config, "sweep.csv") {
        write_atomic(&path, &csv::format_sweep(&report))?;
    }
    print!("{}", report.summary());
    Ok(())
}

//! Plain CSV formats. Floats are written with Rust's shortest round-trip
//! formatting, so a written file parses back to identical values.

use crate::error::{Error, Result};
use crate::events::EventReport;
use crate::shape::{AreaCalibration, CalibrationModel, ShapeEstimate, BAND_MAX_NM, BAND_MIN_NM};
use crate::spectral::MagnitudeSpectrum;
use crate::sweep::ResonanceReport;
use crate::trace::{ChannelLabel, WavelengthTrace};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

pub const TRACE_HEADER: &str = "time_s,fiber,aa,wavelength_nm";
pub const SPECTRUM_HEADER: &str = "frequency_hz,magnitude_nm";
pub const EVENTS_HEADER: &str = "time_s,magnitude_nm,direction";
pub const SWEEP_HEADER: &str = "rpm,amplitude_nm";
pub const CALIBRATION_HEADER: &str = "aa_index,base_wavelength_nm,sensitivity_nm_per_invm";
pub const POLYLINE_HEADER: &str = "s_mm,x_mm,z_mm";
pub const TIPS_HEADER: &str = "time_s,tip_x_mm,tip_z_mm";

/// Sample rate assumed for a file holding a single instant.
pub const SINGLE_INSTANT_SAMPLE_RATE_HZ: f64 = 1000.0;
const RATE_TOLERANCE: f64 = 1e-6;

/// One row per (sample, channel), samples in time order.
pub fn format_trace(trace: &WavelengthTrace) -> String {
    let mut out = String::with_capacity(32 * trace.len() * trace.channels.len() + 32);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for n in 0..trace.len() {
        let t = trace.time_s(n);
        for (label, channel) in trace.labels.iter().zip(&trace.channels) {
            let _ = writeln!(out, "{},{},{},{}", t, label.fiber, label.aa, channel[n]);
        }
    }
    out
}

/// Reads a trace file into one trace per fiber.
pub fn parse_trace_csv(path: &Path) -> Result<Vec<WavelengthTrace>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace_text(&text, path)
}

/// Reads a trace file keeping every fiber in one trace.
pub fn read_trace(path: &Path) -> Result<WavelengthTrace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace_combined(&text, path)
}

pub fn parse_trace_text(text: &str, path: &Path) -> Result<Vec<WavelengthTrace>> {
    Ok(parse_trace_combined(text, path)?.split_fibers())
}

struct Instant {
    line: usize,
    time: f64,
    values: BTreeMap<ChannelLabel, f64>,
}

fn parse_trace_combined(text: &str, path: &Path) -> Result<WavelengthTrace> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        None => return Err(Error::parse(path, 1, "empty file")),
        Some((_, h)) if h == TRACE_HEADER => {}
        Some((n, h)) => {
            return Err(Error::parse(
                path,
                n,
                format!("expected header '{TRACE_HEADER}', found '{h}'"),
            ))
        }
    }

    let mut instants: Vec<Instant> = Vec::new();
    for (line, raw) in lines {
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                path,
                line,
                format!("expected 4 fields, found {}", fields.len()),
            ));
        }
        let time: f64 = parse_num(fields[0], "time_s", path, line)?;
        let fiber: u8 = fields[1]
            .parse()
            .ok()
            .filter(|f| *f <= 1)
            .ok_or_else(|| Error::parse(path, line, format!("fiber must be 0 or 1, found '{}'", fields[1])))?;
        let aa: u8 = fields[2]
            .parse()
            .ok()
            .filter(|a| *a <= 2)
            .ok_or_else(|| {
                Error::parse(path, line, format!("aa must be 0, 1 or 2, found '{}'", fields[2]))
            })?;
        let wavelength: f64 = parse_num(fields[3], "wavelength_nm", path, line)?;
        if !(BAND_MIN_NM..=BAND_MAX_NM).contains(&wavelength) {
            return Err(Error::parse(
                path,
                line,
                format!("wavelength {wavelength} nm outside {BAND_MIN_NM}-{BAND_MAX_NM} nm"),
            ));
        }
        if !time.is_finite() {
            return Err(Error::parse(path, line, "time must be finite"));
        }

        let label = ChannelLabel { fiber, aa };
        match instants.last_mut() {
            Some(last) if last.time == time => {
                if last.values.insert(label, wavelength).is_some() {
                    return Err(Error::parse(
                        path,
                        line,
                        format!("fiber {fiber} aa {aa} repeated at t = {time} s"),
                    ));
                }
            }
            Some(last) if time < last.time => {
                return Err(Error::parse(path, line, "time went backwards"));
            }
            _ => {
                let mut values = BTreeMap::new();
                values.insert(label, wavelength);
                instants.push(Instant { line, time, values });
            }
        }
    }

    let first = instants
        .first()
        .ok_or_else(|| Error::parse(path, 2, "no data rows"))?;
    let labels: Vec<ChannelLabel> = first.values.keys().copied().collect();
    for inst in &instants[1..] {
        if inst.values.len() != labels.len() || !inst.values.keys().eq(labels.iter()) {
            return Err(Error::parse(
                path,
                inst.line,
                "channel set differs from the first instant",
            ));
        }
    }

    let sample_rate_hz = if instants.len() == 1 {
        SINGLE_INSTANT_SAMPLE_RATE_HZ
    } else {
        let mut deltas: Vec<f64> = instants.windows(2).map(|w| w[1].time - w[0].time).collect();
        let unsorted = deltas.clone();
        deltas.sort_by(f64::total_cmp);
        let median = deltas[deltas.len() / 2];
        let fs = (1e6 / median).round() / 1e6;
        let dt = 1.0 / fs;
        for (i, d) in unsorted.iter().enumerate() {
            if ((d - dt) / dt).abs() > RATE_TOLERANCE {
                return Err(Error::parse(
                    path,
                    instants[i + 1].line,
                    format!("sample interval {d} s departs from {dt} s by more than 1 ppm"),
                ));
            }
        }
        fs
    };

    let channels: Vec<Vec<f64>> = labels
        .iter()
        .map(|l| instants.iter().map(|inst| inst.values[l]).collect())
        .collect();
    WavelengthTrace::new(sample_rate_hz, first.time, labels, channels)
        .map_err(|e| Error::parse(path, first.line, e.to_string()))
}

fn parse_num(field: &str, name: &str, path: &Path, line: usize) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::parse(path, line, format!("{name} '{field}' is not a number")))
}

pub fn format_spectrum(spectrum: &MagnitudeSpectrum) -> String {
    let mut out = String::from(SPECTRUM_HEADER);
    out.push('\n');
    for (f, m) in spectrum.frequency_hz.iter().zip(&spectrum.magnitude_nm) {
        let _ = writeln!(out, "{f},{m}");
    }
    out
}

/// Event times are offset by `t0`, the trace start.
pub fn format_events(report: &EventReport, t0: f64) -> String {
    let mut out = String::from(EVENTS_HEADER);
    out.push('\n');
    for e in &report.events {
        let _ = writeln!(out, "{},{},{}", t0 + e.time_s, e.magnitude_nm, e.direction.as_str());
    }
    out
}

pub fn format_sweep(report: &ResonanceReport) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for p in &report.points {
        let _ = writeln!(out, "{},{}", p.rpm, p.amplitude_nm);
    }
    out
}

pub fn format_polyline(shape: &ShapeEstimate) -> String {
    let mut out = String::from(POLYLINE_HEADER);
    out.push('\n');
    for p in &shape.centerline {
        let _ = writeln!(out, "{},{},{}", p.s_mm, p.x_mm, p.z_mm);
    }
    out
}

pub fn format_tips(times: &[f64], tips: &[(f64, f64)]) -> String {
    let mut out = String::from(TIPS_HEADER);
    out.push('\n');
    for (t, (x, z)) in times.iter().zip(tips) {
        let _ = writeln!(out, "{t},{x},{z}");
    }
    out
}

pub fn format_calibration(model: &CalibrationModel) -> String {
    let mut out = String::from(CALIBRATION_HEADER);
    out.push('\n');
    for (i, a) in model.areas.iter().enumerate() {
        let _ = writeln!(out, "{i},{},{}", a.base_wavelength_nm, a.sensitivity_nm_per_invm);
    }
    out
}

/// Rows may come in any order but must cover area indices `0..n` once each.
pub fn parse_calibration_csv(path: &Path) -> Result<CalibrationModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_calibration_text(&text, path)
}

pub fn parse_calibration_text(text: &str, path: &Path) -> Result<CalibrationModel> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, h)) if h == CALIBRATION_HEADER => {}
        Some((n, h)) => {
            return Err(Error::parse(
                path,
                n,
                format!("expected header '{CALIBRATION_HEADER}', found '{h}'"),
            ))
        }
        None => return Err(Error::parse(path, 1, "empty file")),
    }
    let mut rows: BTreeMap<usize, (usize, AreaCalibration)> = BTreeMap::new();
    for (line, raw) in lines {
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::parse(path, line, format!("expected 3 fields, found {}", fields.len())));
        }
        let idx: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(path, line, format!("aa_index '{}' is not an index", fields[0])))?;
        let area = AreaCalibration {
            base_wavelength_nm: parse_num(fields[1], "base_wavelength_nm", path, line)?,
            sensitivity_nm_per_invm: parse_num(fields[2], "sensitivity_nm_per_invm", path, line)?,
        };
        let single = CalibrationModel { areas: vec![area] };
        single
            .validate()
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        if rows.insert(idx, (line, area)).is_some() {
            return Err(Error::parse(path, line, format!("aa_index {idx} repeated")));
        }
    }
    if rows.is_empty() {
        return Err(Error::parse(path, 2, "no calibration rows"));
    }
    for (expect, (idx, (line, _))) in rows.iter().enumerate() {
        if *idx != expect {
            return Err(Error::parse(path, *line, format!("aa_index {expect} is missing")));
        }
    }
    Ok(CalibrationModel {
        areas: rows.into_values().map(|(_, a)| a).collect(),
    })
}

//! CSV and JSON report files. Floats are written in Rust's shortest
//! round-trip decimal form, so re-parsing reproduces the exact bit
//! pattern; files are written atomically (temp file + rename).

use std::io::Write;
use std::path::Path;

use ndarray_linalg::c64;
use serde::Serialize;

use crate::spectral::ResolventSweep;
use crate::timeint::EnergyTrace;

use super::{CliError, CliResult};

/// Writes `bytes` to `path` through a sibling temp file and a rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut body = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("serialization: {e}")))?;
    body.push('\n');
    atomic_write(path, body.as_bytes())
}

fn parse_f64(path: &Path, token: &str) -> CliResult<f64> {
    token
        .trim()
        .parse::<f64>()
        .map_err(|e| CliError::MalformedReport {
            path: path.display().to_string(),
            reason: format!("bad float `{token}`: {e}"),
        })
}

/// Energy trace: `t,energy,loss`, one row per sample; the loss column
/// carries the loss of the step ending at that instant (0 for the first
/// row).
pub fn write_trace_csv(path: &Path, trace: &EnergyTrace) -> CliResult<()> {
    let mut out = String::from("t,energy,loss\n");
    for (i, (&t, &e)) in trace.times.iter().zip(&trace.energies).enumerate() {
        let loss = if i == 0 {
            0.0
        } else {
            trace.boundary_losses[i - 1]
        };
        out.push_str(&format!("{t},{e},{loss}\n"));
    }
    atomic_write(path, out.as_bytes())
}

/// Reads the three columns written by [`write_trace_csv`].
pub fn read_trace_csv(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let mut times = Vec::new();
    let mut energies = Vec::new();
    let mut losses = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line != "t,energy,loss" {
                return Err(CliError::MalformedReport {
                    path: path.display().to_string(),
                    reason: format!("unexpected header `{line}`"),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (a, b, c) = (fields.next(), fields.next(), fields.next());
        match (a, b, c, fields.next()) {
            (Some(a), Some(b), Some(c), None) => {
                times.push(parse_f64(path, a)?);
                energies.push(parse_f64(path, b)?);
                losses.push(parse_f64(path, c)?);
            }
            _ => {
                return Err(CliError::MalformedReport {
                    path: path.display().to_string(),
                    reason: format!("expected 3 columns, got `{line}`"),
                })
            }
        }
    }
    Ok((times, energies, losses))
}

/// Eigenvalues: `re,im`, one row per eigenvalue.
pub fn write_spectrum_csv(path: &Path, eigenvalues: &[c64]) -> CliResult<()> {
    let mut out = String::from("re,im\n");
    for z in eigenvalues {
        out.push_str(&format!("{},{}\n", z.re, z.im));
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_spectrum_csv(path: &Path) -> CliResult<Vec<c64>> {
    let text = std::fs::read_to_string(path)?;
    let mut eigenvalues = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line != "re,im" {
                return Err(CliError::MalformedReport {
                    path: path.display().to_string(),
                    reason: format!("unexpected header `{line}`"),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let Some((re, im)) = line.split_once(',') else {
            return Err(CliError::MalformedReport {
                path: path.display().to_string(),
                reason: format!("expected 2 columns, got `{line}`"),
            });
        };
        eigenvalues.push(c64::new(parse_f64(path, re)?, parse_f64(path, im)?));
    }
    Ok(eigenvalues)
}

/// Resolvent sweep: `lambda,norm`.
pub fn write_sweep_csv(path: &Path, sweep: &ResolventSweep) -> CliResult<()> {
    let mut out = String::from("lambda,norm\n");
    for (&l, &n) in sweep.lambdas.iter().zip(&sweep.norms) {
        out.push_str(&format!("{l},{n}\n"));
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_sweep_csv(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lambdas = Vec::new();
    let mut norms = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line != "lambda,norm" {
                return Err(CliError::MalformedReport {
                    path: path.display().to_string(),
                    reason: format!("unexpected header `{line}`"),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let Some((l, n)) = line.split_once(',') else {
            return Err(CliError::MalformedReport {
                path: path.display().to_string(),
                reason: format!("expected 2 columns, got `{line}`"),
            });
        };
        lambdas.push(parse_f64(path, l)?);
        norms.push(parse_f64(path, n)?);
    }
    Ok((lambdas, norms))
}

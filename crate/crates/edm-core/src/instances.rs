//! Planar sensor-network instance generation, accuracy evaluation, and the
//! text formats for instances and solutions.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::cliques::PartialEdm;
use crate::error::{Error, Result};
use crate::linalg::EdgeVector;
use crate::realization::Realization;
use crate::report::SolveReport;

const FORMAT_VERSION: u32 = 1;

/// Parameters of the multiplicative-noise instance model: points uniform in
/// the unit square centered at the origin, squared distance (1 + nf·ε)²‖pᵢ−pⱼ‖²
/// with ε standard normal, an edge whenever the true distance is within the
/// radio range.
#[derive(Debug, Clone, Copy)]
pub struct NoiseModelParams {
    pub n: usize,
    pub noise_factor: f64,
    pub radio_range: f64,
    pub seed: u64,
}

/// A generated or parsed instance: the partial EDM plus generation metadata
/// carried through the file format.
#[derive(Debug, Clone)]
pub struct Instance {
    pub edm: PartialEdm,
    pub noise_factor: Option<f64>,
    pub seed: Option<u64>,
}

/// Draws an instance in the plane. Same seed, same instance: the generator
/// consumes coordinates first (x then y per point), then one normal deviate
/// per vertex pair in lexicographic order, edge or not.
pub fn generate_instance(params: &NoiseModelParams) -> Result<Instance> {
    let NoiseModelParams {
        n,
        noise_factor,
        radio_range,
        seed,
    } = *params;
    if n < 2 {
        return Err(Error::Validation(format!(
            "need at least 2 points, got {n}"
        )));
    }
    if noise_factor < 0.0 {
        return Err(Error::Validation(format!(
            "noise factor must be ≥ 0, got {noise_factor}"
        )));
    }
    if radio_range <= 0.0 {
        return Err(Error::Validation(format!(
            "radio range must be positive, got {radio_range}"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let square = Uniform::new(-0.5, 0.5).expect("valid uniform bounds");
    let mut pts = DMatrix::<f64>::zeros(n, 2);
    for i in 0..n {
        for c in 0..2 {
            pts[(i, c)] = square.sample(&mut rng);
        }
    }
    // Center before measuring so the stored truth reproduces the stored
    // distances exactly, not just up to rounding.
    for c in 0..2 {
        let mean = pts.column(c).mean();
        for i in 0..n {
            pts[(i, c)] -= mean;
        }
    }
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let eps: f64 = StandardNormal.sample(&mut rng);
            let dx = pts[(i, 0)] - pts[(j, 0)];
            let dy = pts[(i, 1)] - pts[(j, 1)];
            let true_sq = dx * dx + dy * dy;
            if true_sq.sqrt() <= radio_range {
                let scale = 1.0 + noise_factor * eps;
                pairs.push((i, j, scale * scale * true_sq));
            }
        }
    }
    let d = EdgeVector::new(n, pairs)?;
    let edm = PartialEdm::new(n, 2, d)?
        .with_radio_range(radio_range)?
        .with_ground_truth_raw(Realization::new(pts))?;
    Ok(Instance {
        edm,
        noise_factor: Some(noise_factor),
        seed: Some(seed),
    })
}

/// Accuracy of an estimated realization against the instance ground truth.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// Best-aligned root-mean-square deviation from the true points.
    pub rmsd: f64,
    /// RMSD as a percentage of the radio range, when the range is known.
    pub rmsd_pct_radio: Option<f64>,
    /// ‖𝒫K(PPᵀ) − d‖ of the estimate.
    pub misfit: f64,
    pub max_edge_error: f64,
}

pub fn evaluate(g: &PartialEdm, p: &Realization) -> Result<Evaluation> {
    let truth = g.ground_truth().ok_or(Error::NoGroundTruth)?;
    let rmsd = p.rmsd_to(truth)?;
    let residuals = g.edge_residuals(p);
    let misfit = residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
    let max_edge_error = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(Evaluation {
        rmsd,
        rmsd_pct_radio: g.radio_range().map(|radio| 100.0 * rmsd / radio),
        misfit,
        max_edge_error,
    })
}

fn fmt_float(v: f64) -> String {
    format!("{v:.17e}")
}

/// Writes the instance: `# key value` header, one `i j d_ij` record per edge
/// (1-based), and the ground truth as a trailing `# truth` block.
pub fn write_instance<P: AsRef<Path>>(path: P, instance: &Instance) -> Result<()> {
    let g = &instance.edm;
    let mut out = String::new();
    let _ = writeln!(out, "# n {}", g.n());
    let _ = writeln!(out, "# r {}", g.r());
    if let Some(radio) = g.radio_range() {
        let _ = writeln!(out, "# R {}", fmt_float(radio));
    }
    if let Some(nf) = instance.noise_factor {
        let _ = writeln!(out, "# nf {}", fmt_float(nf));
    }
    if let Some(seed) = instance.seed {
        let _ = writeln!(out, "# seed {seed}");
    }
    let _ = writeln!(out, "# format-version {FORMAT_VERSION}");
    for (i, j, v) in g.d().iter() {
        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, fmt_float(v));
    }
    if let Some(truth) = g.ground_truth() {
        let _ = writeln!(out, "# truth");
        let pts = truth.points();
        for i in 0..pts.nrows() {
            let _ = writeln!(
                out,
                "{} {} {}",
                i + 1,
                fmt_float(pts[(i, 0)]),
                fmt_float(pts[(i, 1)])
            );
        }
    }
    let mut file = BufWriter::new(File::create(path)?);
    file.write_all(out.as_bytes())?;
    file.flush()?;
    Ok(())
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad {what}: {tok:?}"),
    })
}

pub fn read_instance<P: AsRef<Path>>(path: P) -> Result<Instance> {
    let reader = BufReader::new(File::open(path)?);
    let mut n: Option<usize> = None;
    let mut r: Option<usize> = None;
    let mut radio: Option<f64> = None;
    let mut nf: Option<f64> = None;
    let mut seed: Option<u64> = None;
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    let mut truth_rows: Vec<(usize, f64, f64)> = Vec::new();
    let mut in_truth = false;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut toks = rest.split_whitespace();
            match toks.next() {
                Some("n") => n = Some(parse_num(toks.next().unwrap_or(""), lineno, "n")?),
                Some("r") => r = Some(parse_num(toks.next().unwrap_or(""), lineno, "r")?),
                Some("R") => radio = Some(parse_num(toks.next().unwrap_or(""), lineno, "R")?),
                Some("nf") => nf = Some(parse_num(toks.next().unwrap_or(""), lineno, "nf")?),
                Some("seed") => seed = Some(parse_num(toks.next().unwrap_or(""), lineno, "seed")?),
                Some("format-version") => {
                    let v: u32 = parse_num(toks.next().unwrap_or(""), lineno, "format version")?;
                    if v != FORMAT_VERSION {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: format!("unsupported format version {v}"),
                        });
                    }
                }
                Some("truth") => in_truth = true,
                _ => {} // free-form comment
            }
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 3 fields, got {}", toks.len()),
            });
        }
        if in_truth {
            let i: usize = parse_num(toks[0], lineno, "vertex index")?;
            let x: f64 = parse_num(toks[1], lineno, "x coordinate")?;
            let y: f64 = parse_num(toks[2], lineno, "y coordinate")?;
            truth_rows.push((i, x, y));
        } else {
            let i: usize = parse_num(toks[0], lineno, "vertex index")?;
            let j: usize = parse_num(toks[1], lineno, "vertex index")?;
            let v: f64 = parse_num(toks[2], lineno, "squared distance")?;
            if i == 0 || j == 0 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "vertex indices are 1-based".into(),
                });
            }
            let (a, b) = (i - 1, j - 1);
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            if a == b {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("self-loop on vertex {i}"),
                });
            }
            pairs.push((a, b, v));
        }
    }

    let n = n.ok_or(Error::Parse {
        line: 0,
        msg: "missing `# n` header".into(),
    })?;
    let r = r.unwrap_or(2);
    let d = EdgeVector::new(n, pairs)?;
    let mut edm = PartialEdm::new(n, r, d)?;
    if let Some(radio) = radio {
        edm = edm.with_radio_range(radio)?;
    }
    if !truth_rows.is_empty() {
        if truth_rows.len() != n {
            return Err(Error::Parse {
                line: 0,
                msg: format!("truth block has {} rows, expected {n}", truth_rows.len()),
            });
        }
        let mut pts = DMatrix::zeros(n, 2);
        for &(i, x, y) in &truth_rows {
            if i == 0 || i > n {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("truth vertex index {i} out of range"),
                });
            }
            pts[(i - 1, 0)] = x;
            pts[(i - 1, 1)] = y;
        }
        edm = edm.with_ground_truth_raw(Realization::new(pts))?;
    }
    Ok(Instance {
        edm,
        noise_factor: nf,
        seed,
    })
}

/// Writes a solution: the solve report as a `# key value` block, then one
/// `i x y` record per vertex (1-based).
pub fn write_solution<P: AsRef<Path>>(
    path: P,
    p: &Realization,
    report: &SolveReport,
) -> Result<()> {
    let pts = p.points();
    if pts.ncols() != 2 {
        return Err(Error::dims(format!(
            "solution format stores planar points, got dimension {}",
            pts.ncols()
        )));
    }
    let mut out = String::new();
    let _ = writeln!(out, "# format-version {FORMAT_VERSION}");
    let _ = writeln!(out, "# n {}", pts.nrows());
    for (key, value) in report.entries() {
        let _ = writeln!(out, "# {key} {value}");
    }
    for i in 0..pts.nrows() {
        let _ = writeln!(
            out,
            "{} {} {}",
            i + 1,
            fmt_float(pts[(i, 0)]),
            fmt_float(pts[(i, 1)])
        );
    }
    let mut file = BufWriter::new(File::create(path)?);
    file.write_all(out.as_bytes())?;
    file.flush()?;
    Ok(())
}

/// Reads a solution file back: the points plus the report block as ordered
/// key-value pairs.
pub fn read_solution<P: AsRef<Path>>(path: P) -> Result<(Realization, Vec<(String, String)>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut n: Option<usize> = None;
    let mut entries = Vec::new();
    let mut rows: Vec<(usize, f64, f64)> = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            let Some((key, value)) = rest.split_once(char::is_whitespace) else {
                continue;
            };
            match key {
                "n" => n = Some(parse_num(value.trim(), lineno, "n")?),
                "format-version" => {
                    let v: u32 = parse_num(value.trim(), lineno, "format version")?;
                    if v != FORMAT_VERSION {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: format!("unsupported format version {v}"),
                        });
                    }
                }
                _ => entries.push((key.to_string(), value.trim().to_string())),
            }
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 3 fields, got {}", toks.len()),
            });
        }
        let i: usize = parse_num(toks[0], lineno, "vertex index")?;
        let x: f64 = parse_num(toks[1], lineno, "x coordinate")?;
        let y: f64 = parse_num(toks[2], lineno, "y coordinate")?;
        rows.push((i, x, y));
    }
    let n = n.unwrap_or(rows.len());
    if rows.len() != n {
        return Err(Error::Parse {
            line: 0,
            msg: format!("solution has {} rows, expected {n}", rows.len()),
        });
    }
    let mut pts = DMatrix::zeros(n, 2);
    for &(i, x, y) in &rows {
        if i == 0 || i > n {
            return Err(Error::Parse {
                line: 0,
                msg: format!("vertex index {i} out of range"),
            });
        }
        pts[(i - 1, 0)] = x;
        pts[(i - 1, 1)] = y;
    }
    Ok((Realization::new(pts), entries))
}

//! On-disk formats: the matrix CSV dialect, the JSON matrix object, the
//! experiment-data directory, and the machine-readable reports emitted by
//! the CLI.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::attack::AttackOutcome;
use crate::linalg::{ensure_finite, Mat, Tolerances};
use crate::lti::{ExperimentData, LtiSystem};
use crate::subspace::Subspace;

pub const SCHEMA_VERSION: u32 = 1;

/// Writes a matrix as CSV: one row per line, comma-separated, '.' decimal.
pub fn write_mat_csv(path: &Path, m: &Mat) -> Result<()> {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:?}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a matrix from the CSV dialect of [`write_mat_csv`].
pub fn read_mat_csv(path: &Path) -> Result<Mat> {
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|_| {
                    Error::Parse(format!(
                        "{}:{}: bad number '{}'",
                        path.display(),
                        lineno + 1,
                        cell
                    ))
                })
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse(format!(
                    "{}:{}: ragged row",
                    path.display(),
                    lineno + 1
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse(format!("{}: empty matrix", path.display())));
    }
    let (r, c) = (rows.len(), rows[0].len());
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let m = Mat::from_row_slice(r, c, &flat);
    ensure_finite(&m)?;
    Ok(m)
}

/// JSON matrix object {rows, cols, data} with row-major flat data.
#[derive(Debug, Serialize, Deserialize)]
pub struct MatJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatJson {
    pub fn from_mat(m: &Mat) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_mat(&self) -> Result<Mat> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Parse("matrix data length mismatch".into()));
        }
        let m = Mat::from_row_slice(self.rows, self.cols, &self.data);
        ensure_finite(&m)?;
        Ok(m)
    }
}

/// JSON form of a subspace: ambient dimension, dimension, and the flat
/// row-major basis.
#[derive(Debug, Serialize, Deserialize)]
pub struct SubspaceJson {
    pub ambient_dim: usize,
    pub dim: usize,
    pub basis: Vec<f64>,
}

impl SubspaceJson {
    pub fn from_subspace(s: &Subspace) -> Self {
        let b = s.basis();
        let mut basis = Vec::with_capacity(b.nrows() * b.ncols());
        for i in 0..b.nrows() {
            for j in 0..b.ncols() {
                basis.push(b[(i, j)]);
            }
        }
        Self {
            ambient_dim: s.ambient_dim(),
            dim: s.dim(),
            basis,
        }
    }
}

/// JSON form of a complex scalar.
#[derive(Debug, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub horizon: usize,
    pub experiments: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
}

/// Writes the experiment directory: X.csv, X0.csv, Y.csv, U.csv plus a JSON
/// manifest.
pub fn save_experiment(
    dir: &Path,
    data: &ExperimentData,
    seed: u64,
    system: Option<&str>,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_mat_csv(&dir.join("X.csv"), &data.x)?;
    write_mat_csv(&dir.join("X0.csv"), &data.x0)?;
    write_mat_csv(&dir.join("Y.csv"), &data.y)?;
    write_mat_csv(&dir.join("U.csv"), &data.u)?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        n: data.n,
        m: data.m,
        p: data.p,
        horizon: data.horizon,
        experiments: data.experiments,
        seed,
        system: system.map(String::from),
    };
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

/// Loads an experiment directory, recomputing the cached kernels.
pub fn load_experiment(dir: &Path, tol: &Tolerances) -> Result<(ExperimentData, Manifest)> {
    let manifest: Manifest =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
    let x = read_mat_csv(&dir.join("X.csv"))?;
    let x0 = read_mat_csv(&dir.join("X0.csv"))?;
    let y = read_mat_csv(&dir.join("Y.csv"))?;
    let u = read_mat_csv(&dir.join("U.csv"))?;
    let data = ExperimentData::from_matrices(x, x0, y, u, manifest.horizon, tol)?;
    if data.n != manifest.n || data.m != manifest.m || data.p != manifest.p {
        return Err(Error::Parse(
            "manifest dimensions disagree with the matrices".into(),
        ));
    }
    Ok((data, manifest))
}

/// Loads a system from a directory holding A.csv, B.csv, C.csv.
pub fn load_system(dir: &Path) -> Result<LtiSystem> {
    let a = read_mat_csv(&dir.join("A.csv"))?;
    let b = read_mat_csv(&dir.join("B.csv"))?;
    let c = read_mat_csv(&dir.join("C.csv"))?;
    LtiSystem::new(a, b, c)
}

/// Writes the attack outcome as CSV: step, state deviation, output
/// deviation, then the attacked monitor outputs.
pub fn write_attack_csv(path: &Path, outcome: &AttackOutcome) -> Result<()> {
    let p = outcome
        .attacked_outputs
        .first()
        .map(|y| y.len())
        .unwrap_or(0);
    let mut out = String::from("step,state_deviation,output_deviation");
    for k in 0..p {
        out.push_str(&format!(",y_attacked_{}", k + 1));
    }
    out.push('\n');
    for t in 0..outcome.state_deviation.len() {
        out.push_str(&format!(
            "{},{:?},{:?}",
            t, outcome.state_deviation[t], outcome.output_deviation[t]
        ));
        for k in 0..p {
            out.push_str(&format!(",{:?}", outcome.attacked_outputs[t][k]));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

//! Equidistant observation series and their CSV form.
//!
//! ```text
//! # delta_t=0.004,v0=0.04
//! i,x,v,z,y
//! 1,0.0031,0.041,0.018,0.00016
//! ```
//!
//! The `z` and `y` columns are optional. Floats are written in shortest
//! round-trip form, so write followed by read is lossless.

use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservationSeries {
    delta_t: f64,
    v0: Option<f64>,
    x: Vec<f64>,
    v: Vec<f64>,
    z: Option<Vec<f64>>,
    y: Option<Vec<f64>>,
}

impl ObservationSeries {
    pub fn new(delta_t: f64, v0: Option<f64>, x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if !(delta_t.is_finite() && delta_t > 0.0) {
            return Err(Error::InvalidInput(format!(
                "delta_t must be > 0, got {delta_t}"
            )));
        }
        if x.len() != v.len() {
            return Err(Error::InvalidInput(format!(
                "x has {} entries but v has {}",
                x.len(),
                v.len()
            )));
        }
        if let Some(v0) = v0 {
            check_variance(0, v0)?;
        }
        for (i, &vi) in v.iter().enumerate() {
            check_variance(i + 1, vi)?;
        }
        if let Some(bad) = x.iter().position(|xi| !xi.is_finite()) {
            return Err(Error::InvalidInput(format!("X_{} is not finite", bad + 1)));
        }
        Ok(Self {
            delta_t,
            v0,
            x,
            v,
            z: None,
            y: None,
        })
    }

    /// Attaches the latent driving-process increments and integrated variances.
    pub fn with_latent(mut self, z: Option<Vec<f64>>, y: Option<Vec<f64>>) -> Result<Self> {
        for (name, col) in [("z", &z), ("y", &y)] {
            if let Some(c) = col {
                if c.len() != self.len() {
                    return Err(Error::InvalidInput(format!(
                        "column {name} has {} entries, expected {}",
                        c.len(),
                        self.len()
                    )));
                }
            }
        }
        self.z = z;
        self.y = y;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// At least two steps and a known `V_0`.
    pub fn is_usable_for_estimation(&self) -> bool {
        self.len() >= 2 && self.v0.is_some()
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }
    pub fn v0(&self) -> Option<f64> {
        self.v0
    }
    pub fn x(&self) -> &[f64] {
        &self.x
    }
    pub fn v(&self) -> &[f64] {
        &self.v
    }
    pub fn z(&self) -> Option<&[f64]> {
        self.z.as_deref()
    }
    pub fn y(&self) -> Option<&[f64]> {
        self.y.as_deref()
    }

    /// Multiplies every return by `c`.
    pub fn scale_returns(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.x.iter_mut().for_each(|x| *x *= c);
        out
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        let meta = match self.v0 {
            Some(v0) => format!("# delta_t={},v0={}\n", self.delta_t, v0),
            None => format!("# delta_t={}\n", self.delta_t),
        };
        out.write_all(meta.as_bytes()).map_err(io_error)?;
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["i", "x", "v"];
        if self.z.is_some() {
            header.push("z");
        }
        if self.y.is_some() {
            header.push("y");
        }
        w.write_record(&header).map_err(csv_error)?;
        for i in 0..self.len() {
            let mut row = vec![
                (i + 1).to_string(),
                self.x[i].to_string(),
                self.v[i].to_string(),
            ];
            if let Some(z) = &self.z {
                row.push(z[i].to_string());
            }
            if let Some(y) = &self.y {
                row.push(y[i].to_string());
            }
            w.write_record(&row).map_err(csv_error)?;
        }
        w.flush().map_err(io_error)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read_csv<R: Read>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text).map_err(io_error)?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut delta_t = None;
        let mut v0 = None;
        let mut offset = 0;
        let mut body = text;
        while let Some(line) = body.lines().next() {
            let Some(meta) = line.strip_prefix('#') else {
                break;
            };
            offset += 1;
            for item in meta.split(',') {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                let (key, value) = item.split_once('=').ok_or_else(|| {
                    Error::InvalidInput(format!("line {offset}: malformed metadata `{item}`"))
                })?;
                let value: f64 = value.trim().parse().map_err(|_| {
                    Error::InvalidInput(format!("line {offset}: `{key}` is not a number"))
                })?;
                match key.trim() {
                    "delta_t" => delta_t = Some(value),
                    "v0" => v0 = Some(value),
                    _ => {}
                }
            }
            body = body.split_once('\n').map(|(_, rest)| rest).unwrap_or("");
        }
        let delta_t =
            delta_t.ok_or_else(|| Error::InvalidInput("missing `delta_t` metadata line".into()))?;

        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        let headers = reader.headers().map_err(csv_error)?.clone();
        let column = |name: &str| headers.iter().position(|h| h == name);
        let require = |name: &str| {
            column(name).ok_or_else(|| Error::InvalidInput(format!("missing column `{name}`")))
        };
        let (xi, vi) = (require("x")?, require("v")?);
        require("i")?;
        let (zi, yi) = (column("z"), column("y"));

        let (mut x, mut v) = (Vec::new(), Vec::new());
        let mut z = zi.map(|_| Vec::new());
        let mut y = yi.map(|_| Vec::new());
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e
                    .position()
                    .map(|p| p.line() as usize + offset)
                    .unwrap_or(0);
                Error::InvalidInput(format!("line {line}: {e}"))
            })?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(0) + offset;
            let field = |idx: usize, name: &str| -> Result<f64> {
                let raw = record.get(idx).ok_or_else(|| {
                    Error::InvalidInput(format!("line {line}: missing field `{name}`"))
                })?;
                raw.parse().map_err(|_| {
                    Error::InvalidInput(format!(
                        "line {line}: `{name}` value `{raw}` is not a number"
                    ))
                })
            };
            x.push(field(xi, "x")?);
            v.push(field(vi, "v")?);
            if let (Some(idx), Some(col)) = (zi, z.as_mut()) {
                col.push(field(idx, "z")?);
            }
            if let (Some(idx), Some(col)) = (yi, y.as_mut()) {
                col.push(field(idx, "y")?);
            }
        }
        Self::new(delta_t, v0, x, v)?.with_latent(z, y)
    }

    pub fn read_csv_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn check_variance(i: usize, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "V_{i} = {v} must be finite and >= 0"
        )))
    }
}

fn io_error(e: std::io::Error) -> Error {
    Error::InvalidInput(format!("i/o error: {e}"))
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv error: {e}"))
}

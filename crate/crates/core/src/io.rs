//! CSV file formats.
//!
//! Every file starts with `# key=value` comment lines describing the run,
//! followed by a header row and data rows. Floats are written with 17
//! significant digits so they round-trip exactly.

use std::io::{BufRead, BufReader, Read, Write};

use crate::ensemble::EnsembleStats;
use crate::error::{contract, Error, Result};
use crate::integrator::Trajectory;
use crate::kernel::{KernelMeta, KernelTable};
use crate::model::PhasePoint;

/// Ordered `key=value` metadata carried in comment lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Header {
    entries: Vec<(String, String)>,
}

impl Header {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces `key`.
    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        let key = key.into();
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key, value)),
        }
        self
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.set(key, value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn parse_value<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self
            .get(key)
            .ok_or_else(|| Error::Parse(format!("missing header key `{key}`")))?;
        raw.parse()
            .map_err(|_| Error::Parse(format!("header key `{key}` has unparsable value `{raw}`")))
    }

    fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        for (k, v) in &self.entries {
            writeln!(w, "# {k}={v}")?;
        }
        Ok(())
    }
}

/// Round-trip float formatting (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_rows<W: Write>(
    w: &mut W,
    header: &Header,
    columns: &[String],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    header.write_to(w)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(columns)?;
    for row in rows {
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}

/// A parsed file: metadata, column names and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Header,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Parse(format!("missing column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }

    fn expect_columns(&self, expected: &[&str]) -> Result<()> {
        if self
            .columns
            .iter()
            .map(String::as_str)
            .ne(expected.iter().copied())
        {
            return Err(Error::Parse(format!(
                "expected columns {}, found {}",
                expected.join(","),
                self.columns.join(",")
            )));
        }
        Ok(())
    }

    /// `(t0, dt)` from the header, falling back to the `t` column.
    pub fn grid(&self) -> Result<(f64, f64)> {
        let t = self.column("t")?;
        let t0 = match self.header.get("t0") {
            Some(_) => self.header.parse_value("t0")?,
            None => *t
                .first()
                .ok_or_else(|| Error::Parse("table has no rows".into()))?,
        };
        let dt = match self.header.get("dt") {
            Some(_) => self.header.parse_value("dt")?,
            None if t.len() > 1 => t[1] - t[0],
            None => return Err(Error::Parse("cannot infer dt from a single row".into())),
        };
        Ok((t0, dt))
    }
}

pub fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut header = Header::new();
    let mut body = String::new();
    for line in BufReader::new(reader).lines() {
        let line = line?;
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.trim().split_once('=') {
                header.set(k.trim(), v.trim());
            }
        } else {
            body.push_str(&line);
            body.push('\n');
        }
    }
    let mut csv = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let columns: Vec<String> = csv.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for record in csv.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("not a number: `{f}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != columns.len() {
            return Err(Error::Parse("ragged row".into()));
        }
        rows.push(row);
    }
    Ok(Table {
        header,
        columns,
        rows,
    })
}

/// Writes a free-form numeric table; the inverse of [`read_table`].
pub fn write_table<W: Write>(w: &mut W, table: &Table) -> Result<()> {
    if table.rows.iter().any(|r| r.len() != table.columns.len()) {
        return Err(contract("row length differs from the column count"));
    }
    let rows = table
        .rows
        .iter()
        .map(|r| r.iter().map(|v| fmt_f64(*v)).collect());
    write_rows(w, &table.header, &table.columns, rows)
}

fn grid_header(header: &Header, t0: f64, dt: f64) -> Header {
    header
        .clone()
        .with("t0", fmt_f64(t0))
        .with("dt", fmt_f64(dt))
}

/// `t,y1,...,yn`
pub fn write_trajectory<W: Write>(w: &mut W, traj: &Trajectory, header: &Header) -> Result<()> {
    let mut columns = vec!["t".to_string()];
    columns.extend((1..=traj.dim()).map(|i| format!("y{i}")));
    let rows = traj.states().enumerate().map(|(k, y)| {
        std::iter::once(fmt_f64(traj.time(k)))
            .chain(y.iter().map(|v| fmt_f64(*v)))
            .collect()
    });
    write_rows(w, &grid_header(header, traj.t0, traj.dt), &columns, rows)
}

pub fn read_trajectory<R: Read>(reader: R) -> Result<(Header, Trajectory)> {
    let table = read_table(reader)?;
    if table.columns.first().map(String::as_str) != Some("t") || table.columns.len() < 2 {
        return Err(Error::Parse("trajectory needs columns t,y1,...".into()));
    }
    let (t0, dt) = table.grid()?;
    let rows: Vec<Vec<f64>> = table.rows.iter().map(|r| r[1..].to_vec()).collect();
    let traj = Trajectory::from_rows(t0, dt, &rows)?;
    Ok((table.header, traj))
}

/// `t,mean_y1,stderr_y1,...`
pub fn write_ensemble<W: Write>(w: &mut W, stats: &EnsembleStats, header: &Header) -> Result<()> {
    let m = stats.mean.first().map_or(0, Vec::len);
    let mut columns = vec!["t".to_string()];
    for i in 1..=m {
        columns.push(format!("mean_y{i}"));
        columns.push(format!("stderr_y{i}"));
    }
    let rows = (0..stats.len()).map(|k| {
        let mut row = vec![fmt_f64(stats.time(k))];
        for i in 0..m {
            row.push(fmt_f64(stats.mean[k][i]));
            row.push(fmt_f64(stats.stderr[k][i]));
        }
        row
    });
    let header = grid_header(header, stats.t0, stats.dt).with("n_members", stats.n_members);
    write_rows(w, &header, &columns, rows)
}

pub fn read_ensemble<R: Read>(reader: R) -> Result<(Header, EnsembleStats)> {
    let table = read_table(reader)?;
    let m = (table.columns.len().saturating_sub(1)) / 2;
    let mut expected = vec!["t".to_string()];
    for i in 1..=m {
        expected.push(format!("mean_y{i}"));
        expected.push(format!("stderr_y{i}"));
    }
    if m == 0 || table.columns != expected {
        return Err(Error::Parse(format!(
            "ensemble file needs columns t,mean_y1,stderr_y1,..., found {}",
            table.columns.join(",")
        )));
    }
    let (t0, dt) = table.grid()?;
    let n_members = table.header.parse_value("n_members").unwrap_or(0);
    let stats = EnsembleStats {
        t0,
        dt,
        mean: table
            .rows
            .iter()
            .map(|r| (0..m).map(|i| r[1 + 2 * i]).collect())
            .collect(),
        stderr: table
            .rows
            .iter()
            .map(|r| (0..m).map(|i| r[2 + 2 * i]).collect())
            .collect(),
        n_members,
    };
    Ok((table.header, stats))
}

/// `x1,...,xn`, one sample per row.
pub fn write_samples<W: Write>(w: &mut W, samples: &[PhasePoint], header: &Header) -> Result<()> {
    let n = samples.first().map_or(0, |p| p.coords().len());
    let columns: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let rows = samples
        .iter()
        .map(|p| p.coords().iter().map(|v| fmt_f64(*v)).collect());
    write_rows(w, header, &columns, rows)
}

const KERNEL_COLUMNS: [&str; 4] = ["lag", "value", "stderr", "n_products"];

/// Kernel table with its metadata; `extra` entries are appended after the
/// table's own keys.
pub fn write_kernel<W: Write>(w: &mut W, table: &KernelTable, extra: &Header) -> Result<()> {
    let mut header = Header::new()
        .with("component", table.component)
        .with("dt", fmt_f64(table.dt))
        .with("seed", table.meta.seed)
        .with("n_members", table.meta.n_members)
        .with("temperature", fmt_f64(table.meta.temperature))
        .with("horizon", fmt_f64(table.meta.horizon));
    for (k, v) in extra.entries() {
        header.set(k.clone(), v);
    }
    let columns: Vec<String> = KERNEL_COLUMNS.iter().map(|c| c.to_string()).collect();
    let rows = (0..table.values.len()).map(|k| {
        vec![
            fmt_f64(k as f64 * table.dt),
            fmt_f64(table.values[k]),
            fmt_f64(table.stderr[k]),
            table.n_products[k].to_string(),
        ]
    });
    write_rows(w, &header, &columns, rows)
}

pub fn read_kernel<R: Read>(reader: R) -> Result<(Header, KernelTable)> {
    let table = read_table(reader)?;
    table.expect_columns(&KERNEL_COLUMNS)?;
    let h = &table.header;
    let meta = KernelMeta {
        seed: h.parse_value("seed")?,
        n_members: h.parse_value("n_members")?,
        temperature: h.parse_value("temperature")?,
        horizon: h.parse_value("horizon")?,
    };
    let n_products = table
        .rows
        .iter()
        .map(|r| {
            let v = r[3];
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as u64)
            } else {
                Err(Error::Parse(format!(
                    "n_products must be a nonnegative integer, got {v}"
                )))
            }
        })
        .collect::<Result<Vec<u64>>>()?;
    let kernel = KernelTable::new(
        h.parse_value("component")?,
        h.parse_value("dt")?,
        table.rows.iter().map(|r| r[1]).collect(),
        table.rows.iter().map(|r| r[2]).collect(),
        n_products,
        meta,
    )?;
    Ok((table.header, kernel))
}

//! Result tables, CSV round-trips and SVG plots.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::Scenario;

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub n: usize,
    pub replica: usize,
    pub values: Vec<f64>,
}

/// One row per `(n, replica)`, metrics in the scenario's column order.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub scenario: Scenario,
    pub rows: Vec<ResultRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Svg,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(Error::input(format!("unknown output format `{other}`"))),
        }
    }
}

impl ResultTable {
    pub fn new(scenario: Scenario) -> Self {
        ResultTable { scenario, rows: Vec::new() }
    }

    pub fn columns(&self) -> &'static [&'static str] {
        self.scenario.columns()
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns()
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::input(format!("no column `{name}` in {}", self.scenario)))
    }

    /// Mean of every metric per sample size, summing rows in table order.
    pub fn aggregates(&self) -> Vec<(usize, Vec<f64>)> {
        let mut out: Vec<(usize, Vec<f64>, usize)> = Vec::new();
        for row in &self.rows {
            match out.iter_mut().find(|(n, _, _)| *n == row.n) {
                Some((_, sums, count)) => {
                    for (s, v) in sums.iter_mut().zip(&row.values) {
                        *s += v;
                    }
                    *count += 1;
                }
                None => out.push((row.n, row.values.clone(), 1)),
            }
        }
        out.into_iter()
            .map(|(n, sums, count)| (n, sums.into_iter().map(|s| s / count as f64).collect()))
            .collect()
    }

    /// Per-`n` mean of one metric.
    pub fn means(&self, name: &str) -> Result<Vec<(usize, f64)>> {
        let k = self.column(name)?;
        Ok(self.aggregates().into_iter().map(|(n, v)| (n, v[k])).collect())
    }

    /// Rows, then one `mean` row per sample size.
    pub fn to_csv(&self) -> Result<String> {
        if self.rows.is_empty() {
            return Err(Error::input("refusing to write an empty result table"));
        }
        let mut out = String::new();
        out.push_str("n,replica");
        for c in self.columns() {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        let mut line = |n: usize, replica: &str, values: &[f64]| {
            let _ = write!(out, "{n},{replica}");
            for v in values {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        };
        for row in &self.rows {
            line(row.n, &row.replica.to_string(), &row.values);
        }
        for (n, means) in self.aggregates() {
            line(n, "mean", &means);
        }
        Ok(out)
    }

    /// Inverse of [`ResultTable::to_csv`]; `mean` rows are checked against the data.
    pub fn parse_csv(text: &str) -> Result<ResultTable> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::input("empty CSV"))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 2 || cols[0] != "n" || cols[1] != "replica" {
            return Err(Error::input("CSV header must start with n,replica"));
        }
        let scenario = Scenario::from_columns(&cols[2..])?;
        let mut table = ResultTable::new(scenario);
        let mut stated = Vec::new();
        for (k, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols.len() {
                return Err(Error::input(format!("CSV line {} has {} fields", k + 2, fields.len())));
            }
            let n = fields[0]
                .parse::<usize>()
                .map_err(|_| Error::input(format!("bad n `{}` on line {}", fields[0], k + 2)))?;
            let values = fields[2..]
                .iter()
                .map(|f| f.parse::<f64>().map_err(|_| Error::input(format!("bad value `{f}` on line {}", k + 2))))
                .collect::<Result<Vec<_>>>()?;
            if fields[1] == "mean" {
                stated.push((n, values));
                continue;
            }
            let replica = fields[1]
                .parse::<usize>()
                .map_err(|_| Error::input(format!("bad replica `{}` on line {}", fields[1], k + 2)))?;
            table.rows.push(ResultRow { n, replica, values });
        }
        let recomputed = table.aggregates();
        let same = stated.len() == recomputed.len()
            && stated.iter().zip(&recomputed).all(|(a, b)| {
                a.0 == b.0 && a.1.iter().zip(&b.1).all(|(x, y)| x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()))
            });
        if !same {
            return Err(Error::input("mean rows do not match the replica rows"));
        }
        Ok(table)
    }

    /// Line plot of the per-`n` mean of every metric.
    pub fn to_svg(&self) -> Result<String> {
        if self.rows.is_empty() {
            return Err(Error::input("refusing to plot an empty result table"));
        }
        let agg = self.aggregates();
        let (w, h, pad) = (640.0, 400.0, 50.0);
        let xs: Vec<f64> = agg.iter().map(|(n, _)| *n as f64).collect();
        let finite = agg.iter().flat_map(|(_, v)| v.iter().copied()).filter(|v| v.is_finite());
        let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            lo = 0.0;
            hi = 1.0;
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let (x0, x1) = (xs[0], *xs.last().unwrap());
        let sx = |x: f64| if x1 > x0 { pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad) } else { w / 2.0 };
        let sy = |y: f64| h - pad - (y - lo) / (hi - lo) * (h - 2.0 * pad);
        let palette = ["#000000", "#555555", "#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
        let mut svg = String::new();
        let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
        let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<line x1="{pad}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{pad}" y1="{pad}" x2="{pad}" y2="{b}" stroke="black"/>"#,
            b = h - pad,
            r = w - pad
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">n</text>"#, w / 2.0, h - 10.0);
        let _ = writeln!(svg, r#"<text x="{}" y="20" font-size="12" text-anchor="middle">{}</text>"#, w / 2.0, self.scenario);
        for (x, label) in [(x0, x0), (x1, x1)] {
            let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="10" text-anchor="middle">{label}</text>"#, sx(x), h - pad + 15.0);
        }
        for y in [lo, hi] {
            let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{y:.4}</text>"#, pad - 4.0, sy(y) + 3.0);
        }
        for (k, name) in self.columns().iter().enumerate() {
            let color = palette[k % palette.len()];
            let points: Vec<String> = agg
                .iter()
                .filter(|(_, v)| v[k].is_finite())
                .map(|(n, v)| format!("{:.2},{:.2}", sx(*n as f64), sy(v[k])))
                .collect();
            let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, points.join(" "));
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" font-size="10" fill="{color}">{name}</text>"#,
                w - pad - 150.0,
                pad + 14.0 * k as f64
            );
        }
        svg.push_str("</svg>\n");
        Ok(svg)
    }

    pub fn emit(&self, format: OutputFormat, path: &Path) -> Result<()> {
        let body = match format {
            OutputFormat::Csv => self.to_csv()?,
            OutputFormat::Svg => self.to_svg()?,
        };
        std::fs::write(path, body).map_err(|e| Error::io(path, e))
    }
}

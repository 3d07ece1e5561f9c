//! Text documents for surfaces, fields, measures and planar curves.
//!
//! Surfaces, fields and measures share one layout: a `format <kind>` line, a `version` line,
//! `key value...` header lines, a `data` line, then one whitespace-separated row per node or
//! box. Floats are written with Rust's shortest round-trip formatting, so `load(save(x))`
//! reproduces every stored value bitwise. Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::config::Tolerances;
use crate::defect::MeasureGrid;
use crate::error::{Error, Result};
use crate::geometry::Immersion;
use crate::grid::{Field, GridChart};
use crate::zoo::PlanarCurve;

/// Current document version. Version 1.0 surfaces carried neither `name` nor
/// `conformal_claim`; they load with defaults and a warning.
pub const VERSION: (u32, u32) = (1, 1);

const SURFACE: &str = "isolab-surface";
const FIELD: &str = "isolab-field";
const MEASURE: &str = "isolab-measure";

fn schema(path: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        msg: msg.into(),
    }
}

struct Document {
    header: BTreeMap<String, Vec<String>>,
    rows: Vec<(usize, Vec<String>)>,
    minor: u32,
}

impl Document {
    fn parse(text: &str, kind: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut header = BTreeMap::new();
        let mut in_data = false;
        let mut rows = Vec::new();
        for (no, line) in lines.by_ref() {
            if in_data {
                rows.push((no, line.split_whitespace().map(str::to_owned).collect()));
                continue;
            }
            if line == "data" {
                in_data = true;
                continue;
            }
            let mut it = line.split_whitespace();
            let key = it.next().unwrap_or_default().to_owned();
            header.insert(key, it.map(str::to_owned).collect());
        }
        let mut doc = Self { header, rows, minor: 0 };
        match doc.header.get("format").map(|v| v.join(" ")) {
            Some(f) if f == kind => {}
            Some(f) => return Err(schema("format", format!("expected `{kind}`, found `{f}`"))),
            None => return Err(schema("format", "missing field")),
        }
        let version = doc.one("version")?;
        let (major, minor) = version
            .split_once('.')
            .and_then(|(a, b)| Some((a.parse::<u32>().ok()?, b.parse::<u32>().ok()?)))
            .ok_or_else(|| schema("version", format!("`{version}` is not MAJOR.MINOR")))?;
        if major != VERSION.0 {
            return Err(schema("version", format!("unsupported major version {major}")));
        }
        if minor != VERSION.1 {
            log::warn!(
                "{kind}: document version {version} differs from {}.{}",
                VERSION.0,
                VERSION.1
            );
        }
        doc.minor = minor;
        if !in_data {
            return Err(schema("data", "missing field"));
        }
        Ok(doc)
    }

    fn values(&self, key: &str, count: usize) -> Result<&[String]> {
        let v = self.header.get(key).ok_or_else(|| schema(key, "missing field"))?;
        if v.len() != count {
            return Err(schema(key, format!("expected {count} values, found {}", v.len())));
        }
        Ok(v)
    }

    fn one(&self, key: &str) -> Result<String> {
        Ok(self.values(key, 1)?[0].clone())
    }

    fn parse_one<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let s = self.one(key)?;
        s.parse().map_err(|_| schema(key, format!("cannot parse `{s}`")))
    }

    fn range(&self, key: &str) -> Result<(f64, f64)> {
        let v = self.values(key, 2)?;
        let p = |s: &String| s.parse::<f64>().map_err(|_| schema(key, format!("cannot parse `{s}`")));
        Ok((p(&v[0])?, p(&v[1])?))
    }

    /// Rows as floats, each with exactly `width` columns, `count` rows in total.
    fn table(&self, count: usize, width: usize) -> Result<Vec<Vec<f64>>> {
        if self.rows.len() != count {
            return Err(schema(
                format!("data[{}]", self.rows.len().min(count)),
                format!("expected {count} rows, found {}", self.rows.len()),
            ));
        }
        self.rows
            .iter()
            .enumerate()
            .map(|(k, (no, cols))| {
                if cols.len() != width {
                    return Err(schema(
                        format!("data[{k}]"),
                        format!("line {no}: expected {width} columns, found {}", cols.len()),
                    ));
                }
                cols.iter()
                    .map(|c| {
                        c.parse::<f64>()
                            .map_err(|_| schema(format!("data[{k}]"), format!("line {no}: `{c}`")))
                    })
                    .collect()
            })
            .collect()
    }

    fn chart(&self) -> Result<GridChart> {
        let chart = GridChart {
            x1_range: self.range("x1_range")?,
            x2_range: self.range("x2_range")?,
            n1: self.parse_one("n1")?,
            n2: self.parse_one("n2")?,
            periodic1: self.parse_one("periodic1")?,
            periodic2: self.parse_one("periodic2")?,
        };
        chart.validate().map_err(|e| schema("n1", e.to_string()))?;
        Ok(chart)
    }
}

fn header(out: &mut String, kind: &str) {
    let _ = writeln!(out, "format {kind}");
    let _ = writeln!(out, "version {}.{}", VERSION.0, VERSION.1);
}

fn chart_header(out: &mut String, c: &GridChart) {
    let _ = writeln!(out, "n1 {}", c.n1);
    let _ = writeln!(out, "n2 {}", c.n2);
    let _ = writeln!(out, "x1_range {} {}", c.x1_range.0, c.x1_range.1);
    let _ = writeln!(out, "x2_range {} {}", c.x2_range.0, c.x2_range.1);
    let _ = writeln!(out, "periodic1 {}", c.periodic1);
    let _ = writeln!(out, "periodic2 {}", c.periodic2);
}

fn row(out: &mut String, vals: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in vals {
        if !first {
            out.push(' ');
        }
        let _ = write!(out, "{v}");
        first = false;
    }
    out.push('\n');
}

/// Surface document: chart, `m`, name, certified conformality, then one `m`-vector per node in
/// row-major order.
pub fn surface_to_string(im: &Immersion) -> String {
    let mut out = String::new();
    header(&mut out, SURFACE);
    let name = im.name.split_whitespace().collect::<Vec<_>>().join("_");
    let _ = writeln!(out, "name {}", if name.is_empty() { "unnamed" } else { &name });
    let _ = writeln!(out, "m {}", im.m);
    chart_header(&mut out, &im.phi.chart);
    let _ = writeln!(out, "conformal_claim {}", im.conformal_claim);
    out.push_str("data\n");
    for p in im.phi.data.chunks(im.m) {
        row(&mut out, p.iter().copied());
    }
    out
}

pub fn surface_from_str(text: &str) -> Result<Immersion> {
    let doc = Document::parse(text, SURFACE)?;
    let chart = doc.chart()?;
    let m: usize = doc.parse_one("m")?;
    let (name, claim) = if doc.minor == 0 {
        ("loaded".to_owned(), 0.0)
    } else {
        (doc.one("name")?, doc.parse_one("conformal_claim")?)
    };
    let data = doc.table(chart.len(), m)?.concat();
    let phi = Field::from_data(chart, m, data)?;
    Immersion::new(name, phi, claim).map_err(|e| schema("m", e.to_string()))
}

/// Field table: `index x1 x2 value...` per node.
pub fn field_to_string(f: &Field) -> String {
    let mut out = String::new();
    header(&mut out, FIELD);
    chart_header(&mut out, &f.chart);
    let _ = writeln!(out, "comps {}", f.comps);
    out.push_str("# index x1 x2 values\ndata\n");
    let c = f.chart;
    for i1 in 0..c.n1 {
        for i2 in 0..c.n2 {
            let idx = c.index(i1, i2) as f64;
            row(
                &mut out,
                [idx, c.x1(i1), c.x2(i2)]
                    .into_iter()
                    .chain(f.at(i1, i2).iter().copied()),
            );
        }
    }
    out
}

pub fn field_from_str(text: &str) -> Result<Field> {
    let doc = Document::parse(text, FIELD)?;
    let chart = doc.chart()?;
    let comps: usize = doc.parse_one("comps")?;
    let rows = doc.table(chart.len(), 3 + comps)?;
    for (k, r) in rows.iter().enumerate() {
        if r[0] != k as f64 {
            return Err(schema(
                format!("data[{k}]"),
                format!("node index {} out of order", r[0]),
            ));
        }
    }
    let data = rows.into_iter().flat_map(|r| r.into_iter().skip(3)).collect();
    Field::from_data(chart, comps, data)
}

/// Measure table: `i j x1_center x2_center mass` per box.
pub fn measure_to_string(m: &MeasureGrid) -> String {
    let mut out = String::new();
    header(&mut out, MEASURE);
    let _ = writeln!(out, "b1 {}", m.b1);
    let _ = writeln!(out, "b2 {}", m.b2);
    let _ = writeln!(out, "x1_range {} {}", m.x1_range.0, m.x1_range.1);
    let _ = writeln!(out, "x2_range {} {}", m.x2_range.0, m.x2_range.1);
    out.push_str("# i j x1_center x2_center mass\ndata\n");
    for i in 0..m.b1 {
        for j in 0..m.b2 {
            let (x, y) = m.center(i, j);
            row(&mut out, [i as f64, j as f64, x, y, m.at(i, j)]);
        }
    }
    out
}

pub fn measure_from_str(text: &str) -> Result<MeasureGrid> {
    let doc = Document::parse(text, MEASURE)?;
    let mut m = MeasureGrid::zeros(
        doc.range("x1_range")?,
        doc.range("x2_range")?,
        doc.parse_one("b1")?,
        doc.parse_one("b2")?,
    )
    .map_err(|e| schema("b1", e.to_string()))?;
    let rows = doc.table(m.b1 * m.b2, 5)?;
    m.mass = rows.into_iter().map(|r| r[4]).collect();
    Ok(m)
}

/// Two-column `r z` samples, arclength implicit in the row index. With `resample`, the samples
/// are first reparametrized to that many unit-speed knots.
pub fn curve_from_str(text: &str, closed: bool, resample: Option<usize>, tol: &Tolerances) -> Result<PlanarCurve> {
    let (mut r, mut z) = (Vec::new(), Vec::new());
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        let parsed: Option<Vec<f64>> = cols.iter().map(|c| c.parse().ok()).collect();
        match parsed.as_deref() {
            Some([a, b]) => {
                r.push(*a);
                z.push(*b);
            }
            _ => {
                return Err(schema(
                    format!("line {}", k + 1),
                    format!("expected two numbers, found `{line}`"),
                ))
            }
        }
    }
    match resample {
        Some(n) => PlanarCurve::reparametrize(&r, &z, closed, n, tol),
        None => PlanarCurve::from_samples(r, z, closed, tol),
    }
}

pub fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(std::fs::write(path, text)?)
}

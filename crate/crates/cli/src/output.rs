//! Result files and their readers.
//!
//! CSV tables start with `#` comment lines giving the unit convention, the
//! unit and the type of every column, followed by a mandatory header row.
//! JSON documents carry a top-level `units` entry and SVG files a `<desc>`.
//! Each file is read back with the readers below right after it is written.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Unit statement written into every numeric file.
pub const UNITS: &str =
    "natural units: hbar = 1, 2M = 1; energy k^2, lengths in cavity coordinates";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Int,
    Float,
    Text,
}

impl ColumnType {
    fn name(self) -> &'static str {
        match self {
            Self::Int => "int",
            Self::Float => "float",
            Self::Text => "text",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "int" => Some(Self::Int),
            "float" => Some(Self::Float),
            "text" => Some(Self::Text),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub ty: ColumnType,
    pub unit: String,
}

impl Column {
    pub fn new(name: &str, ty: ColumnType, unit: &str) -> Self {
        Self {
            name: name.into(),
            ty,
            unit: unit.into(),
        }
    }

    pub fn float(name: &str, unit: &str) -> Self {
        Self::new(name, ColumnType::Float, unit)
    }

    pub fn int(name: &str) -> Self {
        Self::new(name, ColumnType::Int, "1")
    }

    pub fn text(name: &str) -> Self {
        Self::new(name, ColumnType::Text, "-")
    }
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Self::Int(v) => v.to_string(),
            // shortest representation that parses back to the same bits
            Self::Float(v) => format!("{v:?}"),
            Self::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Self::Int(v) => Some(*v as f64),
            Self::Float(v) => Some(*v),
            Self::Text(_) => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Self::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Self::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Self::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Self::Int(v.into())
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Self::Int(v.into())
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Self::Text(v)
    }
}

/// A typed table with its header comments.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Free comment lines (without the leading `#`).
    pub comments: Vec<String>,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(title: &str, columns: Vec<Column>) -> Self {
        Self {
            comments: vec![title.to_string()],
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// All values of a numeric column.
    pub fn floats(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column(name)?;
        self.rows.iter().map(|r| r[i].as_f64()).collect()
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut head = String::new();
        for c in &self.comments {
            head.push_str(&format!("# {c}\n"));
        }
        head.push_str(&format!("# units: {UNITS}\n"));
        let spec = |f: &dyn Fn(&Column) -> String| {
            self.columns.iter().map(f).collect::<Vec<_>>().join(",")
        };
        head.push_str(&format!(
            "# column-units: {}\n",
            spec(&|c| format!("{}={}", c.name, c.unit))
        ));
        head.push_str(&format!(
            "# column-types: {}\n",
            spec(&|c| format!("{}={}", c.name, c.ty.name()))
        ));
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(head.into_bytes());
        let err = |e: csv::Error| CliError::numerical(format!("csv encoding: {e}"));
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))
            .map_err(err)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).map_err(err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::numerical(format!("csv encoding: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Parses a table written by [`Table::to_csv`].
    pub fn from_csv(text: &str) -> CliResult<Self> {
        let bad = |msg: String| CliError::domain(format!("malformed table: {msg}"));
        let mut comments = Vec::new();
        let mut units = BTreeMap::new();
        let mut types = BTreeMap::new();
        let mut saw_units = false;
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let body = line.trim_start_matches('#').trim_start();
            let pairs = |s: &str| -> BTreeMap<String, String> {
                s.split(',')
                    .filter_map(|kv| kv.split_once('='))
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect()
            };
            if let Some(rest) = body.strip_prefix("column-units: ") {
                units = pairs(rest);
            } else if let Some(rest) = body.strip_prefix("column-types: ") {
                types = pairs(rest);
            } else if body.starts_with("units: ") {
                saw_units = true;
            } else {
                comments.push(body.to_string());
            }
        }
        if !saw_units {
            return Err(bad("no units declaration".into()));
        }
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .has_headers(true)
            .from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
        let mut columns = Vec::with_capacity(headers.len());
        for h in headers.iter() {
            let ty = types
                .get(h)
                .and_then(|t| ColumnType::parse(t))
                .ok_or_else(|| bad(format!("column {h} has no type")))?;
            let unit = units
                .get(h)
                .cloned()
                .ok_or_else(|| bad(format!("column {h} has no unit")))?;
            columns.push(Column {
                name: h.to_string(),
                ty,
                unit,
            });
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let row = rec
                .iter()
                .zip(&columns)
                .map(|(v, c)| match c.ty {
                    ColumnType::Int => v
                        .parse()
                        .map(Cell::Int)
                        .map_err(|_| bad(format!("{}: '{v}' is not an int", c.name))),
                    ColumnType::Float => v
                        .parse()
                        .map(Cell::Float)
                        .map_err(|_| bad(format!("{}: '{v}' is not a float", c.name))),
                    ColumnType::Text => Ok(Cell::Text(v.to_string())),
                })
                .collect::<CliResult<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self {
            comments,
            columns,
            rows,
        })
    }
}

/// Table equality that treats NaN cells as equal.
fn same_table(a: &Table, b: &Table) -> bool {
    let same = |x: &Cell, y: &Cell| match (x, y) {
        (Cell::Float(p), Cell::Float(q)) => {
            p.to_bits() == q.to_bits() || (p.is_nan() && q.is_nan())
        }
        _ => x == y,
    };
    a.comments == b.comments
        && a.columns == b.columns
        && a.rows.len() == b.rows.len()
        && a.rows
            .iter()
            .zip(&b.rows)
            .all(|(r, s)| r.len() == s.len() && r.iter().zip(s).all(|(x, y)| same(x, y)))
}

/// A float for JSON; non-finite values become the strings `"NaN"`, `"inf"`, `"-inf"`.
pub fn float_json(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::from("NaN")
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

/// A simple SVG of polylines in data coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Svg {
    pub title: String,
    pub lines: Vec<Polyline>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub class: String,
    pub stroke: &'static str,
    pub points: Vec<(f64, f64)>,
}

impl Svg {
    pub fn new(title: &str) -> Self {
        Self {
            title: title.into(),
            lines: Vec::new(),
        }
    }

    pub fn add(&mut self, class: &str, stroke: &'static str, points: Vec<(f64, f64)>) {
        let points: Vec<_> = points
            .into_iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        if points.len() >= 2 {
            self.lines.push(Polyline {
                class: class.into(),
                stroke,
                points,
            });
        }
    }

    pub fn render(&self) -> String {
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for (x, y) in self.lines.iter().flat_map(|l| l.points.iter()) {
            x0 = x0.min(*x);
            x1 = x1.max(*x);
            y0 = y0.min(*y);
            y1 = y1.max(*y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let pad = 0.02 * (x1 - x0).max(y1 - y0).max(1e-12);
        let (w, h) = (x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
        let stroke_width = 0.002 * w.max(h);
        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:?} {:?} {:?} {:?}\" width=\"600\" height=\"{:.0}\">\n",
            x0 - pad,
            -(y1 + pad),
            w,
            h,
            600.0 * h / w
        ));
        out.push_str(&format!("<title>{}</title>\n", escape(&self.title)));
        out.push_str(&format!(
            "<desc>{}; y axis points up</desc>\n",
            escape(UNITS)
        ));
        // data y grows upward; flip once for the whole drawing
        out.push_str("<g transform=\"scale(1,-1)\">\n");
        for l in &self.lines {
            let pts: Vec<String> = l
                .points
                .iter()
                .map(|(x, y)| format!("{x:?},{y:?}"))
                .collect();
            out.push_str(&format!(
                "<polyline class=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{stroke_width:?}\" points=\"{}\"/>\n",
                escape(&l.class),
                l.stroke,
                pts.join(" ")
            ));
        }
        out.push_str("</g>\n</svg>\n");
        out
    }

    /// Reads the polylines of an SVG written by [`Svg::render`].
    pub fn parse(text: &str) -> CliResult<Self> {
        let bad = |msg: &str| CliError::domain(format!("malformed svg: {msg}"));
        if !text.contains("<desc>") {
            return Err(bad("no units description"));
        }
        let title = between(text, "<title>", "</title>")
            .map(unescape)
            .unwrap_or_default();
        let mut lines = Vec::new();
        for chunk in text.split("<polyline").skip(1) {
            let class = between(chunk, "class=\"", "\"")
                .map(unescape)
                .ok_or_else(|| bad("polyline without class"))?;
            let stroke =
                between(chunk, "stroke=\"", "\"").ok_or_else(|| bad("polyline without stroke"))?;
            let stroke = STROKES
                .iter()
                .copied()
                .find(|s| *s == stroke)
                .ok_or_else(|| bad("unknown stroke"))?;
            let raw =
                between(chunk, "points=\"", "\"").ok_or_else(|| bad("polyline without points"))?;
            let points = raw
                .split_whitespace()
                .map(|p| {
                    let (x, y) = p
                        .split_once(',')
                        .ok_or_else(|| bad("point without comma"))?;
                    Ok((
                        x.parse().map_err(|_| bad("bad x"))?,
                        y.parse().map_err(|_| bad("bad y"))?,
                    ))
                })
                .collect::<CliResult<Vec<(f64, f64)>>>()?;
            lines.push(Polyline {
                class,
                stroke,
                points,
            });
        }
        Ok(Self { title, lines })
    }
}

/// Colours used by the figures.
pub const STROKES: [&str; 6] = ["black", "red", "blue", "green", "gray", "orange"];

fn between<'a>(s: &'a str, open: &str, close: &str) -> Option<&'a str> {
    let start = s.find(open)? + open.len();
    let len = s[start..].find(close)?;
    Some(&s[start..start + len])
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn unescape(s: &str) -> String {
    s.replace("&quot;", "\"")
        .replace("&gt;", ">")
        .replace("&lt;", "<")
        .replace("&amp;", "&")
}

/// Collects the files of one run in a directory.
#[derive(Debug)]
pub struct Bundle {
    dir: PathBuf,
    files: Vec<String>,
}

impl Bundle {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// File names written so far, in writing order.
    pub fn files(&self) -> &[String] {
        &self.files
    }

    fn write(&mut self, name: &str, text: &str) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(path)
    }

    fn reread(path: &Path) -> CliResult<String> {
        fs::read_to_string(path).map_err(|e| CliError::io(path, e))
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> CliResult<()> {
        let path = self.write(name, &table.to_csv()?)?;
        let back = Table::from_csv(&Self::reread(&path)?)?;
        if !same_table(&back, table) {
            return Err(CliError::numerical(format!(
                "{name} does not read back identically"
            )));
        }
        Ok(())
    }

    /// Writes a JSON document with a `units` entry added at the top level.
    pub fn json(&mut self, name: &str, mut doc: Value) -> CliResult<()> {
        if let Value::Object(map) = &mut doc {
            map.insert("units".into(), Value::from(UNITS));
        }
        let text = serde_json::to_string_pretty(&doc).expect("json renders") + "\n";
        let path = self.write(name, &text)?;
        let back = read_json(&path)?;
        if back != doc {
            return Err(CliError::numerical(format!(
                "{name} does not read back identically"
            )));
        }
        Ok(())
    }

    pub fn svg(&mut self, name: &str, svg: &Svg) -> CliResult<()> {
        let path = self.write(name, &svg.render())?;
        let back = Svg::parse(&Self::reread(&path)?)?;
        if back.lines != svg.lines {
            return Err(CliError::numerical(format!(
                "{name} does not read back identically"
            )));
        }
        Ok(())
    }
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    Table::from_csv(&fs::read_to_string(path).map_err(|e| CliError::io(path, e))?)
}

pub fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::domain(format!("{}: {e}", path.display())))
}

pub fn read_svg(path: &Path) -> CliResult<Svg> {
    Svg::parse(&fs::read_to_string(path).map_err(|e| CliError::io(path, e))?)
}

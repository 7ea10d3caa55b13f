//! Corpus ingestion and canonical export.
//!
//! Columns (CSV/TSV header or JSONL keys): `id, year, citations,
//! country_tags, field_tag, funding_text`. `country_tags` is a
//! semicolon-separated list. Rows that fail validation become
//! [`Rejection`]s; a malformed header or a duplicate id aborts the load.
//!
//! The canonical form written by [`export`] uses the column order above,
//! upper-case country tags sorted and joined with `;`, `\n` line endings,
//! and quotes only where needed. Loading a canonical file and exporting it
//! again reproduces it byte for byte.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use epgauge_core::{Corpus, PaperRecord};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const COLUMNS: [&str; 6] = ["id", "year", "citations", "country_tags", "field_tag", "funding_text"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Tsv,
    Jsonl,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "tsv" => Ok(Format::Tsv),
            "jsonl" | "ndjson" => Ok(Format::Jsonl),
            other => Err(format!("unknown format `{other}` (expected csv, tsv or jsonl)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Tsv => "tsv",
            Format::Jsonl => "jsonl",
        })
    }
}

impl Format {
    /// Guesses from a file extension.
    pub fn from_path(path: &std::path::Path) -> Option<Self> {
        path.extension()?.to_str()?.parse().ok()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("malformed header: {0}")]
    Header(String),
    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: u64, id: String },
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Corpus(#[from] epgauge_core::Error),
}

/// A row that was skipped, with its 1-based physical line number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Inclusive publication-year window; rows outside are rejected.
    pub year_window: Option<(i32, i32)>,
}

#[derive(Debug)]
pub struct LoadOutcome {
    pub corpus: Corpus,
    pub rejections: Vec<Rejection>,
}

struct RawRow<'a> {
    id: &'a str,
    year: &'a str,
    citations: &'a str,
    country_tags: &'a str,
    field_tag: &'a str,
    funding_text: &'a str,
}

fn parse_citations(s: &str) -> Result<u64, String> {
    let t = s.trim();
    match t.parse::<i128>() {
        Ok(v) if v < 0 => Err(format!("negative citations `{t}`")),
        Ok(v) => u64::try_from(v).map_err(|_| format!("citations `{t}` out of range")),
        Err(_) => Err(format!("non-integer citations `{t}`")),
    }
}

fn parse_year(s: &str, opts: &LoadOptions) -> Result<i32, String> {
    let t = s.trim();
    let year = t.parse::<i32>().map_err(|_| format!("non-integer year `{t}`"))?;
    if let Some((min, max)) = opts.year_window {
        if year < min || year > max {
            return Err(format!("year {year} outside window {min}..={max}"));
        }
    }
    Ok(year)
}

fn build_record(raw: RawRow<'_>, opts: &LoadOptions) -> Result<PaperRecord, String> {
    let id = raw.id.trim();
    if id.is_empty() {
        return Err("empty id".into());
    }
    let year = parse_year(raw.year, opts)?;
    let citations = parse_citations(raw.citations)?;
    let field = raw.field_tag.trim();
    if field.is_empty() {
        return Err("empty field_tag".into());
    }
    Ok(PaperRecord::new(id, year, citations, raw.country_tags.split(';'), field, raw.funding_text))
}

/// Accumulates records, rejecting rows and catching duplicate ids.
struct Collector {
    records: Vec<PaperRecord>,
    rejections: Vec<Rejection>,
    seen: HashMap<String, u64>,
}

impl Collector {
    fn new() -> Self {
        Self { records: Vec::new(), rejections: Vec::new(), seen: HashMap::new() }
    }

    fn reject(&mut self, line: u64, reason: impl Into<String>) {
        self.rejections.push(Rejection { line, reason: reason.into() });
    }

    fn push(&mut self, line: u64, row: Result<PaperRecord, String>) -> Result<(), IngestError> {
        match row {
            Ok(r) => {
                if self.seen.insert(r.id.clone(), line).is_some() {
                    return Err(IngestError::DuplicateId { line, id: r.id });
                }
                self.records.push(r);
            }
            Err(reason) => self.reject(line, reason),
        }
        Ok(())
    }

    fn finish(self) -> Result<LoadOutcome, IngestError> {
        Ok(LoadOutcome { corpus: Corpus::new(self.records)?, rejections: self.rejections })
    }
}

/// Reads a corpus in the given format.
pub fn load_records<R: Read>(source: R, format: Format, opts: &LoadOptions) -> Result<LoadOutcome, IngestError> {
    match format {
        Format::Csv => load_delimited(source, b',', opts),
        Format::Tsv => load_delimited(source, b'\t', opts),
        Format::Jsonl => load_jsonl(source, opts),
    }
}

fn column_map(header: &csv::StringRecord) -> Result<[usize; 6], IngestError> {
    let mut idx = [usize::MAX; 6];
    for (pos, name) in header.iter().enumerate() {
        let name = name.trim().trim_start_matches('\u{feff}');
        match COLUMNS.iter().position(|c| *c == name) {
            Some(c) if idx[c] != usize::MAX => {
                return Err(IngestError::Header(format!("column `{name}` appears twice")));
            }
            Some(c) => idx[c] = pos,
            None => return Err(IngestError::Header(format!("unknown column `{name}`"))),
        }
    }
    if let Some(c) = idx.iter().position(|&i| i == usize::MAX) {
        return Err(IngestError::Header(format!("missing column `{}`", COLUMNS[c])));
    }
    Ok(idx)
}

fn load_delimited<R: Read>(source: R, delimiter: u8, opts: &LoadOptions) -> Result<LoadOutcome, IngestError> {
    let mut reader =
        csv::ReaderBuilder::new().delimiter(delimiter).flexible(true).has_headers(true).from_reader(source);
    let header = match reader.headers() {
        Ok(h) => h.clone(),
        Err(e) if matches!(e.kind(), csv::ErrorKind::Utf8 { .. }) => {
            return Err(IngestError::Header("header is not valid UTF-8".into()));
        }
        Err(e) => return Err(e.into()),
    };
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(IngestError::Header("empty header".into()));
    }
    let idx = column_map(&header)?;
    let mut out = Collector::new();
    let mut record = csv::StringRecord::new();
    loop {
        let line = reader.position().line();
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(line, |p| p.line());
                if record.len() != COLUMNS.len() {
                    out.reject(line, format!("expected {} fields, found {}", COLUMNS.len(), record.len()));
                    continue;
                }
                let raw = RawRow {
                    id: &record[idx[0]],
                    year: &record[idx[1]],
                    citations: &record[idx[2]],
                    country_tags: &record[idx[3]],
                    field_tag: &record[idx[4]],
                    funding_text: &record[idx[5]],
                };
                let row = build_record(raw, opts);
                out.push(line, row)?;
            }
            Err(e) => match e.kind() {
                csv::ErrorKind::Utf8 { pos, .. } => {
                    let line = pos.as_ref().map_or(line, |p| p.line());
                    out.reject(line, "row is not valid UTF-8");
                }
                _ => return Err(e.into()),
            },
        }
    }
    out.finish()
}

fn json_str<'a>(obj: &'a serde_json::Map<String, Value>, key: &str) -> Result<&'a str, String> {
    match obj.get(key) {
        Some(Value::String(s)) => Ok(s),
        Some(Value::Null) if key == "funding_text" || key == "country_tags" => Ok(""),
        Some(_) => Err(format!("`{key}` must be a string")),
        None => Err(format!("missing key `{key}`")),
    }
}

fn json_number_text(obj: &serde_json::Map<String, Value>, key: &str) -> Result<String, String> {
    match obj.get(key) {
        Some(Value::Number(n)) => Ok(n.to_string()),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(format!("`{key}` must be a number")),
        None => Err(format!("missing key `{key}`")),
    }
}

fn json_row(line: &str, opts: &LoadOptions) -> Result<PaperRecord, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
    let obj = value.as_object().ok_or("line is not a JSON object")?;
    if let Some(k) = obj.keys().find(|k| !COLUMNS.contains(&k.as_str())) {
        return Err(format!("unknown key `{k}`"));
    }
    let tags = match obj.get("country_tags") {
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| v.as_str().map(str::to_owned).ok_or("`country_tags` entries must be strings"))
            .collect::<Result<Vec<_>, _>>()?
            .join(";"),
        _ => json_str(obj, "country_tags")?.to_owned(),
    };
    let year = json_number_text(obj, "year")?;
    let citations = json_number_text(obj, "citations")?;
    build_record(
        RawRow {
            id: json_str(obj, "id")?,
            year: &year,
            citations: &citations,
            country_tags: &tags,
            field_tag: json_str(obj, "field_tag")?,
            funding_text: json_str(obj, "funding_text")?,
        },
        opts,
    )
}

fn load_jsonl<R: Read>(source: R, opts: &LoadOptions) -> Result<LoadOutcome, IngestError> {
    let mut out = Collector::new();
    let mut reader = BufReader::new(source);
    let mut buf = Vec::new();
    let mut line_no = 0u64;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let Ok(text) = std::str::from_utf8(&buf) else {
            out.reject(line_no, "row is not valid UTF-8");
            continue;
        };
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        let row = json_row(text, opts);
        out.push(line_no, row)?;
    }
    out.finish()
}

fn joined_tags(r: &PaperRecord) -> String {
    r.country_tags.iter().map(String::as_str).collect::<Vec<_>>().join(";")
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    id: &'a str,
    year: i32,
    citations: u64,
    country_tags: String,
    field_tag: &'a str,
    funding_text: &'a str,
}

/// Writes records in canonical form.
pub fn export<'a, W, I>(records: I, format: Format, sink: W) -> Result<(), IngestError>
where
    W: Write,
    I: IntoIterator<Item = &'a PaperRecord>,
{
    match format {
        Format::Csv | Format::Tsv => {
            let delimiter = if format == Format::Csv { b',' } else { b'\t' };
            let mut w = csv::WriterBuilder::new()
                .delimiter(delimiter)
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(sink);
            w.write_record(COLUMNS)?;
            for r in records {
                let year = r.year.to_string();
                let citations = r.citations.to_string();
                let tags = joined_tags(r);
                w.write_record([r.id.as_str(), &year, &citations, &tags, &r.field_tag, &r.funding_text])?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            let mut w = std::io::BufWriter::new(sink);
            for r in records {
                let row = JsonRecord {
                    id: &r.id,
                    year: r.year,
                    citations: r.citations,
                    country_tags: joined_tags(r),
                    field_tag: &r.field_tag,
                    funding_text: &r.funding_text,
                };
                serde_json::to_writer(&mut w, &row).map_err(std::io::Error::from)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Rejections as JSONL: `{"line": N, "reason": "..."}` per line.
pub fn write_rejections<W: Write>(rejections: &[Rejection], mut sink: W) -> std::io::Result<()> {
    for r in rejections {
        serde_json::to_writer(&mut sink, r)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()
}

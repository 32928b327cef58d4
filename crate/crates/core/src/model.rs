//! Schema, records, queries and sources, plus their CSV loaders.
//!
//! Records, queries and ground truth live in flat CSV files sharing one
//! schema. Empty cells load as [`AttributeValue::Missing`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Text,
    Numeric,
}

impl AttributeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AttributeKind::Text => "text",
            AttributeKind::Numeric => "numeric",
        }
    }
}

impl std::str::FromStr for AttributeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "text" => Ok(AttributeKind::Text),
            "numeric" => Ok(AttributeKind::Numeric),
            other => Err(Error::InvalidArgument(format!(
                "unknown attribute kind `{other}` (expected text or numeric)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

/// Ordered attribute list shared by every record, query and truth tuple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    attributes: Vec<Attribute>,
}

impl Schema {
    pub fn new(attributes: Vec<Attribute>) -> Result<Self> {
        let mut seen = HashSet::new();
        for attr in &attributes {
            if attr.name.trim().is_empty() {
                return Err(Error::Validation("attribute name is empty".into()));
            }
            if RESERVED_COLUMNS.contains(&attr.name.as_str()) {
                return Err(Error::Validation(format!(
                    "attribute name `{}` collides with a reserved column",
                    attr.name
                )));
            }
            if !seen.insert(attr.name.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate attribute name `{}`",
                    attr.name
                )));
            }
        }
        if attributes.is_empty() {
            return Err(Error::Validation("schema has no attributes".into()));
        }
        Ok(Schema { attributes })
    }

    /// Builds a schema from `(name, kind)` pairs.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, AttributeKind)>) -> Result<Self> {
        Schema::new(
            pairs
                .into_iter()
                .map(|(name, kind)| Attribute {
                    name: name.to_string(),
                    kind,
                })
                .collect(),
        )
    }

    /// Parses the `name:kind` one-per-line schema format. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut attributes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, kind) = line.rsplit_once(':').ok_or_else(|| {
                Error::Validation(format!("schema line {}: expected `name:kind`", lineno + 1))
            })?;
            attributes.push(Attribute {
                name: name.trim().to_string(),
                kind: kind.parse()?,
            });
        }
        Schema::new(attributes)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Schema::parse(&text)
    }

    pub fn to_schema_text(&self) -> String {
        self.attributes
            .iter()
            .map(|a| format!("{}:{}\n", a.name, a.kind.as_str()))
            .collect()
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn kind(&self, index: usize) -> AttributeKind {
        self.attributes[index].kind
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().map(|a| a.name.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }
}

const RESERVED_COLUMNS: [&str; 4] = ["record_id", "source", "entity_id", "query_id"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub enum AttributeValue {
    Text(String),
    Number(f64),
    #[default]
    Missing,
}

impl AttributeValue {
    pub fn is_missing(&self) -> bool {
        matches!(self, AttributeValue::Missing)
    }

    pub fn is_present(&self) -> bool {
        !self.is_missing()
    }

    pub fn text(s: impl Into<String>) -> Self {
        AttributeValue::Text(s.into())
    }

    /// Parses one CSV cell for an attribute of the given kind.
    pub fn parse_cell(cell: &str, kind: AttributeKind) -> std::result::Result<Self, String> {
        if cell.trim().is_empty() {
            return Ok(AttributeValue::Missing);
        }
        match kind {
            AttributeKind::Text => Ok(AttributeValue::Text(cell.to_string())),
            AttributeKind::Numeric => match cell.trim().parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(AttributeValue::Number(x)),
                Ok(_) => Err(format!("non-finite number `{cell}`")),
                Err(_) => Err(format!("`{cell}` is not a number")),
            },
        }
    }

    /// CSV cell form; missing values render as the empty string.
    pub fn to_cell(&self) -> String {
        match self {
            AttributeValue::Text(s) => s.clone(),
            AttributeValue::Number(x) => format!("{x}"),
            AttributeValue::Missing => String::new(),
        }
    }

    /// Whether a present value agrees with `kind`. Missing matches every kind.
    pub fn conforms_to(&self, kind: AttributeKind) -> bool {
        match self {
            AttributeValue::Text(_) => kind == AttributeKind::Text,
            AttributeValue::Number(x) => kind == AttributeKind::Numeric && x.is_finite(),
            AttributeValue::Missing => true,
        }
    }
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeValue::Missing => f.write_str("NULL"),
            other => f.write_str(&other.to_cell()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub record_id: String,
    pub source_id: String,
    pub values: Vec<AttributeValue>,
    pub entity_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub query_id: String,
    pub values: Vec<AttributeValue>,
    pub entity_id: Option<String>,
}

impl Query {
    pub fn missing_slots(&self) -> usize {
        self.values.iter().filter(|v| v.is_missing()).count()
    }
}

/// A publisher of records. `members` holds indices into [`Dataset::records`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub source_id: String,
    pub record_ids: Vec<String>,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: Schema,
    pub records: Vec<Record>,
    pub sources: Vec<Source>,
    pub queries: Vec<Query>,
    pub truth: BTreeMap<String, Vec<AttributeValue>>,
}

impl Dataset {
    /// Groups records into sources in order of first appearance.
    pub fn from_records(schema: Schema, records: Vec<Record>) -> Result<Self> {
        let mut ids = HashSet::new();
        for r in &records {
            if !ids.insert(r.record_id.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate record_id `{}`",
                    r.record_id
                )));
            }
        }
        let sources = group_sources(&records);
        Ok(Dataset {
            schema,
            records,
            sources,
            queries: Vec::new(),
            truth: BTreeMap::new(),
        })
    }

    pub fn with_queries(mut self, queries: Vec<Query>) -> Self {
        self.queries = queries;
        self
    }

    pub fn with_truth(mut self, truth: BTreeMap<String, Vec<AttributeValue>>) -> Self {
        self.truth = truth;
        self
    }

    /// Recomputes `sources` after records were edited in place.
    pub fn regroup_sources(&mut self) {
        self.sources = group_sources(&self.records);
    }

    pub fn source_index(&self, source_id: &str) -> Option<usize> {
        self.sources.iter().position(|s| s.source_id == source_id)
    }

    /// Source index per record, aligned with `records`.
    pub fn record_source_indices(&self) -> Vec<usize> {
        let mut out = vec![usize::MAX; self.records.len()];
        for (si, source) in self.sources.iter().enumerate() {
            for &ri in &source.members {
                out[ri] = si;
            }
        }
        out
    }

    pub fn record_by_id(&self, record_id: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.record_id == record_id)
    }
}

fn group_sources(records: &[Record]) -> Vec<Source> {
    let mut order: Vec<Source> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (ri, r) in records.iter().enumerate() {
        let si = *index.entry(r.source_id.as_str()).or_insert_with(|| {
            order.push(Source {
                source_id: r.source_id.clone(),
                record_ids: Vec::new(),
                members: Vec::new(),
            });
            order.len() - 1
        });
        order[si].record_ids.push(r.record_id.clone());
        order[si].members.push(ri);
    }
    order
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

struct Columns {
    attrs: Vec<usize>,
    named: HashMap<&'static str, usize>,
}

fn map_columns(
    path: &Path,
    header: &csv::StringRecord,
    schema: &Schema,
    required: &[&'static str],
    optional: &[&'static str],
) -> Result<Columns> {
    let mut positions: HashMap<&str, usize> = HashMap::new();
    for (i, h) in header.iter().enumerate() {
        if positions.insert(h.trim(), i).is_some() {
            return Err(Error::parse(path, 1, format!("duplicate column `{h}`")));
        }
    }
    let mut named = HashMap::new();
    for &col in required {
        let pos = positions
            .get(col)
            .ok_or_else(|| Error::parse(path, 1, format!("missing `{col}` column")))?;
        named.insert(col, *pos);
    }
    for &col in optional {
        if let Some(pos) = positions.get(col) {
            named.insert(col, *pos);
        }
    }
    let mut attrs = Vec::with_capacity(schema.len());
    for name in schema.names() {
        let pos = positions
            .get(name)
            .ok_or_else(|| Error::parse(path, 1, format!("missing attribute column `{name}`")))?;
        attrs.push(*pos);
    }
    let expected = named.len() + attrs.len();
    if header.len() != expected {
        let known: HashSet<&str> = required
            .iter()
            .chain(optional)
            .copied()
            .chain(schema.names())
            .collect();
        let extra: Vec<&str> = header.iter().filter(|h| !known.contains(h.trim())).collect();
        return Err(Error::parse(
            path,
            1,
            format!("unexpected columns: {}", extra.join(", ")),
        ));
    }
    Ok(Columns { attrs, named })
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input)
}

fn parse_values(
    path: &Path,
    row: usize,
    fields: &csv::StringRecord,
    cols: &Columns,
    schema: &Schema,
) -> Result<Vec<AttributeValue>> {
    cols.attrs
        .iter()
        .zip(schema.attributes())
        .map(|(&pos, attr)| {
            AttributeValue::parse_cell(&fields[pos], attr.kind)
                .map_err(|m| Error::parse(path, row, format!("column `{}`: {m}", attr.name)))
        })
        .collect()
}

fn optional_cell(fields: &csv::StringRecord, pos: Option<&usize>) -> Option<String> {
    pos.map(|&p| fields[p].trim())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
}

fn rows<R: Read>(
    path: &Path,
    reader: &mut csv::Reader<R>,
    width: usize,
) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut out = Vec::new();
    for (i, result) in reader.records().enumerate() {
        let fields = result?;
        let row = fields.position().map(|p| p.line() as usize).unwrap_or(i + 2);
        if fields.len() != width {
            return Err(Error::parse(
                path,
                row,
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
        out.push((row, fields));
    }
    Ok(out)
}

/// Loads a records CSV (`record_id,source,entity_id,<attrs...>`).
pub fn load_dataset(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    read_records(path, open(path)?, schema)
}

pub fn read_records<R: Read>(path: &Path, input: R, schema: &Schema) -> Result<Dataset> {
    let mut reader = csv_reader(input);
    let header = reader.headers()?.clone();
    let cols = map_columns(path, &header, schema, &["record_id", "source"], &["entity_id"])?;
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (row, fields) in rows(path, &mut reader, header.len())? {
        let record_id = fields[cols.named["record_id"]].trim().to_string();
        if record_id.is_empty() {
            return Err(Error::parse(path, row, "blank record_id"));
        }
        let source_id = fields[cols.named["source"]].trim().to_string();
        if source_id.is_empty() {
            return Err(Error::parse(path, row, "blank source"));
        }
        if !seen.insert(record_id.clone()) {
            return Err(Error::Validation(format!(
                "{}: row {row}: duplicate record_id `{record_id}`",
                path.display()
            )));
        }
        records.push(Record {
            record_id,
            source_id,
            values: parse_values(path, row, &fields, &cols, schema)?,
            entity_id: optional_cell(&fields, cols.named.get("entity_id")),
        });
    }
    Dataset::from_records(schema.clone(), records)
}

/// Loads a queries CSV (`query_id,entity_id,<attrs...>`).
pub fn load_queries(path: impl AsRef<Path>, schema: &Schema) -> Result<Vec<Query>> {
    let path = path.as_ref();
    read_queries(path, open(path)?, schema)
}

pub fn read_queries<R: Read>(path: &Path, input: R, schema: &Schema) -> Result<Vec<Query>> {
    let mut reader = csv_reader(input);
    let header = reader.headers()?.clone();
    let cols = map_columns(path, &header, schema, &["query_id"], &["entity_id"])?;
    let mut queries = Vec::new();
    let mut seen = HashSet::new();
    for (row, fields) in rows(path, &mut reader, header.len())? {
        let query_id = fields[cols.named["query_id"]].trim().to_string();
        if query_id.is_empty() {
            return Err(Error::parse(path, row, "blank query_id"));
        }
        if !seen.insert(query_id.clone()) {
            return Err(Error::parse(path, row, format!("duplicate query_id `{query_id}`")));
        }
        let values = parse_values(path, row, &fields, &cols, schema)?;
        if values.iter().all(AttributeValue::is_missing) {
            return Err(Error::Validation(format!(
                "{}: row {row}: query `{query_id}` has no filled attribute",
                path.display()
            )));
        }
        queries.push(Query {
            query_id,
            values,
            entity_id: optional_cell(&fields, cols.named.get("entity_id")),
        });
    }
    Ok(queries)
}

/// Loads a ground-truth CSV (`query_id,<attrs...>`).
pub fn load_truth(
    path: impl AsRef<Path>,
    schema: &Schema,
) -> Result<BTreeMap<String, Vec<AttributeValue>>> {
    let path = path.as_ref();
    read_truth(path, open(path)?, schema)
}

pub fn read_truth<R: Read>(
    path: &Path,
    input: R,
    schema: &Schema,
) -> Result<BTreeMap<String, Vec<AttributeValue>>> {
    let mut reader = csv_reader(input);
    let header = reader.headers()?.clone();
    let cols = map_columns(path, &header, schema, &["query_id"], &[])?;
    let mut truth = BTreeMap::new();
    for (row, fields) in rows(path, &mut reader, header.len())? {
        let query_id = fields[cols.named["query_id"]].trim().to_string();
        if query_id.is_empty() {
            return Err(Error::parse(path, row, "blank query_id"));
        }
        let values = parse_values(path, row, &fields, &cols, schema)?;
        if truth.insert(query_id.clone(), values).is_some() {
            return Err(Error::parse(path, row, format!("duplicate query_id `{query_id}`")));
        }
    }
    Ok(truth)
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(out)
}

pub fn write_records<W: Write>(out: W, dataset: &Dataset) -> Result<()> {
    let mut w = csv_writer(out);
    let mut header = vec!["record_id", "source", "entity_id"];
    header.extend(dataset.schema.names());
    w.write_record(&header)?;
    for r in &dataset.records {
        let mut row = vec![
            r.record_id.clone(),
            r.source_id.clone(),
            r.entity_id.clone().unwrap_or_default(),
        ];
        row.extend(r.values.iter().map(AttributeValue::to_cell));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<records>", e))?;
    Ok(())
}

pub fn write_queries<W: Write>(out: W, schema: &Schema, queries: &[Query]) -> Result<()> {
    let mut w = csv_writer(out);
    let mut header = vec!["query_id", "entity_id"];
    header.extend(schema.names());
    w.write_record(&header)?;
    for q in queries {
        let mut row = vec![q.query_id.clone(), q.entity_id.clone().unwrap_or_default()];
        row.extend(q.values.iter().map(AttributeValue::to_cell));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<queries>", e))?;
    Ok(())
}

pub fn write_truth<W: Write>(
    out: W,
    schema: &Schema,
    truth: &BTreeMap<String, Vec<AttributeValue>>,
) -> Result<()> {
    let mut w = csv_writer(out);
    let mut header = vec!["query_id"];
    header.extend(schema.names());
    w.write_record(&header)?;
    for (id, values) in truth {
        let mut row = vec![id.clone()];
        row.extend(values.iter().map(AttributeValue::to_cell));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<truth>", e))?;
    Ok(())
}

/// One broken invariant found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

fn check_tuple(
    out: &mut Vec<Violation>,
    location: &str,
    schema: &Schema,
    values: &[AttributeValue],
) {
    if values.len() != schema.len() {
        out.push(Violation {
            location: location.to_string(),
            message: format!("{} values for {} attributes", values.len(), schema.len()),
        });
        return;
    }
    for (value, attr) in values.iter().zip(schema.attributes()) {
        if !value.conforms_to(attr.kind) {
            out.push(Violation {
                location: format!("{location}, column `{}`", attr.name),
                message: format!("value `{value}` is not {}", attr.kind.as_str()),
            });
        }
        if matches!(value, AttributeValue::Text(s) if s.is_empty()) {
            out.push(Violation {
                location: format!("{location}, column `{}`", attr.name),
                message: "empty text must be stored as missing".into(),
            });
        }
    }
}

/// Checks every data-model invariant and cross-reference. Returns an empty
/// list for a well-formed dataset.
pub fn validate(dataset: &Dataset) -> Vec<Violation> {
    let mut out = Vec::new();
    let schema = &dataset.schema;

    let mut record_ids = HashSet::new();
    for (i, r) in dataset.records.iter().enumerate() {
        let loc = format!("record {} (row {})", r.record_id, i + 2);
        if r.record_id.is_empty() {
            out.push(Violation {
                location: loc.clone(),
                message: "blank record_id".into(),
            });
        }
        if !record_ids.insert(r.record_id.as_str()) {
            out.push(Violation {
                location: loc.clone(),
                message: "duplicate record_id".into(),
            });
        }
        check_tuple(&mut out, &loc, schema, &r.values);
    }

    let mut owner: HashMap<&str, &str> = HashMap::new();
    let mut source_ids = HashSet::new();
    for s in &dataset.sources {
        if !source_ids.insert(s.source_id.as_str()) {
            out.push(Violation {
                location: format!("source {}", s.source_id),
                message: "duplicate source id".into(),
            });
        }
        if s.record_ids.is_empty() {
            out.push(Violation {
                location: format!("source {}", s.source_id),
                message: "source has no records".into(),
            });
        }
        for rid in &s.record_ids {
            if let Some(prev) = owner.insert(rid.as_str(), s.source_id.as_str()) {
                out.push(Violation {
                    location: format!("record {rid}"),
                    message: format!("listed by sources {prev} and {}", s.source_id),
                });
            }
            if !record_ids.contains(rid.as_str()) {
                out.push(Violation {
                    location: format!("source {}", s.source_id),
                    message: format!("unknown record `{rid}`"),
                });
            }
        }
    }
    for r in &dataset.records {
        if !source_ids.contains(r.source_id.as_str()) {
            out.push(Violation {
                location: format!("record {}", r.record_id),
                message: format!("unknown source `{}`", r.source_id),
            });
        } else if owner.get(r.record_id.as_str()) != Some(&r.source_id.as_str()) {
            out.push(Violation {
                location: format!("record {}", r.record_id),
                message: format!("not listed by its source `{}`", r.source_id),
            });
        }
    }

    let mut query_ids = HashSet::new();
    for q in &dataset.queries {
        let loc = format!("query {}", q.query_id);
        if !query_ids.insert(q.query_id.as_str()) {
            out.push(Violation {
                location: loc.clone(),
                message: "duplicate query_id".into(),
            });
        }
        if q.values.iter().all(AttributeValue::is_missing) {
            out.push(Violation {
                location: loc.clone(),
                message: "query has no filled attribute".into(),
            });
        }
        check_tuple(&mut out, &loc, schema, &q.values);
    }

    for (id, values) in &dataset.truth {
        let loc = format!("truth {id}");
        if !query_ids.contains(id.as_str()) {
            out.push(Violation {
                location: loc.clone(),
                message: "truth row references an unknown query".into(),
            });
        }
        check_tuple(&mut out, &loc, schema, values);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: &str = "Name:text\nMatches:numeric\nRuns:numeric\nHighest:numeric\n";

    const RECORDS: &str = "\
record_id,source,entity_id,Name,Matches,Runs,Highest
r1,s1,c1,SM Gavaskar,125,10122,236
r2,s1,c2,Lala Amarnath,24,878,118
r3,s1,c3,Yajurvindra Singh,4,109,43
r4,s2,c1,Gavaskar,125,10122,236
r5,s2,c2,Mohinder Amarnath,69,4378,138
r6,s2,c3,Yuvraj Singh,40,1900,169
r7,s3,c1,Sunil Gavaskar,125,10122,236
r8,s3,c2,Surinder Amarnath,10,550,124
r9,s3,c3,Yograj Singh,1,10,6
r10,s4,c3,Y Singh,40,1900,169
";

    fn schema() -> Schema {
        Schema::parse(SCHEMA).unwrap()
    }

    fn records(text: &str) -> Result<Dataset> {
        read_records(Path::new("records.csv"), text.as_bytes(), &schema())
    }

    #[test]
    fn cricket_records_group_into_four_sources() {
        let ds = records(RECORDS).unwrap();
        assert_eq!(ds.records.len(), 10);
        assert_eq!(ds.sources.len(), 4);
        let total: usize = ds.sources.iter().map(|s| s.record_ids.len()).sum();
        assert_eq!(total, 10);
        assert_eq!(ds.sources[3].record_ids, vec!["r10"]);
        assert!(validate(&ds).is_empty());
    }

    #[test]
    fn header_only_file_is_empty() {
        let ds = records("record_id,source,entity_id,Name,Matches,Runs,Highest\n").unwrap();
        assert!(ds.records.is_empty());
        assert!(ds.sources.is_empty());
    }

    #[test]
    fn empty_cell_is_missing_not_empty_text() {
        let ds = records(
            "record_id,source,Name,Matches,Runs,Highest\nr1,s1,,125,10122,236\nr2,s1,Gavaskar,,1,2\n",
        )
        .unwrap();
        assert_eq!(ds.records[0].values[0], AttributeValue::Missing);
        assert_eq!(ds.records[1].values[1], AttributeValue::Missing);
        assert_eq!(ds.records[0].entity_id, None);
    }

    #[test]
    fn wrong_arity_reports_row() {
        let err = records("record_id,source,Name,Matches,Runs,Highest\nr1,s1,A,1,2,3\nr2,s1,B,1,2\n")
            .unwrap_err();
        match err {
            Error::Parse { row, .. } => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_is_parse_error() {
        let err = records("record_id,source,Name,Matches,Runs,Highest\nr1,s1,A,abc,2,3\n")
            .unwrap_err();
        assert!(err.to_string().contains("Matches"), "{err}");
    }

    #[test]
    fn duplicate_record_id_is_validation_error() {
        let err = records("record_id,source,Name,Matches,Runs,Highest\nr1,s1,A,1,2,3\nr1,s2,B,1,2,3\n")
            .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn queries_parse_and_reject_blank_ids() {
        let text = "query_id,entity_id,Name,Matches,Runs,Highest\nq1,c1,Gavaskar,,10122,\nq2,c2,Amarnath,69,,\nq3,c3,Y Singh,,,169\n";
        let qs = read_queries(Path::new("q.csv"), text.as_bytes(), &schema()).unwrap();
        assert_eq!(qs.len(), 3);
        assert_eq!(qs[0].values.iter().filter(|v| v.is_present()).count(), 2);

        let full = "query_id,Name,Matches,Runs,Highest\nq1,A,1,2,3\n";
        let qs = read_queries(Path::new("q.csv"), full.as_bytes(), &schema()).unwrap();
        assert_eq!(qs[0].missing_slots(), 0);

        let blank = "query_id,Name,Matches,Runs,Highest\n,A,1,2,3\n";
        assert!(read_queries(Path::new("q.csv"), blank.as_bytes(), &schema()).is_err());

        let empty = "query_id,Name,Matches,Runs,Highest\nq1,,,,\n";
        assert!(matches!(
            read_queries(Path::new("q.csv"), empty.as_bytes(), &schema()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn truth_rejects_duplicates_and_keeps_missing_cells() {
        let text = "query_id,Name,Matches,Runs,Highest\nq1,Gavaskar,125,10122,236\nq2,Amarnath,69,4378,138\nq3,Y Singh,40,1900,\n";
        let t = read_truth(Path::new("t.csv"), text.as_bytes(), &schema()).unwrap();
        assert_eq!(t.len(), 3);
        assert!(t["q3"][3].is_missing());

        let dup = "query_id,Name,Matches,Runs,Highest\nq1,A,1,2,3\nq1,B,1,2,3\n";
        assert!(read_truth(Path::new("t.csv"), dup.as_bytes(), &schema()).is_err());
    }

    #[test]
    fn validate_flags_unknown_source_and_bad_kind() {
        let mut ds = records(RECORDS).unwrap();
        ds.records[0].source_id = "nowhere".into();
        let v = validate(&ds);
        assert!(v.iter().any(|v| v.message.contains("unknown source")), "{v:?}");

        let mut ds = records(RECORDS).unwrap();
        ds.records[2].values[1] = AttributeValue::text("abc");
        let v = validate(&ds);
        assert_eq!(v.len(), 1);
        assert!(v[0].location.contains("Matches"), "{}", v[0]);
        assert!(v[0].location.contains("r3"), "{}", v[0]);
    }

    #[test]
    fn validate_flags_truth_for_unknown_query() {
        let mut ds = records(RECORDS).unwrap();
        ds.truth
            .insert("q9".into(), vec![AttributeValue::Missing; 4]);
        let v = validate(&ds);
        assert_eq!(v.len(), 1);
        assert!(v[0].message.contains("unknown query"));
    }

    #[test]
    fn schema_rejects_duplicates_and_reserved_names() {
        assert!(Schema::parse("a:text\na:numeric").is_err());
        assert!(Schema::parse("source:text").is_err());
        assert!(Schema::parse("a:float").is_err());
        assert!(Schema::parse(":text").is_err());
        let s = schema();
        assert_eq!(Schema::parse(&s.to_schema_text()).unwrap(), s);
    }
}

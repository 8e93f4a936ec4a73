//! Database schemas, relation instances and the synonym vocabulary.
//!
//! A [`DatabaseCatalog`] is built once (from a JSON schema document plus one
//! CSV file per table) and is immutable afterwards. Every name the matcher
//! can bind to comes from here.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::{DataType, Value};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("schema document does not parse: {0}")]
    SchemaParse(String),
    #[error("invalid schema for table `{table}`: {reason}")]
    InvalidSchema { table: String, reason: String },
    #[error("data file for table `{table}` is missing: {path}")]
    DataFileMissing { table: String, path: PathBuf },
    #[error("table `{table}` row {row}: expected {expected} values, found {found}")]
    RowArityMismatch {
        table: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("table `{table}` row {row}: duplicate primary key {key:?}")]
    PrimaryKeyViolation {
        table: String,
        row: usize,
        key: Vec<String>,
    },
    #[error(
        "table `{table}` row {row}: value `{value}` is not a valid {dtype} for column `{column}`"
    )]
    TypeCoercion {
        table: String,
        row: usize,
        column: String,
        value: String,
        dtype: DataType,
    },
    #[error("table `{table}`: header does not match declared columns ({reason})")]
    HeaderMismatch { table: String, reason: String },
    #[error("table `{table}`: malformed CSV: {source}")]
    Csv {
        table: String,
        #[source]
        source: csv::Error,
    },
    #[error("vocabulary file does not parse: {0}")]
    VocabularyParse(String),
    #[error("vocabulary group {index} has fewer than two distinct terms")]
    VocabularyGroupTooSmall { index: usize },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDef {
    pub name: String,
    #[serde(rename = "type")]
    pub dtype: DataType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSchema {
    pub name: String,
    pub columns: Vec<ColumnDef>,
    #[serde(default)]
    pub primary_key: Vec<String>,
}

impl TableSchema {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.name.eq_ignore_ascii_case(name))
    }

    pub fn column(&self, name: &str) -> Option<&ColumnDef> {
        self.column_index(name).map(|i| &self.columns[i])
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    fn validate(&self) -> Result<(), CatalogError> {
        let invalid = |reason: String| CatalogError::InvalidSchema {
            table: self.name.clone(),
            reason,
        };
        if self.name.trim().is_empty() {
            return Err(invalid("table name is empty".into()));
        }
        if self.columns.is_empty() {
            return Err(invalid("no columns declared".into()));
        }
        let mut seen = HashSet::new();
        for col in &self.columns {
            if col.name.trim().is_empty() {
                return Err(invalid("empty column name".into()));
            }
            if !seen.insert(col.name.to_lowercase()) {
                return Err(invalid(format!("duplicate column `{}`", col.name)));
            }
        }
        for key in &self.primary_key {
            if self.column_index(key).is_none() {
                return Err(invalid(format!(
                    "primary key column `{key}` is not declared"
                )));
            }
        }
        Ok(())
    }
}

/// The JSON schema document: `{"tables": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SchemaDoc {
    pub tables: Vec<TableSchema>,
}

impl SchemaDoc {
    pub fn parse(doc: &str) -> Result<Self, CatalogError> {
        let parsed: SchemaDoc =
            serde_json::from_str(doc).map_err(|e| CatalogError::SchemaParse(e.to_string()))?;
        let mut names = HashSet::new();
        for table in &parsed.tables {
            table.validate()?;
            if !names.insert(table.name.to_lowercase()) {
                return Err(CatalogError::InvalidSchema {
                    table: table.name.clone(),
                    reason: "table declared twice".into(),
                });
            }
        }
        Ok(parsed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }
}

pub type Row = Vec<Value>;

#[derive(Debug, Clone, PartialEq)]
pub struct RelationInstance {
    pub schema: TableSchema,
    pub rows: Vec<Row>,
}

impl RelationInstance {
    /// Builds an instance, checking arity, declared types and the primary key.
    pub fn new(schema: TableSchema, rows: Vec<Row>) -> Result<Self, CatalogError> {
        schema.validate()?;
        let width = schema.columns.len();
        let key_idx: Vec<usize> = schema
            .primary_key
            .iter()
            .filter_map(|k| schema.column_index(k))
            .collect();
        let mut keys = HashSet::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(CatalogError::RowArityMismatch {
                    table: schema.name.clone(),
                    row: i + 1,
                    expected: width,
                    found: row.len(),
                });
            }
            for (value, col) in row.iter().zip(&schema.columns) {
                if !value.compatible_with(col.dtype) {
                    return Err(CatalogError::TypeCoercion {
                        table: schema.name.clone(),
                        row: i + 1,
                        column: col.name.clone(),
                        value: value.to_string(),
                        dtype: col.dtype,
                    });
                }
            }
            if !key_idx.is_empty() {
                let key: Vec<Value> = key_idx.iter().map(|&k| row[k].clone()).collect();
                let rendered: Vec<String> = key.iter().map(|v| v.to_string()).collect();
                if !keys.insert(rendered.clone()) {
                    return Err(CatalogError::PrimaryKeyViolation {
                        table: schema.name.clone(),
                        row: i + 1,
                        key: rendered,
                    });
                }
            }
        }
        Ok(Self { schema, rows })
    }

    pub fn name(&self) -> &str {
        &self.schema.name
    }

    /// Parses CSV text whose header names the declared columns (any order).
    pub fn from_csv(schema: TableSchema, text: &str) -> Result<Self, CatalogError> {
        let table = schema.name.clone();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|source| CatalogError::Csv {
                table: table.clone(),
                source,
            })?
            .clone();
        let mut mapping = Vec::with_capacity(schema.columns.len());
        for col in &schema.columns {
            let pos = header
                .iter()
                .position(|h| h.trim().eq_ignore_ascii_case(&col.name))
                .ok_or_else(|| CatalogError::HeaderMismatch {
                    table: table.clone(),
                    reason: format!("column `{}` has no header field", col.name),
                })?;
            mapping.push(pos);
        }
        if header.len() != schema.columns.len() {
            return Err(CatalogError::HeaderMismatch {
                table,
                reason: format!(
                    "{} header fields for {} declared columns",
                    header.len(),
                    schema.columns.len()
                ),
            });
        }
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|source| CatalogError::Csv {
                table: table.clone(),
                source,
            })?;
            if record.len() != schema.columns.len() {
                return Err(CatalogError::RowArityMismatch {
                    table,
                    row: i + 1,
                    expected: schema.columns.len(),
                    found: record.len(),
                });
            }
            let mut row = Vec::with_capacity(mapping.len());
            for (col, &pos) in schema.columns.iter().zip(&mapping) {
                let raw = &record[pos];
                let value =
                    Value::parse_as(raw, col.dtype).ok_or_else(|| CatalogError::TypeCoercion {
                        table: table.clone(),
                        row: i + 1,
                        column: col.name.clone(),
                        value: raw.to_string(),
                        dtype: col.dtype,
                    })?;
                row.push(value);
            }
            rows.push(row);
        }
        Self::new(schema, rows)
    }
}

/// Synonym groups. Lookups are case-insensitive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    groups: Vec<BTreeSet<String>>,
    index: HashMap<String, Vec<usize>>,
}

impl Vocabulary {
    pub fn new<I, G, S>(groups: I) -> Result<Self, CatalogError>
    where
        I: IntoIterator<Item = G>,
        G: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut vocab = Vocabulary::default();
        for (i, group) in groups.into_iter().enumerate() {
            let set: BTreeSet<String> = group
                .into_iter()
                .map(|s| s.as_ref().trim().to_lowercase())
                .filter(|s| !s.is_empty())
                .collect();
            if set.len() < 2 {
                return Err(CatalogError::VocabularyGroupTooSmall { index: i });
            }
            for term in &set {
                vocab
                    .index
                    .entry(term.clone())
                    .or_default()
                    .push(vocab.groups.len());
            }
            vocab.groups.push(set);
        }
        Ok(vocab)
    }

    /// Parses the vocabulary file format: a JSON array of string arrays.
    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let groups: Vec<Vec<String>> =
            serde_json::from_str(text).map_err(|e| CatalogError::VocabularyParse(e.to_string()))?;
        Self::new(groups)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.groups).expect("vocabulary serializes")
    }

    pub fn groups(&self) -> &[BTreeSet<String>] {
        &self.groups
    }

    /// Union of every group containing `term`, minus the term itself.
    pub fn synonyms_of(&self, term: &str) -> BTreeSet<String> {
        let key = term.to_lowercase();
        let mut out = BTreeSet::new();
        if let Some(ids) = self.index.get(&key) {
            for &g in ids {
                out.extend(self.groups[g].iter().filter(|t| **t != key).cloned());
            }
        }
        out
    }

    pub fn contains(&self, term: &str) -> bool {
        self.index.contains_key(&term.to_lowercase())
    }

    /// True when both terms sit in at least one common group.
    pub fn same_group(&self, a: &str, b: &str) -> bool {
        let (a, b) = (a.to_lowercase(), b.to_lowercase());
        match (self.index.get(&a), self.index.get(&b)) {
            (Some(x), Some(y)) => x.iter().any(|g| y.contains(g)),
            _ => false,
        }
    }

    /// Returns a copy extended with extra groups (per-user personalization).
    pub fn extended<I, G, S>(&self, extra: I) -> Result<Self, CatalogError>
    where
        I: IntoIterator<Item = G>,
        G: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut all: Vec<Vec<String>> = self
            .groups
            .iter()
            .map(|g| g.iter().cloned().collect())
            .collect();
        for group in extra {
            all.push(group.into_iter().map(|s| s.as_ref().to_string()).collect());
        }
        Self::new(all)
    }
}

/// Location of a column within the catalog: (table index, column index).
pub type ColumnLoc = (usize, usize);

#[derive(Debug, Clone)]
pub struct DatabaseCatalog {
    name: String,
    relations: Vec<RelationInstance>,
    vocabulary: Vocabulary,
    text_values: HashMap<String, Vec<ColumnLoc>>,
}

impl DatabaseCatalog {
    pub fn new(
        name: impl Into<String>,
        relations: Vec<RelationInstance>,
        vocabulary: Vocabulary,
    ) -> Result<Self, CatalogError> {
        let mut names = HashSet::new();
        for rel in &relations {
            if !names.insert(rel.name().to_lowercase()) {
                return Err(CatalogError::InvalidSchema {
                    table: rel.name().to_string(),
                    reason: "table declared twice".into(),
                });
            }
        }
        let mut text_values: HashMap<String, Vec<ColumnLoc>> = HashMap::new();
        for (t, rel) in relations.iter().enumerate() {
            for row in &rel.rows {
                for (c, value) in row.iter().enumerate() {
                    if let Value::Text(s) = value {
                        let locs = text_values.entry(s.to_lowercase()).or_default();
                        if !locs.contains(&(t, c)) {
                            locs.push((t, c));
                        }
                    }
                }
            }
        }
        Ok(Self {
            name: name.into(),
            relations,
            vocabulary,
            text_values,
        })
    }

    /// Loads a catalog from a schema document and a directory holding one
    /// `<table>.csv` per declared table.
    pub fn load(
        name: impl Into<String>,
        schema_doc: &str,
        data_dir: &Path,
        vocabulary: Vocabulary,
    ) -> Result<Self, CatalogError> {
        let doc = SchemaDoc::parse(schema_doc)?;
        let mut relations = Vec::with_capacity(doc.tables.len());
        for schema in doc.tables {
            let path = data_dir.join(format!("{}.csv", schema.name));
            if !path.is_file() {
                return Err(CatalogError::DataFileMissing {
                    table: schema.name.clone(),
                    path,
                });
            }
            let text = fs::read_to_string(&path).map_err(|source| CatalogError::Io {
                path: path.clone(),
                source,
            })?;
            relations.push(RelationInstance::from_csv(schema, &text)?);
        }
        Self::new(name, relations, vocabulary)
    }

    /// Loads `schema.json`, the per-table CSV files and the optional
    /// `vocabulary.json` from one directory. The directory name becomes the
    /// database id.
    pub fn load_dir(dir: &Path) -> Result<Self, CatalogError> {
        let schema_path = dir.join("schema.json");
        let schema = fs::read_to_string(&schema_path).map_err(|source| CatalogError::Io {
            path: schema_path,
            source,
        })?;
        let vocab_path = dir.join("vocabulary.json");
        let vocabulary = if vocab_path.is_file() {
            let text = fs::read_to_string(&vocab_path).map_err(|source| CatalogError::Io {
                path: vocab_path,
                source,
            })?;
            Vocabulary::from_json(&text)?
        } else {
            Vocabulary::default()
        };
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "db".to_string());
        Self::load(name, &schema, dir, vocabulary)
    }

    /// Builds a catalog from in-memory documents keyed by table name.
    pub fn from_sources(
        name: impl Into<String>,
        schema_doc: &str,
        csv_by_table: &HashMap<String, String>,
        vocabulary: Vocabulary,
    ) -> Result<Self, CatalogError> {
        let doc = SchemaDoc::parse(schema_doc)?;
        let mut relations = Vec::with_capacity(doc.tables.len());
        for schema in doc.tables {
            let text =
                csv_by_table
                    .get(&schema.name)
                    .ok_or_else(|| CatalogError::DataFileMissing {
                        table: schema.name.clone(),
                        path: PathBuf::from(format!("{}.csv", schema.name)),
                    })?;
            relations.push(RelationInstance::from_csv(schema, text)?);
        }
        Self::new(name, relations, vocabulary)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    /// Same data, different vocabulary.
    pub fn with_vocabulary(&self, vocabulary: Vocabulary) -> Self {
        Self {
            vocabulary,
            ..self.clone()
        }
    }

    pub fn relations(&self) -> &[RelationInstance] {
        &self.relations
    }

    pub fn schemas(&self) -> impl Iterator<Item = &TableSchema> {
        self.relations.iter().map(|r| &r.schema)
    }

    pub fn table_index(&self, name: &str) -> Option<usize> {
        self.relations
            .iter()
            .position(|r| r.name().eq_ignore_ascii_case(name))
    }

    pub fn relation(&self, name: &str) -> Option<&RelationInstance> {
        self.table_index(name).map(|i| &self.relations[i])
    }

    pub fn schema_doc(&self) -> SchemaDoc {
        SchemaDoc {
            tables: self.schemas().cloned().collect(),
        }
    }

    pub fn synonyms_of(&self, term: &str) -> BTreeSet<String> {
        self.vocabulary.synonyms_of(term)
    }

    /// Columns whose instance data contains `value` (text match is
    /// case-insensitive, numbers compare numerically).
    pub fn columns_containing(&self, value: &Value) -> Vec<ColumnLoc> {
        match value {
            Value::Text(s) => self
                .text_values
                .get(&s.to_lowercase())
                .cloned()
                .unwrap_or_default(),
            Value::Null => Vec::new(),
            number => {
                let mut out = Vec::new();
                for (t, rel) in self.relations.iter().enumerate() {
                    for (c, col) in rel.schema.columns.iter().enumerate() {
                        if col.dtype.is_numeric() && rel.rows.iter().any(|r| &r[c] == number) {
                            out.push((t, c));
                        }
                    }
                }
                out
            }
        }
    }

    /// The stored spelling of a text value, if any cell holds it.
    pub fn canonical_text(&self, phrase: &str) -> Option<String> {
        let &(t, c) = self.text_values.get(&phrase.to_lowercase())?.first()?;
        self.relations[t].rows.iter().find_map(|r| match &r[c] {
            Value::Text(s) if s.eq_ignore_ascii_case(phrase) => Some(s.clone()),
            _ => None,
        })
    }

    pub fn is_known_value(&self, phrase: &str) -> bool {
        self.text_values.contains_key(&phrase.to_lowercase())
    }

    pub fn column_def(&self, loc: ColumnLoc) -> &ColumnDef {
        &self.relations[loc.0].schema.columns[loc.1]
    }
}

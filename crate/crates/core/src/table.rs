//! Tabular data representation: typed attribute schemas, ordered record
//! tables, CSV ingestion and the survey-specific cleaning rules.

use std::fmt;
use std::io::Read;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A categorical code together with its display label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Category {
    pub code: u32,
    pub label: String,
}

impl Category {
    pub fn new(code: u32, label: impl Into<String>) -> Self {
        Self {
            code,
            label: label.into(),
        }
    }
}

/// Value domain of an attribute.
#[derive(Debug, Clone, PartialEq)]
pub enum AttributeKind<F> {
    /// Finite label set with integer codes.
    Categorical(Vec<Category>),
    /// Integer-valued numeric attribute with inclusive bounds.
    Integer { lo: F, hi: F },
    /// Real-valued numeric attribute with inclusive bounds.
    Real { lo: F, hi: F },
}

impl<F: Scalar> AttributeKind<F> {
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            AttributeKind::Integer { .. } | AttributeKind::Real { .. }
        )
    }

    /// Inclusive numeric bounds, `None` for categorical attributes.
    pub fn bounds(&self) -> Option<(F, F)> {
        match self {
            AttributeKind::Integer { lo, hi } | AttributeKind::Real { lo, hi } => Some((*lo, *hi)),
            AttributeKind::Categorical(_) => None,
        }
    }

    pub fn categories(&self) -> Option<&[Category]> {
        match self {
            AttributeKind::Categorical(cats) => Some(cats),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Condition,
    Decision,
}

/// One column of the table: name, domain and role.
#[derive(Debug, Clone, PartialEq)]
pub struct Attribute<F> {
    pub name: String,
    pub kind: AttributeKind<F>,
    pub role: Role,
}

impl<F: Scalar> Attribute<F> {
    pub fn categorical(name: impl Into<String>, categories: Vec<Category>, role: Role) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Categorical(categories),
            role,
        }
    }

    pub fn integer(name: impl Into<String>, lo: F, hi: F) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Integer { lo, hi },
            role: Role::Condition,
        }
    }

    pub fn real(name: impl Into<String>, lo: F, hi: F) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Real { lo, hi },
            role: Role::Condition,
        }
    }
}

/// Validated attribute list: exactly one binary decision attribute, numeric
/// bounds ordered, categorical code sets non-empty and duplicate-free.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema<F> {
    attributes: Vec<Attribute<F>>,
    decision: usize,
}

impl<F: Scalar> Schema<F> {
    pub fn new(attributes: Vec<Attribute<F>>) -> Result<Self> {
        let decisions: Vec<usize> = attributes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.role == Role::Decision)
            .map(|(i, _)| i)
            .collect();
        if decisions.len() != 1 {
            return Err(Error::Schema(format!(
                "expected exactly one decision attribute, found {}",
                decisions.len()
            )));
        }
        let decision = decisions[0];
        for attr in &attributes {
            match &attr.kind {
                AttributeKind::Categorical(cats) => {
                    if cats.is_empty() {
                        return Err(Error::Schema(format!(
                            "attribute '{}' has an empty category set",
                            attr.name
                        )));
                    }
                    let mut codes: Vec<u32> = cats.iter().map(|c| c.code).collect();
                    codes.sort_unstable();
                    codes.dedup();
                    if codes.len() != cats.len() {
                        return Err(Error::Schema(format!(
                            "attribute '{}' has duplicate category codes",
                            attr.name
                        )));
                    }
                }
                AttributeKind::Integer { lo, hi } | AttributeKind::Real { lo, hi } => {
                    // partial_cmp also rejects NaN bounds, which `<` would let through.
                    if lo.partial_cmp(hi) != Some(std::cmp::Ordering::Less) {
                        return Err(Error::Schema(format!(
                            "attribute '{}' has unordered bounds",
                            attr.name
                        )));
                    }
                }
            }
        }
        let dec = &attributes[decision];
        let dec_codes: Option<Vec<u32>> = dec
            .kind
            .categories()
            .map(|cats| cats.iter().map(|c| c.code).collect());
        match dec_codes {
            Some(mut codes) => {
                codes.sort_unstable();
                if codes != [0, 1] {
                    return Err(Error::Schema(
                        "decision attribute domain must be {0, 1}".into(),
                    ));
                }
            }
            None => {
                return Err(Error::Schema(
                    "decision attribute must be categorical over {0, 1}".into(),
                ));
            }
        }
        Ok(Self {
            attributes,
            decision,
        })
    }

    pub fn attributes(&self) -> &[Attribute<F>] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn decision_index(&self) -> usize {
        self.decision
    }

    pub fn decision_attribute(&self) -> &Attribute<F> {
        &self.attributes[self.decision]
    }

    /// Schema indices of the condition attributes, in schema order.
    pub fn condition_indices(&self) -> Vec<usize> {
        (0..self.attributes.len())
            .filter(|&i| i != self.decision)
            .collect()
    }

    /// Schema indices of the numeric condition attributes, in schema order.
    /// These are the attributes the cut point search covers.
    pub fn numeric_condition_indices(&self) -> Vec<usize> {
        self.condition_indices()
            .into_iter()
            .filter(|&i| self.attributes[i].kind.is_numeric())
            .collect()
    }

    /// Case-insensitive name lookup.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes
            .iter()
            .position(|a| a.name.eq_ignore_ascii_case(name))
    }

    /// Label for a categorical code, falling back to the bare code.
    pub fn label_of(&self, attr: usize, code: u32) -> String {
        self.attributes[attr]
            .kind
            .categories()
            .and_then(|cats| cats.iter().find(|c| c.code == code))
            .map(|c| c.label.clone())
            .unwrap_or_else(|| code.to_string())
    }
}

/// A single cell. Parsing keeps unusable cells as [`Value::Missing`] so the
/// cleaning step, not the parser, accounts for every removal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value<F> {
    Code(u32),
    Int(i64),
    Real(F),
    Missing,
}

impl<F: Scalar> Value<F> {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    /// Numeric view of the cell; categorical codes convert too.
    pub fn as_real(&self) -> Option<F> {
        match self {
            Value::Code(c) => F::from_u32(*c),
            Value::Int(i) => F::from_i64(*i),
            Value::Real(v) => Some(*v),
            Value::Missing => None,
        }
    }
}

impl<F: Scalar> fmt::Display for Value<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Code(c) => write!(f, "{c}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(v) => write!(f, "{v}"),
            Value::Missing => write!(f, "?"),
        }
    }
}

/// One row with its stable id. Ids survive cleaning unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct Record<F> {
    pub id: usize,
    pub values: Vec<Value<F>>,
}

/// Ordered records over a typed schema with a binary decision column.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationTable<F> {
    schema: Schema<F>,
    records: Vec<Record<F>>,
}

impl<F: Scalar> InformationTable<F> {
    /// Builds a table from plain rows, assigning ids `0..n` in order.
    pub fn from_rows(schema: Schema<F>, rows: Vec<Vec<Value<F>>>) -> Result<Self> {
        let records = rows
            .into_iter()
            .enumerate()
            .map(|(id, values)| Record { id, values })
            .collect();
        Self::from_records(schema, records)
    }

    pub(crate) fn from_records(schema: Schema<F>, records: Vec<Record<F>>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for record in &records {
            if record.values.len() != schema.len() {
                return Err(Error::Parameter(format!(
                    "record {} has {} values, schema expects {}",
                    record.id,
                    record.values.len(),
                    schema.len()
                )));
            }
            if !seen.insert(record.id) {
                return Err(Error::Parameter(format!(
                    "duplicate record id {}",
                    record.id
                )));
            }
        }
        Ok(Self { schema, records })
    }

    pub fn schema(&self) -> &Schema<F> {
        &self.schema
    }

    pub fn records(&self) -> &[Record<F>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn value(&self, record: usize, attr: usize) -> Value<F> {
        self.records[record].values[attr]
    }

    /// Serializes to CSV: header row, comma delimiter, `?` for missing.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<&str> = self
            .schema
            .attributes()
            .iter()
            .map(|a| a.name.as_str())
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for record in &self.records {
            let cells: Vec<String> = record.values.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Tally of the cleaning pass. `output = input - missing - gravidity/parity`
/// holds by construction and `is_reconciled` re-checks it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CleaningReport {
    pub input_count: usize,
    pub removed_missing: usize,
    /// Covers both gravidity = 0 with parity >= 1 and parity > gravidity.
    pub removed_gravidity_parity: usize,
    pub output_count: usize,
}

impl CleaningReport {
    pub fn is_reconciled(&self) -> bool {
        self.output_count + self.removed_missing + self.removed_gravidity_parity == self.input_count
    }

    pub fn to_text(&self) -> String {
        format!(
            "input-count = {}\nremoved-missing = {}\nremoved-gravidity-parity = {}\noutput-count = {}\n",
            self.input_count, self.removed_missing, self.removed_gravidity_parity, self.output_count
        )
    }
}

/// Which record-consistency rules the cleaning pass applies on top of
/// missing-value removal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConsistencyChecks {
    /// Drop records with gravidity = 0 and parity >= 1, or parity > gravidity.
    /// Requires the schema to carry both columns.
    GravidityParity,
    /// Missing-value removal only.
    None,
}

/// Removes defective records, preserving the order, ids and values of the
/// survivors. A record with several defects is attributed to the first
/// matching reason: missing first, then gravidity/parity.
pub fn clean<F: Scalar>(
    table: &InformationTable<F>,
    checks: ConsistencyChecks,
) -> Result<(InformationTable<F>, CleaningReport)> {
    let gp = match checks {
        ConsistencyChecks::GravidityParity => {
            let gravidity = table.schema().index_of("gravidity").ok_or_else(|| {
                Error::Config(
                    "gravidity/parity checks requested but schema has no 'Gravidity' attribute"
                        .into(),
                )
            })?;
            let parity = table.schema().index_of("parity").ok_or_else(|| {
                Error::Config(
                    "gravidity/parity checks requested but schema has no 'Parity' attribute".into(),
                )
            })?;
            Some((gravidity, parity))
        }
        ConsistencyChecks::None => None,
    };

    let mut survivors = Vec::with_capacity(table.len());
    let mut removed_missing = 0usize;
    let mut removed_gp = 0usize;
    for record in table.records() {
        if record.values.iter().any(Value::is_missing) {
            removed_missing += 1;
            continue;
        }
        if let Some((gi, pi)) = gp {
            let g = record.values[gi].as_real().unwrap_or_else(F::zero);
            let p = record.values[pi].as_real().unwrap_or_else(F::zero);
            if (g == F::zero() && p >= F::one()) || p > g {
                removed_gp += 1;
                continue;
            }
        }
        survivors.push(record.clone());
    }

    let report = CleaningReport {
        input_count: table.len(),
        removed_missing,
        removed_gravidity_parity: removed_gp,
        output_count: survivors.len(),
    };
    debug_assert!(report.is_reconciled());
    let cleaned = InformationTable::from_records(table.schema().clone(), survivors)?;
    Ok((cleaned, report))
}

/// Parses delimiter-separated text against a schema.
///
/// The header row must name every schema attribute, in schema order
/// (case-insensitive). Cells that are absent, `?`, unparseable, or outside
/// the attribute's declared domain are stored as [`Value::Missing`] rather
/// than dropped, so the cleaning report accounts for them.
pub fn load_table<F: Scalar, R: Read>(
    source: R,
    schema: &Schema<F>,
) -> Result<InformationTable<F>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader
        .headers()
        .map_err(|e| Error::Schema(format!("cannot read header row: {e}")))?
        .clone();
    if headers.len() != schema.len() {
        return Err(Error::Schema(format!(
            "header has {} columns, schema expects {}",
            headers.len(),
            schema.len()
        )));
    }
    for (i, attr) in schema.attributes().iter().enumerate() {
        if !headers[i].eq_ignore_ascii_case(&attr.name) {
            return Err(Error::Schema(format!(
                "header column {} is '{}', schema expects '{}'",
                i, &headers[i], attr.name
            )));
        }
    }

    let mut rows = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| match e.position() {
            Some(pos) => Error::Row {
                line: pos.line(),
                message: e.to_string(),
            },
            None => Error::Schema(e.to_string()),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != schema.len() {
            return Err(Error::Row {
                line,
                message: format!(
                    "row has {} fields, schema expects {}",
                    record.len(),
                    schema.len()
                ),
            });
        }
        let values = schema
            .attributes()
            .iter()
            .zip(record.iter())
            .map(|(attr, cell)| parse_cell(attr, cell))
            .collect();
        rows.push(values);
    }
    InformationTable::from_rows(schema.clone(), rows)
}

fn parse_cell<F: Scalar>(attr: &Attribute<F>, cell: &str) -> Value<F> {
    if cell.is_empty() || cell == "?" {
        return Value::Missing;
    }
    match &attr.kind {
        AttributeKind::Categorical(cats) => {
            if let Ok(code) = cell.parse::<u32>() {
                if cats.iter().any(|c| c.code == code) {
                    return Value::Code(code);
                }
            }
            // Accept the label spelling as well.
            match cats.iter().find(|c| c.label.eq_ignore_ascii_case(cell)) {
                Some(c) => Value::Code(c.code),
                None => Value::Missing,
            }
        }
        AttributeKind::Integer { lo, hi } => match cell.parse::<i64>() {
            Ok(i) => match F::from_i64(i) {
                Some(v) if v >= *lo && v <= *hi => Value::Int(i),
                _ => Value::Missing,
            },
            Err(_) => Value::Missing,
        },
        AttributeKind::Real { lo, hi } => match cell.parse::<F>() {
            Ok(v) if v >= *lo && v <= *hi => Value::Real(v),
            _ => Value::Missing,
        },
    }
}

/// The antenatal-survey-shaped schema the synthetic generator and the CLI
/// default to: six demographic condition attributes and a binary outcome.
pub fn survey_schema<F: Scalar>() -> Schema<F> {
    let f = |v: f64| F::from_f64(v).expect("bound representable");
    Schema::new(vec![
        Attribute::categorical(
            "Race",
            vec![
                Category::new(1, "White"),
                Category::new(2, "African"),
                Category::new(3, "Coloured"),
                Category::new(4, "Asian"),
            ],
            Role::Condition,
        ),
        Attribute::real("Mothers Age", f(13.0), f(50.0)),
        Attribute::real("Education", f(0.0), f(13.0)),
        Attribute::integer("Gravidity", f(0.0), f(12.0)),
        Attribute::integer("Parity", f(0.0), f(12.0)),
        Attribute::real("Fathers Age", f(13.0), f(80.0)),
        Attribute::categorical(
            "HIV",
            vec![Category::new(0, "Negative"), Category::new(1, "Positive")],
            Role::Decision,
        ),
    ])
    .expect("survey schema is valid")
}

//! Cut point sets and binning: the equal-width baseline, the half-open
//! binning rule, and the repair step that turns raw GA genes into valid cuts.

use std::io::BufRead;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::table::{InformationTable, Schema, Value};

/// Relative minimum gap between adjacent cuts: `EPS_REL * (hi - lo)`.
/// Relative so repair behaves uniformly across attribute ranges.
const EPS_REL: f64 = 1e-6;

fn eps_for<F: Scalar>(lo: F, hi: F) -> F {
    (hi - lo) * F::from_f64(EPS_REL).expect("eps representable")
}

/// Gaps are enforced at the full epsilon but validated (and re-triggered)
/// at half of it, so round-off in `x + eps - x` cannot oscillate repair.
fn gap_floor<F: Scalar>(eps: F) -> F {
    eps / F::from_count(2)
}

/// Interior cut points for one numeric condition attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct CutEntry<F> {
    /// Schema index of the attribute.
    pub attr: usize,
    /// Strictly increasing cuts, strictly inside the attribute bounds.
    pub cuts: Vec<F>,
}

/// Per-attribute sorted interior cut points; the GA's search variable.
/// Each numeric condition attribute carries `k - 1` cuts for `k` bins.
#[derive(Debug, Clone, PartialEq)]
pub struct CutPointSet<F> {
    entries: Vec<CutEntry<F>>,
    bins: usize,
}

impl<F: Scalar> CutPointSet<F> {
    /// Validates the invariants: one entry per numeric condition attribute
    /// in schema order, cuts strictly increasing with at least the epsilon
    /// gap, strictly inside the bounds.
    pub fn new(schema: &Schema<F>, entries: Vec<CutEntry<F>>, bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::Parameter(format!("bins must be >= 2, got {bins}")));
        }
        let numeric = schema.numeric_condition_indices();
        if entries.len() != numeric.len() {
            return Err(Error::Parameter(format!(
                "expected cuts for {} numeric attributes, got {}",
                numeric.len(),
                entries.len()
            )));
        }
        for (entry, &attr) in entries.iter().zip(&numeric) {
            if entry.attr != attr {
                return Err(Error::Parameter(format!(
                    "cut entry for attribute index {} out of schema order (expected {})",
                    entry.attr, attr
                )));
            }
            let name = &schema.attributes()[attr].name;
            let (lo, hi) = schema.attributes()[attr]
                .kind
                .bounds()
                .ok_or_else(|| Error::Parameter(format!("attribute '{name}' is not numeric")))?;
            if entry.cuts.len() != bins - 1 {
                return Err(Error::Parameter(format!(
                    "attribute '{name}' has {} cuts, expected {}",
                    entry.cuts.len(),
                    bins - 1
                )));
            }
            let floor = gap_floor(eps_for(lo, hi));
            let mut prev = None;
            for &c in &entry.cuts {
                if !(c > lo && c < hi) {
                    return Err(Error::Parameter(format!(
                        "cut {c} of attribute '{name}' not strictly inside ({lo}, {hi})"
                    )));
                }
                if let Some(p) = prev {
                    if c - p < floor {
                        return Err(Error::Parameter(format!(
                            "cuts {p} and {c} of attribute '{name}' closer than the minimum gap"
                        )));
                    }
                }
                prev = Some(c);
            }
        }
        Ok(Self { entries, bins })
    }

    pub fn entries(&self) -> &[CutEntry<F>] {
        &self.entries
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn cuts_for(&self, attr: usize) -> Option<&[F]> {
        self.entries
            .iter()
            .find(|e| e.attr == attr)
            .map(|e| e.cuts.as_slice())
    }

    /// Flat gene view: cuts concatenated in schema attribute order.
    pub fn flatten(&self) -> Vec<F> {
        self.entries
            .iter()
            .flat_map(|e| e.cuts.iter().copied())
            .collect()
    }

    /// One line per attribute: `name: cut cut cut`. Cut values round-trip
    /// exactly through their shortest decimal form.
    pub fn to_text(&self, schema: &Schema<F>) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            let name = &schema.attributes()[entry.attr].name;
            let cuts: Vec<String> = entry.cuts.iter().map(|c| format!("{c}")).collect();
            out.push_str(&format!("{name}: {}\n", cuts.join(" ")));
        }
        out
    }

    /// Parses the [`to_text`](Self::to_text) format.
    pub fn from_text<R: BufRead>(source: R, schema: &Schema<F>) -> Result<Self> {
        let mut entries = Vec::new();
        let mut bins = None;
        for (lineno, line) in source.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, rest) = line.split_once(':').ok_or_else(|| Error::Row {
                line: lineno as u64 + 1,
                message: "expected 'name: cut cut ...'".into(),
            })?;
            let attr = schema.index_of(name.trim()).ok_or_else(|| Error::Row {
                line: lineno as u64 + 1,
                message: format!("unknown attribute '{}'", name.trim()),
            })?;
            let cuts = rest
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<F>().map_err(|_| Error::Row {
                        line: lineno as u64 + 1,
                        message: format!("unparseable cut value '{tok}'"),
                    })
                })
                .collect::<Result<Vec<F>>>()?;
            match bins {
                None => bins = Some(cuts.len() + 1),
                Some(b) if b != cuts.len() + 1 => {
                    return Err(Error::Parameter(
                        "attributes carry different cut counts".into(),
                    ))
                }
                _ => {}
            }
            entries.push(CutEntry { attr, cuts });
        }
        let bins = bins.ok_or_else(|| Error::Parameter("cut point file is empty".into()))?;
        entries.sort_by_key(|e| e.attr);
        Self::new(schema, entries, bins)
    }
}

/// Equal-width baseline: for bounds `[lo, hi]`, cuts at `lo + i*(hi-lo)/k`.
pub fn equal_width<F: Scalar>(schema: &Schema<F>, k: usize) -> Result<CutPointSet<F>> {
    if k < 2 {
        return Err(Error::Parameter(format!("bins must be >= 2, got {k}")));
    }
    let entries = schema
        .numeric_condition_indices()
        .into_iter()
        .map(|attr| {
            let (lo, hi) = schema.attributes()[attr].kind.bounds().expect("numeric");
            let width = (hi - lo) / F::from_count(k);
            let cuts = (1..k).map(|i| lo + width * F::from_count(i)).collect();
            CutEntry { attr, cuts }
        })
        .collect();
    CutPointSet::new(schema, entries, k)
}

/// Bin index of `v` for interior cuts `cuts` over `[lo, hi]`: half-open
/// bins `[c_i, c_{i+1})` with the top endpoint folded into the last bin.
fn bin_of<F: Scalar>(v: F, cuts: &[F]) -> u32 {
    cuts.partition_point(|c| *c <= v) as u32
}

/// Schema echo plus records of bin indices; categorical attributes and the
/// decision column pass through as their original codes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedTable<F> {
    schema: Schema<F>,
    cuts: CutPointSet<F>,
    ids: Vec<usize>,
    /// Row-major cells, stride = schema length.
    cells: Vec<u32>,
}

impl<F: Scalar> DiscretizedTable<F> {
    pub fn schema(&self) -> &Schema<F> {
        &self.schema
    }

    pub fn cuts(&self) -> &CutPointSet<F> {
        &self.cuts
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn row(&self, i: usize) -> &[u32] {
        let w = self.schema.len();
        &self.cells[i * w..(i + 1) * w]
    }

    /// Condition cells of row `i`, in schema order with the decision dropped.
    pub fn condition_row(&self, i: usize) -> Vec<u32> {
        let dec = self.schema.decision_index();
        self.row(i)
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != dec)
            .map(|(_, &v)| v)
            .collect()
    }

    pub fn decision(&self, i: usize) -> u8 {
        self.row(i)[self.schema.decision_index()] as u8
    }

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
        for i in 0..self.len() {
            let cells: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Maps every numeric cell to its bin index under `cuts`. Total on cleaned
/// tables; missing or out-of-bounds cells raise a range error naming the
/// record and attribute.
pub fn apply<F: Scalar>(
    table: &InformationTable<F>,
    cuts: &CutPointSet<F>,
) -> Result<DiscretizedTable<F>> {
    let schema = table.schema();
    // Re-validate the cuts against this table's schema so a cut set built
    // for different bounds cannot silently mis-bin.
    let cuts = CutPointSet::new(schema, cuts.entries().to_vec(), cuts.bins())?;

    let width = schema.len();
    let mut cells = Vec::with_capacity(table.len() * width);
    let mut ids = Vec::with_capacity(table.len());
    for record in table.records() {
        ids.push(record.id);
        for (j, value) in record.values.iter().enumerate() {
            let attr = &schema.attributes()[j];
            let cell = match (value, &attr.kind) {
                (Value::Missing, _) => {
                    return Err(Error::Range {
                        record: record.id,
                        attribute: attr.name.clone(),
                        message: "missing value (table not cleaned)".into(),
                    })
                }
                (v, kind) if kind.is_numeric() => {
                    let (lo, hi) = kind.bounds().expect("numeric");
                    let x = v.as_real().expect("non-missing numeric");
                    if x < lo || x > hi {
                        return Err(Error::Range {
                            record: record.id,
                            attribute: attr.name.clone(),
                            message: format!("value {x} outside [{lo}, {hi}]"),
                        });
                    }
                    let attr_cuts = cuts.cuts_for(j).expect("numeric condition attribute");
                    bin_of(x, attr_cuts)
                }
                (Value::Code(c), _) => *c,
                (v, _) => {
                    return Err(Error::Range {
                        record: record.id,
                        attribute: attr.name.clone(),
                        message: format!("value {v} is not a categorical code"),
                    })
                }
            };
            cells.push(cell);
        }
    }
    Ok(DiscretizedTable {
        schema: schema.clone(),
        cuts,
        ids,
        cells,
    })
}

/// Decodes raw GA genes into a valid cut point set: per attribute, clamp
/// into the open domain interval, sort ascending, then enforce the minimum
/// gap by pushing later cuts upward and, if the top is exceeded, earlier
/// cuts downward. Idempotent on already-valid cuts.
pub fn repair<F: Scalar>(raw: &[F], schema: &Schema<F>, k: usize) -> Result<CutPointSet<F>> {
    if k < 2 {
        return Err(Error::Parameter(format!("bins must be >= 2, got {k}")));
    }
    let numeric = schema.numeric_condition_indices();
    let per_attr = k - 1;
    if raw.len() != per_attr * numeric.len() {
        return Err(Error::Parameter(format!(
            "expected {} genes ({} attributes x {}), got {}",
            per_attr * numeric.len(),
            numeric.len(),
            per_attr,
            raw.len()
        )));
    }
    let entries = numeric
        .iter()
        .enumerate()
        .map(|(slot, &attr)| {
            let (lo, hi) = schema.attributes()[attr].kind.bounds().expect("numeric");
            let eps = eps_for(lo, hi);
            let floor = gap_floor(eps);
            let mid = lo + (hi - lo) / F::from_count(2);
            let mut cuts: Vec<F> = raw[slot * per_attr..(slot + 1) * per_attr]
                .iter()
                .map(|&g| {
                    // Non-finite genes cannot be ordered; fold them to the midpoint.
                    let g = if g.is_finite() { g } else { mid };
                    g.max(lo + eps).min(hi - eps)
                })
                .collect();
            cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite cuts"));
            for i in 1..cuts.len() {
                if cuts[i] - cuts[i - 1] < floor {
                    cuts[i] = cuts[i - 1] + eps;
                }
            }
            if let Some(&last) = cuts.last() {
                if last > hi - eps {
                    let n = cuts.len();
                    cuts[n - 1] = hi - eps;
                    for i in (0..n - 1).rev() {
                        if cuts[i + 1] - cuts[i] < floor {
                            cuts[i] = cuts[i + 1] - eps;
                        }
                    }
                }
            }
            CutEntry { attr, cuts }
        })
        .collect();
    CutPointSet::new(schema, entries, k)
}

//! Decision rule extraction from a discretized table, textual rendering,
//! prediction on unseen records, and rule set evaluation.

use std::collections::BTreeMap;
use std::io::BufRead;

use crate::discretize::{CutEntry, CutPointSet, DiscretizedTable};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::table::{AttributeKind, Schema};

/// Whether a rule comes from a decision-pure pattern or a mixed one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Certain,
    Possible,
}

impl RuleKind {
    fn as_str(self) -> &'static str {
        match self {
            RuleKind::Certain => "certain",
            RuleKind::Possible => "possible",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "certain" => Ok(RuleKind::Certain),
            "possible" => Ok(RuleKind::Possible),
            other => Err(Error::Parameter(format!("unknown rule kind '{other}'"))),
        }
    }
}

/// One if-then rule: a full condition pattern implying a decision.
///
/// `plausibility` is the rough membership of the pattern's records in the
/// decision class: the fraction of the pattern that carries this decision.
/// Certain rules have plausibility 1. `support` counts the records matching
/// both the pattern and the decision, so supports within one pattern sum to
/// the pattern's size and plausibilities sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule<F> {
    pub pattern: Vec<u32>,
    pub decision: u8,
    pub kind: RuleKind,
    pub plausibility: F,
    pub support: usize,
}

/// Rules extracted from one discretized table, together with the schema and
/// cut points needed to render them and to discretize future records the
/// same way. Rules are kept sorted by (pattern, decision).
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet<F> {
    schema: Schema<F>,
    cuts: CutPointSet<F>,
    rules: Vec<Rule<F>>,
}

/// Builds one rule per (pattern, decision) pair present in the table.
/// Pure patterns yield a single certain rule; mixed patterns yield one
/// possible rule per decision.
pub fn extract<F: Scalar>(table: &DiscretizedTable<F>) -> Result<RuleSet<F>> {
    if table.is_empty() {
        return Err(Error::Parameter(
            "cannot extract rules from an empty table".into(),
        ));
    }
    let mut groups: BTreeMap<Vec<u32>, (usize, usize)> = BTreeMap::new();
    for i in 0..table.len() {
        let counts = groups.entry(table.condition_row(i)).or_insert((0, 0));
        if table.decision(i) == 1 {
            counts.1 += 1;
        } else {
            counts.0 += 1;
        }
    }
    let mut rules = Vec::new();
    for (pattern, (neg, pos)) in groups {
        let size = neg + pos;
        if neg == 0 || pos == 0 {
            let decision = if pos > 0 { 1 } else { 0 };
            rules.push(Rule {
                pattern,
                decision,
                kind: RuleKind::Certain,
                plausibility: F::one(),
                support: size,
            });
        } else {
            for (decision, support) in [(0u8, neg), (1u8, pos)] {
                rules.push(Rule {
                    pattern: pattern.clone(),
                    decision,
                    kind: RuleKind::Possible,
                    plausibility: F::from_count(support) / F::from_count(size),
                    support,
                });
            }
        }
    }
    Ok(RuleSet {
        schema: table.schema().clone(),
        cuts: table.cuts().clone(),
        rules,
    })
}

/// Renders a plausibility to five decimal places, truncating rather than
/// rounding, so 1/3 prints as 0.33333 and 1/15 as 0.06666.
pub fn format_plausibility<F: Scalar>(p: F) -> String {
    let p = p.to_f64().expect("plausibility fits in f64");
    if p >= 1.0 {
        return "1.00000".into();
    }
    let scaled = (p * 1e5 + 1e-6).floor() as u32;
    format!("0.{scaled:05}")
}

impl<F: Scalar> RuleSet<F> {
    pub fn schema(&self) -> &Schema<F> {
        &self.schema
    }

    pub fn cuts(&self) -> &CutPointSet<F> {
        &self.cuts
    }

    pub fn rules(&self) -> &[Rule<F>] {
        &self.rules
    }

    pub fn certain_count(&self) -> usize {
        self.rules
            .iter()
            .filter(|r| r.kind == RuleKind::Certain)
            .count()
    }

    pub fn possible_count(&self) -> usize {
        self.rules
            .iter()
            .filter(|r| r.kind == RuleKind::Possible)
            .count()
    }

    fn condition_indices(&self) -> Vec<usize> {
        self.schema.condition_indices()
    }

    /// Interval label for bin `b` of a numeric attribute: half-open except
    /// the final bin, which closes on the upper bound.
    fn interval_label(&self, attr: usize, b: u32) -> String {
        let (lo, hi) = self.schema.attributes()[attr]
            .kind
            .bounds()
            .expect("numeric attribute has bounds");
        let cuts = self
            .cuts
            .cuts_for(attr)
            .expect("numeric attribute has cuts");
        let b = b as usize;
        let left = if b == 0 { lo } else { cuts[b - 1] };
        let last = b == cuts.len();
        let right = if last { hi } else { cuts[b] };
        let left = left.to_f64().expect("bound fits in f64");
        let right = right.to_f64().expect("bound fits in f64");
        if last {
            format!("[{left:.2}, {right:.2}]")
        } else {
            format!("[{left:.2}, {right:.2})")
        }
    }

    /// One plain-language line per rule, in stored order.
    pub fn render(&self) -> String {
        let decision_attr = self.schema.decision_attribute();
        let mut out = String::new();
        for rule in &self.rules {
            let mut parts = Vec::new();
            for (slot, &attr) in self.condition_indices().iter().enumerate() {
                let a = &self.schema.attributes()[attr];
                let value = rule.pattern[slot];
                let shown = match &a.kind {
                    AttributeKind::Categorical(_) => self.schema.label_of(attr, value),
                    _ => self.interval_label(attr, value),
                };
                parts.push(format!("{} = {}", a.name, shown));
            }
            let label = self
                .schema
                .label_of(self.schema.decision_index(), rule.decision as u32);
            let conclusion = match rule.kind {
                RuleKind::Certain => {
                    format!("Then {} = Most Probably {}", decision_attr.name, label)
                }
                RuleKind::Possible => format!(
                    "Then {} = {} with plausibility = {}",
                    decision_attr.name,
                    label,
                    format_plausibility(rule.plausibility)
                ),
            };
            out.push_str(&format!("If {} {}\n", parts.join(" and "), conclusion));
        }
        out
    }

    /// Machine-readable form: `#` header lines carrying the bin count and
    /// cut points, then one tab-separated row per rule.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("#bins\t{}\n", self.cuts.bins()));
        for entry in self.cuts.entries() {
            let cuts: Vec<String> = entry.cuts.iter().map(|c| c.to_string()).collect();
            out.push_str(&format!(
                "#cut\t{}\t{}\n",
                self.schema.attributes()[entry.attr].name,
                cuts.join(" ")
            ));
        }
        for rule in &self.rules {
            let pattern: Vec<String> = rule.pattern.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                pattern.join("\t"),
                rule.decision,
                rule.kind.as_str(),
                rule.plausibility,
                rule.support
            ));
        }
        out
    }

    /// Parses the `to_tsv` format back, validating the cuts against
    /// `schema` and each rule's arity and decision.
    pub fn from_tsv<R: BufRead>(source: R, schema: &Schema<F>) -> Result<Self> {
        let mut bins = None;
        let mut entries = Vec::new();
        let mut rules: Vec<Rule<F>> = Vec::new();
        let width = schema.condition_indices().len();
        for (n, line) in source.lines().enumerate() {
            let line = line?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let bad = |message: String| Error::Row {
                line: n as u64 + 1,
                message,
            };
            if let Some(rest) = fields[0].strip_prefix('#') {
                match rest {
                    "bins" => {
                        let k = fields
                            .get(1)
                            .and_then(|s| s.parse::<usize>().ok())
                            .ok_or_else(|| bad("malformed #bins line".into()))?;
                        bins = Some(k);
                    }
                    "cut" => {
                        if fields.len() != 3 {
                            return Err(bad("malformed #cut line".into()));
                        }
                        let attr = schema
                            .index_of(fields[1])
                            .ok_or_else(|| bad(format!("unknown attribute '{}'", fields[1])))?;
                        let mut cuts = Vec::new();
                        for tok in fields[2].split_whitespace() {
                            let c = tok
                                .parse::<F>()
                                .map_err(|_| bad(format!("bad cut value '{tok}'")))?;
                            cuts.push(c);
                        }
                        entries.push(CutEntry { attr, cuts });
                    }
                    other => return Err(bad(format!("unknown header '#{other}'"))),
                }
                continue;
            }
            if fields.len() != width + 4 {
                return Err(bad(format!(
                    "expected {} fields, found {}",
                    width + 4,
                    fields.len()
                )));
            }
            let mut pattern = Vec::with_capacity(width);
            for tok in &fields[..width] {
                pattern.push(
                    tok.parse::<u32>()
                        .map_err(|_| bad(format!("bad pattern value '{tok}'")))?,
                );
            }
            let decision = fields[width]
                .parse::<u8>()
                .ok()
                .filter(|d| *d <= 1)
                .ok_or_else(|| bad(format!("bad decision '{}'", fields[width])))?;
            let kind = RuleKind::parse(fields[width + 1]).map_err(|e| bad(e.to_string()))?;
            let plausibility = fields[width + 2]
                .parse::<F>()
                .map_err(|_| bad(format!("bad plausibility '{}'", fields[width + 2])))?;
            let support = fields[width + 3]
                .parse::<usize>()
                .map_err(|_| bad(format!("bad support '{}'", fields[width + 3])))?;
            rules.push(Rule {
                pattern,
                decision,
                kind,
                plausibility,
                support,
            });
        }
        let bins =
            bins.ok_or_else(|| Error::Schema("rule file is missing a #bins header".into()))?;
        let cuts = CutPointSet::new(schema, entries, bins)?;
        rules.sort_by(|a, b| a.pattern.cmp(&b.pattern).then(a.decision.cmp(&b.decision)));
        Ok(Self {
            schema: schema.clone(),
            cuts,
            rules,
        })
    }

    /// Predicts the decision for one condition pattern. Returns `None`
    /// (abstain) when no rule matches or the matching possible rules tie.
    pub fn predict(&self, pattern: &[u32]) -> Result<Option<u8>> {
        let width = self.condition_indices().len();
        if pattern.len() != width {
            return Err(Error::Parameter(format!(
                "pattern has {} values, expected {}",
                pattern.len(),
                width
            )));
        }
        let start = self
            .rules
            .partition_point(|r| r.pattern.as_slice() < pattern);
        let matching: Vec<&Rule<F>> = self.rules[start..]
            .iter()
            .take_while(|r| r.pattern == pattern)
            .collect();
        match matching.as_slice() {
            [] => Ok(None),
            [only] => Ok(Some(only.decision)),
            rules => {
                let mut best: Option<&Rule<F>> = None;
                let mut tied = false;
                for rule in rules {
                    match best {
                        None => best = Some(rule),
                        Some(b) => {
                            if rule.plausibility > b.plausibility {
                                best = Some(rule);
                                tied = false;
                            } else if rule.plausibility == b.plausibility {
                                tied = true;
                            }
                        }
                    }
                }
                if tied {
                    Ok(None)
                } else {
                    Ok(best.map(|r| r.decision))
                }
            }
        }
    }
}

/// Outcome of applying a rule set to a labelled test table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Evaluation {
    pub total: usize,
    pub predicted: usize,
    pub correct: usize,
}

impl Evaluation {
    pub fn abstained(&self) -> usize {
        self.total - self.predicted
    }

    /// Fraction of predictions that were right; `None` if every record
    /// was abstained on.
    pub fn accuracy<F: Scalar>(&self) -> Option<F> {
        if self.predicted == 0 {
            None
        } else {
            Some(F::from_count(self.correct) / F::from_count(self.predicted))
        }
    }

    pub fn coverage<F: Scalar>(&self) -> F {
        F::from_count(self.predicted) / F::from_count(self.total)
    }

    pub fn to_text(&self) -> String {
        let accuracy = match self.accuracy::<f64>() {
            Some(a) => a.to_string(),
            None => "n/a".into(),
        };
        format!(
            "records={}\npredicted={}\nabstained={}\ncorrect={}\naccuracy={}\ncoverage={}\n",
            self.total,
            self.predicted,
            self.abstained(),
            self.correct,
            accuracy,
            self.coverage::<f64>()
        )
    }
}

/// Scores `rules` against a test table discretized with the same cut points.
pub fn evaluate<F: Scalar>(rules: &RuleSet<F>, test: &DiscretizedTable<F>) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(Error::Parameter("test table is empty".into()));
    }
    if test.cuts() != rules.cuts() {
        return Err(Error::Parameter(
            "test table was discretized with different cut points".into(),
        ));
    }
    let mut predicted = 0;
    let mut correct = 0;
    for i in 0..test.len() {
        if let Some(d) = rules.predict(&test.condition_row(i))? {
            predicted += 1;
            if d == test.decision(i) {
                correct += 1;
            }
        }
    }
    Ok(Evaluation {
        total: test.len(),
        predicted,
        correct,
    })
}

//! Synthetic survey-shaped data with an optional planted threshold rule,
//! for exercising the optimizer against a known ground truth.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::table::{AttributeKind, InformationTable, Schema, Value};

/// Which side of the threshold satisfies the condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    GreaterThan,
    LessThan,
}

/// One planted condition: a numeric attribute compared against a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedCondition<F> {
    pub attribute: usize,
    pub threshold: F,
    pub direction: Direction,
}

impl<F: Scalar> PlantedCondition<F> {
    pub fn holds(&self, value: F) -> bool {
        match self.direction {
            Direction::GreaterThan => value > self.threshold,
            Direction::LessThan => value < self.threshold,
        }
    }
}

/// Generator settings: record count, label noise rate, and the planted
/// rule (conjunction of conditions). An empty rule means labels are fair
/// coin flips.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec<F> {
    records: usize,
    noise: F,
    rule: Vec<PlantedCondition<F>>,
}

impl<F: Scalar> SynthSpec<F> {
    pub fn new(
        records: usize,
        noise: F,
        rule: Vec<PlantedCondition<F>>,
        schema: &Schema<F>,
    ) -> Result<Self> {
        if records == 0 {
            return Err(Error::Parameter("record count must be positive".into()));
        }
        if noise < F::zero() || noise >= F::from_count(1) / F::from_count(2) {
            return Err(Error::Parameter("noise rate must lie in [0, 0.5)".into()));
        }
        for cond in &rule {
            let attr = schema.attributes().get(cond.attribute).ok_or_else(|| {
                Error::Parameter(format!("attribute index {} out of range", cond.attribute))
            })?;
            if cond.attribute == schema.decision_index() {
                return Err(Error::Parameter(
                    "planted rule cannot involve the decision attribute".into(),
                ));
            }
            let (lo, hi) = attr.kind.bounds().ok_or_else(|| {
                Error::Parameter(format!(
                    "planted rule attribute '{}' must be numeric",
                    attr.name
                ))
            })?;
            if cond.threshold <= lo || cond.threshold >= hi {
                return Err(Error::Parameter(format!(
                    "threshold {} for '{}' must lie strictly inside [{}, {}]",
                    cond.threshold, attr.name, lo, hi
                )));
            }
        }
        Ok(Self {
            records,
            noise,
            rule,
        })
    }

    /// Parses `key=value` settings separated by newlines or semicolons.
    /// Recognized keys: `records`, `noise`, and `rule`, whose value is a
    /// conjunction like `Mothers Age > 25 and Education < 7`.
    pub fn parse(config: &str, schema: &Schema<F>) -> Result<Self> {
        let mut records = None;
        let mut noise = F::zero();
        let mut rule = Vec::new();
        for part in config.split(['\n', ';']) {
            let part = part.trim();
            if part.is_empty() || part.starts_with('#') {
                continue;
            }
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, found '{part}'")))?;
            let value = value.trim();
            match key.trim() {
                "records" => {
                    records = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| Error::Config(format!("bad record count '{value}'")))?,
                    );
                }
                "noise" => {
                    noise = value
                        .parse::<F>()
                        .map_err(|_| Error::Config(format!("bad noise rate '{value}'")))?;
                }
                "rule" => {
                    rule = parse_rule(value, schema)?;
                }
                other => {
                    return Err(Error::Config(format!("unknown setting '{other}'")));
                }
            }
        }
        let records =
            records.ok_or_else(|| Error::Config("missing required setting 'records'".into()))?;
        Self::new(records, noise, rule, schema)
    }

    pub fn records(&self) -> usize {
        self.records
    }

    pub fn noise(&self) -> F {
        self.noise
    }

    pub fn rule(&self) -> &[PlantedCondition<F>] {
        &self.rule
    }

    /// True when every condition holds for the record's drawn values.
    fn rule_holds(&self, values: &[Value<F>]) -> bool {
        self.rule.iter().all(|cond| {
            values[cond.attribute]
                .as_real()
                .is_some_and(|v| cond.holds(v))
        })
    }
}

fn parse_rule<F: Scalar>(text: &str, schema: &Schema<F>) -> Result<Vec<PlantedCondition<F>>> {
    let mut out = Vec::new();
    for clause in text.split(" and ") {
        let clause = clause.trim();
        let (op_pos, direction) = match (clause.find('>'), clause.find('<')) {
            (Some(p), None) => (p, Direction::GreaterThan),
            (None, Some(p)) => (p, Direction::LessThan),
            _ => {
                return Err(Error::Config(format!(
                    "condition '{clause}' must contain exactly one of '>' or '<'"
                )))
            }
        };
        let name = clause[..op_pos].trim();
        let attribute = schema
            .index_of(name)
            .ok_or_else(|| Error::Config(format!("unknown attribute '{name}'")))?;
        let raw = clause[op_pos + 1..].trim();
        let threshold = raw
            .parse::<F>()
            .map_err(|_| Error::Config(format!("bad threshold '{raw}'")))?;
        out.push(PlantedCondition {
            attribute,
            threshold,
            direction,
        });
    }
    Ok(out)
}

/// Draws `spec.records()` records under `schema`. Attribute values are
/// drawn uniformly in schema order; the decision is the planted rule's
/// verdict (or a coin flip if no rule), then flipped with probability
/// `noise`. The same seed always yields the same table.
pub fn synthesize<F: Scalar>(
    schema: &Schema<F>,
    spec: &SynthSpec<F>,
    seed: u64,
) -> Result<InformationTable<F>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let decision_index = schema.decision_index();
    let mut rows = Vec::with_capacity(spec.records());
    for _ in 0..spec.records() {
        let mut values = Vec::with_capacity(schema.len());
        for (i, attr) in schema.attributes().iter().enumerate() {
            if i == decision_index {
                values.push(Value::Code(0));
                continue;
            }
            let v = match &attr.kind {
                AttributeKind::Categorical(cats) => {
                    Value::Code(cats[rng.random_range(0..cats.len())].code)
                }
                AttributeKind::Integer { lo, hi } => {
                    let lo = lo.to_i64().expect("integer bound fits in i64");
                    let hi = hi.to_i64().expect("integer bound fits in i64");
                    Value::Int(rng.random_range(lo..=hi))
                }
                AttributeKind::Real { lo, hi } => Value::Real(rng.random_range(*lo..*hi)),
            };
            values.push(v);
        }
        let mut decision = if spec.rule().is_empty() {
            rng.random_bool(0.5)
        } else {
            spec.rule_holds(&values)
        };
        let flip: F = rng.random_range(F::zero()..F::one());
        if flip < spec.noise() {
            decision = !decision;
        }
        values[decision_index] = Value::Code(decision as u32);
        rows.push(values);
    }
    InformationTable::from_rows(schema.clone(), rows)
}

//! Sidecar schema files: one attribute per line,
//! `name : kind : domain : role`.
//!
//! ```text
//! Race : categorical : 1=White 2=African 3=Coloured 4=Asian : condition
//! Mothers Age : real : 13..50 : condition
//! HIV : categorical : 0=Negative 1=Positive : decision
//! ```

use roughcut::table::{Attribute, Category, Role, Schema};
use roughcut::{Error, Result};

pub fn parse_schema(text: &str) -> Result<Schema<f64>> {
    let mut attributes = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let n = index + 1;
        let parts: Vec<&str> = line.split(':').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Schema(format!(
                "schema line {n}: expected 'name : kind : domain : role'"
            )));
        }
        let (name, kind, domain, role) = (parts[0], parts[1], parts[2], parts[3]);
        if name.is_empty() {
            return Err(Error::Schema(format!(
                "schema line {n}: empty attribute name"
            )));
        }
        let role = match role {
            "condition" => Role::Condition,
            "decision" => Role::Decision,
            other => {
                return Err(Error::Schema(format!(
                    "schema line {n}: unknown role '{other}'"
                )))
            }
        };
        let attribute = match kind {
            "categorical" => {
                let mut categories = Vec::new();
                for token in domain.split_whitespace() {
                    let (code, label) = token.split_once('=').ok_or_else(|| {
                        Error::Schema(format!(
                            "schema line {n}: category '{token}' is not code=Label"
                        ))
                    })?;
                    let code = code.parse::<u32>().map_err(|_| {
                        Error::Schema(format!("schema line {n}: bad category code '{code}'"))
                    })?;
                    categories.push(Category::new(code, label));
                }
                Attribute::categorical(name, categories, role)
            }
            "integer" | "real" => {
                if role == Role::Decision {
                    return Err(Error::Schema(format!(
                        "schema line {n}: the decision attribute must be categorical"
                    )));
                }
                let (lo, hi) = domain.split_once("..").ok_or_else(|| {
                    Error::Schema(format!("schema line {n}: numeric domain is not lo..hi"))
                })?;
                let parse = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Schema(format!("schema line {n}: bad bound '{s}'")))
                };
                let (lo, hi) = (parse(lo)?, parse(hi)?);
                if kind == "integer" {
                    Attribute::integer(name, lo, hi)
                } else {
                    Attribute::real(name, lo, hi)
                }
            }
            other => {
                return Err(Error::Schema(format!(
                    "schema line {n}: unknown kind '{other}'"
                )))
            }
        };
        attributes.push(attribute);
    }
    Schema::new(attributes)
}

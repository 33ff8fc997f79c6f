//! JSON family documents and bundled presets.

use serde::{Deserialize, Serialize};

use super::family::OffspringFamily;
use super::law::{OffspringLaw, TypedWord};
use crate::error::{Error, Result};

pub const DEFAULT_TAIL_MASS: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct FamilyDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "Kprime", default)]
    pub k_prime: usize,
    pub lambda: Vec<u64>,
    pub types: Vec<TypeDoc>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TypeDoc {
    Explicit {
        words: Vec<WordDoc>,
    },
    Counts {
        counts: Vec<CountDoc>,
    },
    PoissonProduct {
        means: Vec<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        tail_mass: Option<f64>,
    },
    GeometricProduct {
        means: Vec<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        tail_mass: Option<f64>,
    },
    BinomialProduct {
        trials: Vec<u32>,
        probs: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordDoc {
    pub w: Vec<u16>,
    pub p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountDoc {
    pub k: Vec<u32>,
    pub p: f64,
}

fn config_err(path: impl Into<String>, e: impl std::fmt::Display) -> Error {
    Error::Config {
        path: path.into(),
        message: e.to_string(),
    }
}

impl FamilyDoc {
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawDoc = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            config_err(
                path,
                format!("{inner} (line {}, column {})", inner.line(), inner.column()),
            )
        })?;
        let types = raw
            .types
            .into_iter()
            .enumerate()
            .map(|(i, v)| parse_type_doc(i, v))
            .collect::<Result<_>>()?;
        Ok(FamilyDoc {
            name: raw.name,
            k: raw.k,
            k_prime: raw.k_prime,
            lambda: raw.lambda,
            types,
        })
    }

    /// Materialises the document, reporting semantic errors with a field path.
    pub fn build(&self) -> Result<OffspringFamily> {
        let t = self.k + self.k_prime;
        if self.types.len() != t {
            return Err(config_err(
                "types",
                format!(
                    "expected K + Kprime = {t} entries, found {}",
                    self.types.len()
                ),
            ));
        }
        let mut laws = Vec::with_capacity(t);
        for (i, doc) in self.types.iter().enumerate() {
            let at = |field: &str| format!("types[{i}]{field}");
            let law = match doc {
                TypeDoc::Explicit { words } => {
                    let mut support = Vec::with_capacity(words.len());
                    for (j, wd) in words.iter().enumerate() {
                        if let Some(&s) = wd.w.iter().find(|&&s| s == 0 || s as usize > t) {
                            return Err(config_err(
                                at(&format!(".words[{j}].w")),
                                format!("type {s} outside 1..={t}"),
                            ));
                        }
                        support.push((TypedWord::new(wd.w.iter().map(|s| s - 1).collect()), wd.p));
                    }
                    OffspringLaw::new(support, t).map_err(|e| config_err(at(".words"), e))?
                }
                TypeDoc::Counts { counts } => {
                    let c = counts.iter().map(|c| (c.k.clone(), c.p)).collect();
                    OffspringLaw::from_count_law(c, t, 0.0)
                        .map_err(|e| config_err(at(".counts"), e))?
                }
                TypeDoc::PoissonProduct { means, tail_mass } => {
                    check_len(means.len(), t, &at(".means"))?;
                    OffspringLaw::poisson_product(means, tail_mass.unwrap_or(DEFAULT_TAIL_MASS))
                        .map_err(|e| config_err(at(".means"), e))?
                }
                TypeDoc::GeometricProduct { means, tail_mass } => {
                    check_len(means.len(), t, &at(".means"))?;
                    OffspringLaw::geometric_product(means, tail_mass.unwrap_or(DEFAULT_TAIL_MASS))
                        .map_err(|e| config_err(at(".means"), e))?
                }
                TypeDoc::BinomialProduct { trials, probs } => {
                    check_len(trials.len(), t, &at(".trials"))?;
                    OffspringLaw::binomial_product(trials, probs)
                        .map_err(|e| config_err(at(".probs"), e))?
                }
            };
            laws.push(law);
        }
        OffspringFamily::new(self.k, self.k_prime, laws, self.lambda.clone()).map_err(|e| {
            let path = if matches!(&e, Error::InvalidFamily(m) if m.contains("lambda")) {
                "lambda"
            } else {
                "types"
            };
            config_err(path, e)
        })
    }

    /// Explicit-word document for a materialised family.
    pub fn from_family(family: &OffspringFamily, name: Option<String>) -> Self {
        let types = family
            .laws()
            .iter()
            .map(|law| TypeDoc::Explicit {
                words: law
                    .support()
                    .iter()
                    .map(|(w, p)| WordDoc {
                        w: w.symbols.iter().map(|s| s + 1).collect(),
                        p: *p,
                    })
                    .collect(),
            })
            .collect();
        FamilyDoc {
            name,
            k: family.k(),
            k_prime: family.k_prime(),
            lambda: family.lambda().to_vec(),
            types,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    #[serde(default)]
    name: Option<String>,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "Kprime", default)]
    k_prime: usize,
    lambda: Vec<u64>,
    types: Vec<serde_json::Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitBody {
    words: Vec<WordDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CountsBody {
    counts: Vec<CountDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductBody {
    means: Vec<f64>,
    #[serde(default)]
    tail_mass: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BinomialBody {
    trials: Vec<u32>,
    probs: Vec<f64>,
}

fn body<T: serde::de::DeserializeOwned>(i: usize, v: serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." {
            format!("types[{i}]")
        } else {
            format!("types[{i}].{inner}")
        };
        config_err(path, e.into_inner())
    })
}

/// Per-type documents are decoded separately so errors keep a full path.
fn parse_type_doc(i: usize, v: serde_json::Value) -> Result<TypeDoc> {
    let serde_json::Value::Object(mut map) = v else {
        return Err(config_err(format!("types[{i}]"), "expected an object"));
    };
    let kind = match map.remove("kind") {
        Some(serde_json::Value::String(k)) => k,
        _ => {
            return Err(config_err(
                format!("types[{i}].kind"),
                "missing or non-string kind",
            ))
        }
    };
    let v = serde_json::Value::Object(map);
    Ok(match kind.as_str() {
        "explicit" => TypeDoc::Explicit {
            words: body::<ExplicitBody>(i, v)?.words,
        },
        "counts" => TypeDoc::Counts {
            counts: body::<CountsBody>(i, v)?.counts,
        },
        "poisson_product" => {
            let b: ProductBody = body(i, v)?;
            TypeDoc::PoissonProduct { means: b.means, tail_mass: b.tail_mass }
        }
        "geometric_product" => {
            let b: ProductBody = body(i, v)?;
            TypeDoc::GeometricProduct { means: b.means, tail_mass: b.tail_mass }
        }
        "binomial_product" => {
            let b: BinomialBody = body(i, v)?;
            TypeDoc::BinomialProduct { trials: b.trials, probs: b.probs }
        }
        other => {
            return Err(config_err(
                format!("types[{i}].kind"),
                format!("unknown kind `{other}`; expected explicit, counts, poisson_product, geometric_product or binomial_product"),
            ))
        }
    })
}

fn check_len(found: usize, expected: usize, path: &str) -> Result<()> {
    if found != expected {
        return Err(config_err(
            path,
            format!("expected {expected} entries, found {found}"),
        ));
    }
    Ok(())
}

pub fn parse_family(text: &str) -> Result<OffspringFamily> {
    FamilyDoc::parse(text)?.build()
}

const PRESETS: &[(&str, &str)] = &[
    (
        "monotype_binary",
        include_str!("../../presets/monotype_binary.json"),
    ),
    (
        "monotype_ternary",
        include_str!("../../presets/monotype_ternary.json"),
    ),
    (
        "poisson_reducible",
        include_str!("../../presets/poisson_reducible.json"),
    ),
    ("two_type", include_str!("../../presets/two_type.json")),
    ("poisson2", include_str!("../../presets/poisson2.json")),
    ("localized", include_str!("../../presets/localized.json")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn preset(name: &str) -> Result<OffspringFamily> {
    let text = preset_text(name).ok_or_else(|| {
        config_err(
            "family",
            format!(
                "unknown preset `{name}`; available: {}",
                preset_names().collect::<Vec<_>>().join(", ")
            ),
        )
    })?;
    parse_family(text)
}

/// Loads `preset:<name>` or a JSON file path. Returns the family and the
/// source text it was built from.
pub fn load_family(spec: &str) -> Result<(OffspringFamily, String)> {
    if let Some(name) = spec.strip_prefix("preset:") {
        let fam = preset(name)?;
        return Ok((fam, preset_text(name).unwrap_or_default().to_string()));
    }
    let text =
        std::fs::read_to_string(spec).map_err(|e| config_err("family", format!("{spec}: {e}")))?;
    Ok((parse_family(&text)?, text))
}

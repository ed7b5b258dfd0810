//! Combination strategies that turn a scored registry into a feature list.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::cross::top_indices;
use crate::error::{Error, Result};

pub const DEFAULT_FUZZY_KEYWORDS: [&str; 3] = ["pca", "energy", "correlation"];

/// `module:<prefix>` | `topk:<K>` | `modules:<p>,<p>` | `all` | `fuzzy[:<kw>,<kw>]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Strategy {
    Module(String),
    TopK(usize),
    Modules(Vec<String>),
    All,
    Fuzzy(Vec<String>),
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect()
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |why: &str| Error::InvalidArgument(format!("strategy {s:?}: {why}"));
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "all" if rest.is_empty() => Ok(Strategy::All),
            "module" if !rest.trim().is_empty() => Ok(Strategy::Module(rest.trim().to_string())),
            "modules" => {
                let list = split_list(rest);
                if list.is_empty() {
                    return Err(bad("empty module list"));
                }
                Ok(Strategy::Modules(list))
            }
            "topk" => match rest.trim().parse::<usize>() {
                Ok(k) if k > 0 => Ok(Strategy::TopK(k)),
                _ => Err(bad("K must be a positive integer")),
            },
            "fuzzy" => {
                let list = split_list(rest);
                Ok(Strategy::Fuzzy(if list.is_empty() {
                    DEFAULT_FUZZY_KEYWORDS.iter().map(|k| k.to_string()).collect()
                } else {
                    list
                }))
            }
            _ => Err(bad("unknown form")),
        }
    }
}

impl TryFrom<String> for Strategy {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Strategy> for String {
    fn from(s: Strategy) -> String {
        s.to_string()
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Module(p) => write!(f, "module:{p}"),
            Strategy::TopK(k) => write!(f, "topk:{k}"),
            Strategy::Modules(ps) => write!(f, "modules:{}", ps.join(",")),
            Strategy::All => f.write_str("all"),
            Strategy::Fuzzy(ks) => write!(f, "fuzzy:{}", ks.join(",")),
        }
    }
}

/// `name` lies under `prefix` (a trailing dot on the prefix is optional).
pub fn has_prefix(name: &str, prefix: &str) -> bool {
    let p = prefix.trim_end_matches('.');
    name == p || (name.starts_with(p) && name.as_bytes().get(p.len()) == Some(&b'.'))
}

fn by_prefix(names: &[String], prefix: &str) -> Result<Vec<usize>> {
    let hits: Vec<usize> = (0..names.len()).filter(|&i| has_prefix(&names[i], prefix)).collect();
    if hits.is_empty() {
        return Err(Error::EmptySelection(format!("no feature under prefix {prefix:?}")));
    }
    Ok(hits)
}

/// Deterministic feature list for `strategy`. Registry order is kept except for
/// `topk`, which lists by descending importance.
pub fn assemble_combination(strategy: &Strategy, names: &[String], importance: &[f64]) -> Result<Vec<String>> {
    if names.is_empty() {
        return Err(Error::EmptyFeatureSet);
    }
    let picked: Vec<usize> = match strategy {
        Strategy::All => (0..names.len()).collect(),
        Strategy::Module(p) => by_prefix(names, p)?,
        Strategy::Modules(ps) => {
            let mut keep = HashSet::new();
            for p in ps {
                keep.extend(by_prefix(names, p)?);
            }
            (0..names.len()).filter(|i| keep.contains(i)).collect()
        }
        Strategy::TopK(k) => {
            if *k > names.len() {
                return Err(Error::InvalidArgument(format!(
                    "topk:{k} exceeds the {} available features",
                    names.len()
                )));
            }
            top_indices(names, importance, *k)
        }
        Strategy::Fuzzy(kws) => {
            let lower: Vec<String> = names.iter().map(|n| n.to_lowercase()).collect();
            let mut keep = HashSet::new();
            for kw in kws {
                let k = kw.to_lowercase();
                let hits: Vec<usize> = (0..names.len()).filter(|&i| lower[i].contains(&k)).collect();
                if hits.is_empty() {
                    return Err(Error::EmptySelection(format!("no feature name contains {kw:?}")));
                }
                keep.extend(hits);
            }
            (0..names.len()).filter(|i| keep.contains(i)).collect()
        }
    };
    Ok(picked.into_iter().map(|i| names[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        ["energy.global", "texture.pca.c0.mean", "correlation.adjacent.0", "texture.glcm.f0.a0.contrast", "energyx.odd"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    #[test]
    fn grammar_round_trips() {
        for s in ["module:energy", "topk:80", "modules:correlation.,texture.", "all", "fuzzy:pca"] {
            assert_eq!(s.parse::<Strategy>().unwrap().to_string(), s);
        }
        assert_eq!(
            "fuzzy".parse::<Strategy>().unwrap(),
            Strategy::Fuzzy(vec!["pca".into(), "energy".into(), "correlation".into()])
        );
        assert!("topk:0".parse::<Strategy>().is_err());
        assert!("nope".parse::<Strategy>().is_err());
    }

    #[test]
    fn prefix_is_segment_aware() {
        let n = names();
        let got = assemble_combination(&Strategy::Module("energy".into()), &n, &[0.0; 5]).unwrap();
        assert_eq!(got, vec!["energy.global".to_string()]);
    }

    #[test]
    fn union_and_fuzzy() {
        let n = names();
        let s: Strategy = "modules:correlation.,texture.".parse().unwrap();
        assert_eq!(assemble_combination(&s, &n, &[0.0; 5]).unwrap().len(), 3);
        let s: Strategy = "fuzzy:PCA".parse().unwrap();
        assert_eq!(assemble_combination(&s, &n, &[0.0; 5]).unwrap(), vec!["texture.pca.c0.mean".to_string()]);
        let err = assemble_combination(&"fuzzy:zzz".parse().unwrap(), &n, &[0.0; 5]).unwrap_err();
        assert!(err.to_string().contains("zzz"));
    }

    #[test]
    fn topk_orders_by_importance() {
        let n = names();
        let got = assemble_combination(&Strategy::TopK(2), &n, &[0.1, 0.5, 0.5, 0.0, 0.2]).unwrap();
        assert_eq!(got, vec!["correlation.adjacent.0".to_string(), "texture.pca.c0.mean".to_string()]);
        assert!(assemble_combination(&Strategy::TopK(6), &n, &[0.0; 5]).is_err());
    }
}

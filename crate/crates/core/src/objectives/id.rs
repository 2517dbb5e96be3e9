//! Corpus id grammar.
//!
//! ```text
//! id    := name (":" key "=" value)*
//! name  := quadratic | power | rosenbrock | doublewell | quartic2d | constant
//! ```
//!
//! | name         | keys (default)          |
//! |--------------|-------------------------|
//! | `quadratic`  | `dim` (1), `cond` (1)   |
//! | `power`      | `q` (4), `dim` (1)      |
//! | `constant`   | `dim` (1)               |
//!
//! `rosenbrock`, `doublewell` and `quartic2d` take no keys.

use std::collections::BTreeMap;

use super::corpus;
use super::Objective;
use crate::error::{Error, Result};

pub fn from_id(id: &str) -> Result<Objective> {
    let unknown = || Error::UnknownObjective(id.to_string());
    let mut parts = id.trim().split(':');
    let name = parts.next().ok_or_else(unknown)?;
    let mut keys = BTreeMap::new();
    for part in parts {
        let (k, v) = part.split_once('=').ok_or_else(unknown)?;
        if keys.insert(k.trim(), v.trim()).is_some() {
            return Err(unknown());
        }
    }
    let allowed: &[&str] = match name {
        "quadratic" => &["dim", "cond"],
        "power" => &["q", "dim"],
        "constant" => &["dim"],
        "rosenbrock" | "doublewell" | "quartic2d" => &[],
        _ => return Err(unknown()),
    };
    if keys.keys().any(|k| !allowed.contains(k)) {
        return Err(unknown());
    }
    let dim = parse_or(&keys, "dim", 1usize, id)?;
    match name {
        "quadratic" => corpus::ill_conditioned_quadratic(dim, parse_or(&keys, "cond", 1.0, id)?),
        "power" => corpus::power(parse_or(&keys, "q", 4u32, id)?, dim),
        "constant" => corpus::constant(dim),
        "rosenbrock" => Ok(corpus::rosenbrock()),
        "doublewell" => Ok(corpus::double_well()),
        "quartic2d" => Ok(corpus::quartic_2d()),
        _ => unreachable!(),
    }
}

fn parse_or<T: std::str::FromStr>(keys: &BTreeMap<&str, &str>, key: &str, default: T, id: &str) -> Result<T> {
    match keys.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Config(format!("bad value `{v}` for `{key}` in objective id `{id}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_corpus_ids() {
        let q = from_id("quadratic:dim=10:cond=100").unwrap();
        assert_eq!(q.dim, 10);
        assert_eq!(q.id, "quadratic:dim=10:cond=100");
        assert_eq!(from_id("power:q=4").unwrap().known_loj_exponent, Some(0.75));
        assert_eq!(from_id("power:q=6:dim=2").unwrap().dim, 2);
        assert_eq!(from_id("rosenbrock").unwrap().dim, 2);
        assert_eq!(from_id("doublewell").unwrap().dim, 1);
        assert_eq!(from_id("quadratic").unwrap().id, "quadratic");
    }

    #[test]
    fn canonical_ids_round_trip() {
        for obj in corpus::builtin_corpus() {
            assert_eq!(from_id(&obj.id).unwrap().id, obj.id);
        }
    }

    #[test]
    fn rejects_unknown() {
        for bad in ["nope", "rosenbrock:dim=3", "power:q", "quadratic:dim=2:dim=3", ""] {
            assert!(from_id(bad).is_err(), "{bad}");
        }
        assert!(matches!(from_id("power:q=3"), Err(Error::Config(_))));
        assert!(matches!(from_id("power:q=x"), Err(Error::Config(_))));
    }
}

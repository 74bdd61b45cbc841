//! Penalty functions selected by name: `deficit`, `indicator`,
//! `capped_deficit(K)`, `increment`, `capped_increment(K)` and `none`.
//! Parameters may also be written after a colon, as in `capped_deficit:2`.

use anyhow::{bail, Context, Result};
use ruinkit_core::edpf::{capped_deficit, capped_increment, deficit, increment, indicator};
use ruinkit_core::{Penalty, PenaltySpec, Subsequent};

fn split(name: &str) -> Result<(&str, Option<f64>)> {
    let name = name.trim();
    let (head, arg) = if let Some((h, rest)) = name.split_once('(') {
        let inner = rest.strip_suffix(')').with_context(|| format!("unbalanced parenthesis in `{name}`"))?;
        (h, Some(inner))
    } else if let Some((h, a)) = name.split_once(':') {
        (h, Some(a))
    } else {
        (name, None)
    };
    let arg = match arg {
        None => None,
        Some(a) => {
            let v: f64 = a.trim().parse().with_context(|| format!("bad parameter `{a}` in `{name}`"))?;
            if !(v > 0.0) || !v.is_finite() {
                bail!("the cap in `{name}` must be finite and > 0");
            }
            Some(v)
        }
    };
    Ok((head.trim(), arg))
}

/// `None` stands for `none`.
pub fn parse(name: &str) -> Result<Option<Penalty>> {
    let (head, arg) = split(name)?;
    let f = match (head, arg) {
        ("none", None) => return Ok(None),
        ("deficit", None) => deficit(),
        ("indicator", None) => indicator(),
        ("increment", None) => increment(),
        ("capped_deficit", Some(k)) => capped_deficit(k),
        ("capped_increment", Some(k)) => capped_increment(k),
        ("capped_deficit" | "capped_increment", None) => bail!("`{head}` needs a cap, as in `{head}(2)`"),
        (_, Some(_)) if ["none", "deficit", "indicator", "increment"].contains(&head) => {
            bail!("`{head}` takes no parameter")
        }
        _ => bail!(
            "unknown penalty `{name}`; expected deficit, indicator, capped_deficit(K), increment, capped_increment(K) or none"
        ),
    };
    Ok(Some(f))
}

/// Penalty at ruin plus an optional stationary penalty at later records.
pub fn spec(first: &str, subsequent: Option<&str>) -> Result<PenaltySpec> {
    let first = parse(first)?.context("the penalty at ruin cannot be `none`")?;
    let subsequent = match subsequent.map(parse).transpose()?.flatten() {
        Some(f) => Subsequent::Stationary(f),
        None => Subsequent::None,
    };
    Ok(PenaltySpec { first, subsequent })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_parameters() {
        assert_eq!(parse("deficit").unwrap().unwrap()(0.3, 1.5), 1.5);
        assert_eq!(parse("indicator").unwrap().unwrap()(0.3, 0.0), 0.0);
        assert_eq!(parse("capped_deficit(2)").unwrap().unwrap()(0.0, 3.0), 2.0);
        assert_eq!(parse("capped_deficit:2").unwrap().unwrap()(0.0, 1.0), 1.0);
        assert_eq!(parse("increment").unwrap().unwrap()(1.0, 2.5), 1.5);
        assert_eq!(parse(" capped_increment( 0.5 ) ").unwrap().unwrap()(1.0, 2.5), 0.5);
        assert!(parse("none").unwrap().is_none());
    }

    #[test]
    fn bad_names() {
        for bad in ["capped_deficit", "deficit(1)", "cube", "capped_deficit(-1)", "capped_deficit(2", "capped_deficit:x"] {
            assert!(parse(bad).is_err(), "{bad}");
        }
        assert!(spec("none", None).is_err());
    }

    #[test]
    fn spec_shapes() {
        assert!(matches!(spec("deficit", None).unwrap().subsequent, Subsequent::None));
        assert!(matches!(spec("deficit", Some("none")).unwrap().subsequent, Subsequent::None));
        assert!(matches!(spec("deficit", Some("increment")).unwrap().subsequent, Subsequent::Stationary(_)));
    }
}

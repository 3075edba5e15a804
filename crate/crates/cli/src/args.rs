//! Parsers for the compact list-valued flags.

use monolattice::{Direction, Error, FeatureSpec, Result, Schema};

/// `+a,-b,c`: increasing, decreasing and unconstrained features.
pub fn parse_monotonic(text: &str) -> Result<Vec<(String, Direction)>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (direction, name) = match item.chars().next() {
                Some('+') => (Direction::Increasing, &item[1..]),
                Some('-') => (Direction::Decreasing, &item[1..]),
                _ => (Direction::None, item),
            };
            if name.is_empty() {
                return Err(Error::Config(format!("empty feature name in {text:?}")));
            }
            Ok((name.to_string(), direction))
        })
        .collect()
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad {what} {s:?}")))
}

/// A list of counts given either positionally (`2,3`), as a single value
/// for every feature (`3`), or by name (`a=3,b=2`).
pub fn apply_counts(
    schema: &mut Schema,
    text: &str,
    what: &str,
    set: impl Fn(&mut FeatureSpec, usize),
) -> Result<()> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.iter().any(|s| s.contains('=')) {
        for item in items {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("mixed named and positional {what} in {text:?}")))?;
            set(schema.feature_mut(name.trim())?, parse_usize(value, what)?);
        }
    } else if items.len() == 1 {
        let value = parse_usize(items[0], what)?;
        for f in &mut schema.features {
            set(f, value);
        }
    } else if items.len() == schema.features.len() {
        for (f, item) in schema.features.iter_mut().zip(items) {
            set(f, parse_usize(item, what)?);
        }
    } else {
        return Err(Error::Config(format!(
            "{} {what} values for {} features",
            items.len(),
            schema.features.len()
        )));
    }
    Ok(())
}

/// A schema of continuous, unconstrained features named by `columns`.
pub fn infer_schema(columns: &[String]) -> Result<Schema> {
    Schema::new(columns.iter().map(FeatureSpec::continuous).collect())
}

/// `4..20` (inclusive), `4-20`, or a single value.
pub fn parse_range(text: &str) -> Result<Vec<usize>> {
    let (lo, hi) = match text.split_once("..").or_else(|| text.split_once('-')) {
        Some((a, b)) => (parse_usize(a, "dimension")?, parse_usize(b.trim_start_matches('='), "dimension")?),
        None => {
            let d = parse_usize(text, "dimension")?;
            (d, d)
        }
    };
    if lo == 0 || lo > hi {
        return Err(Error::Config(format!("empty dimension range {text:?}")));
    }
    Ok((lo..=hi).collect())
}

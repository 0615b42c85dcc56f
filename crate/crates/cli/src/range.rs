//! Index lists such as `1..1000:10,1000`.
//!
//! Each comma-separated item is a single index or `a..b[:step]`, which
//! includes `b` when the step lands on it. Duplicates are dropped and the
//! result is sorted.

pub fn parse_indices(spec: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once("..") {
            None => out.push(parse_one(item)?),
            Some((lo, rest)) => {
                let (hi, step) = match rest.split_once(':') {
                    Some((hi, step)) => (hi, parse_one(step)?),
                    None => (rest, 1),
                };
                let (lo, hi) = (parse_one(lo)?, parse_one(hi.trim_start_matches('='))?);
                if step == 0 {
                    return Err(format!("zero step in `{item}`"));
                }
                if lo > hi {
                    return Err(format!("empty range `{item}`"));
                }
                out.extend((lo..=hi).step_by(step));
            }
        }
    }
    if out.is_empty() {
        return Err("no indices given".into());
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn parse_one(s: &str) -> Result<usize, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a nonnegative integer"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_singletons() {
        assert_eq!(parse_indices("2").unwrap(), vec![2]);
        assert_eq!(parse_indices("1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_indices("1..=5:2").unwrap(), vec![1, 3, 5]);
        assert_eq!(parse_indices("1..1000:10").unwrap().len(), 100);
        assert_eq!(parse_indices("5,1..3,3").unwrap(), vec![1, 2, 3, 5]);
    }

    #[test]
    fn malformed() {
        assert!(parse_indices("").is_err());
        assert!(parse_indices("5..1").is_err());
        assert!(parse_indices("1..5:0").is_err());
        assert!(parse_indices("a").is_err());
    }
}

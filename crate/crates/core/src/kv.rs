//! Flat `key = value` text files used for manifests and experiment configs.
//!
//! `#` starts a comment, blank lines are ignored, keys may repeat.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KvError {
    #[error("line {0}: expected `key = value`")]
    Syntax(usize),
}

/// Returns `(line number, key, value)` triples in file order.
pub fn parse(text: &str) -> Result<Vec<(usize, String, String)>, KvError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(KvError::Syntax(idx + 1))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(KvError::Syntax(idx + 1));
        }
        out.push((idx + 1, key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_repeats() {
        let kv = parse("# header\na = 1\n\nb=two # trailing\na = 3\n").unwrap();
        assert_eq!(
            kv,
            vec![
                (2, "a".into(), "1".into()),
                (4, "b".into(), "two".into()),
                (5, "a".into(), "3".into()),
            ]
        );
    }

    #[test]
    fn missing_equals() {
        assert_eq!(parse("a 1\n"), Err(KvError::Syntax(1)));
        assert_eq!(parse(" = 1\n"), Err(KvError::Syntax(1)));
    }
}

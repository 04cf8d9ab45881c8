//! Shared helpers for the text output formats.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Provenance attached to every emitted file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(command: impl Into<String>, seed: Option<u64>) -> Self {
        Self {
            tool: "risfocus".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
        }
    }

    /// `# key: value` lines for text formats.
    pub fn comment_lines(&self) -> String {
        let mut s = format!(
            "# tool: {} {}\n# command: {}\n",
            self.tool, self.version, self.command
        );
        if let Some(seed) = self.seed {
            s.push_str(&format!("# seed: {seed}\n"));
        }
        s
    }
}

/// Parses JSON, reporting type and missing/unknown-field errors as schema
/// violations at their document path.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut *de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if inner.classify() == serde_json::error::Category::Data {
            Error::schema(path, inner.to_string())
        } else {
            Error::Json(inner)
        }
    })?;
    de.end()?;
    Ok(value)
}

/// Rounds to `digits` significant decimal digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), x);
    let r: f64 = s.parse().expect("formatted float parses");
    // normalize negative zero
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_rounding() {
        assert_eq!(round_significant(43.30127018922193, 12), 43.3012701892);
        assert_eq!(round_significant(-0.000123456789012345, 12), -0.000123456789012);
        assert_eq!(round_significant(0.0, 12), 0.0);
        let once = round_significant(std::f64::consts::PI * 1e5, 12);
        assert_eq!(round_significant(once, 12), once);
    }

    #[test]
    fn json_errors_name_the_field() {
        #[derive(Debug, Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Inner {
            #[allow(dead_code)]
            n: usize,
        }
        #[derive(Debug, Deserialize)]
        struct Outer {
            #[allow(dead_code)]
            items: Vec<Inner>,
        }
        let err = parse_json::<Outer>(r#"{"items": [{"n": 1}, {"n": -1}]}"#).unwrap_err();
        assert!(matches!(&err, Error::Schema { field, .. } if field == "items[1].n"), "{err}");
        assert!(matches!(parse_json::<Outer>("{"), Err(Error::Json(_))));
        assert!(matches!(parse_json::<Outer>(r#"{"items": []} x"#), Err(Error::Json(_))));
    }

    #[test]
    fn provenance_comments() {
        let p = Provenance::new("risfocus scenario gen --seed 3", Some(3));
        let c = p.comment_lines();
        assert!(c.starts_with("# tool: risfocus "));
        assert!(c.contains("# command: risfocus scenario gen --seed 3\n"));
        assert!(c.ends_with("# seed: 3\n"));
    }
}

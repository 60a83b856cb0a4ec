//! JSON matrix format.
//!
//! A matrix is an array of rows; each entry is either a string `"p/q"` or a
//! JSON integer. The whole document may also be wrapped as
//! `{"name": "...", "matrix": [...]}`. Floating-point numbers are rejected.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::matrix::CommMatrix;
use crate::rational::{parse_rational, Rational};

fn parse_error(message: impl Into<String>, row: Option<usize>, col: Option<usize>) -> Error {
    Error::Parse {
        message: message.into(),
        row,
        col,
    }
}

/// A matrix together with the optional name stored next to it.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedMatrix {
    pub name: Option<String>,
    pub matrix: CommMatrix,
}

pub fn parse(text: &str) -> Result<CommMatrix> {
    parse_named(text).map(|m| m.matrix)
}

pub fn parse_named(text: &str) -> Result<NamedMatrix> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| parse_error(format!("invalid JSON: {e}"), None, None))?;
    from_value(&value)
}

pub fn from_value(value: &Value) -> Result<NamedMatrix> {
    match value {
        Value::Array(_) => Ok(NamedMatrix {
            name: None,
            matrix: matrix_from_value(value)?,
        }),
        Value::Object(map) => {
            let name = match map.get("name") {
                None | Some(Value::Null) => None,
                Some(Value::String(s)) => Some(s.clone()),
                Some(_) => return Err(parse_error("\"name\" must be a string", None, None)),
            };
            let body = map
                .get("matrix")
                .ok_or_else(|| parse_error("object form needs a \"matrix\" field", None, None))?;
            Ok(NamedMatrix {
                name,
                matrix: matrix_from_value(body)?,
            })
        }
        _ => Err(parse_error("expected an array of rows or an object", None, None)),
    }
}

pub fn matrix_from_value(value: &Value) -> Result<CommMatrix> {
    let rows = rational_rows(value)?;
    CommMatrix::new(rows)
}

/// Parses an array of arrays of exact entries without checking stochasticity.
pub fn rational_rows(value: &Value) -> Result<Vec<Vec<Rational>>> {
    let rows = value
        .as_array()
        .ok_or_else(|| parse_error("matrix must be an array of rows", None, None))?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let row = row
                .as_array()
                .ok_or_else(|| parse_error("row must be an array", Some(i), None))?;
            row.iter()
                .enumerate()
                .map(|(j, entry)| entry_from_value(entry).map_err(|msg| parse_error(msg, Some(i), Some(j))))
                .collect()
        })
        .collect()
}

fn entry_from_value(value: &Value) -> std::result::Result<Rational, String> {
    match value {
        Value::String(s) => parse_rational(s).map_err(|e| e.to_string()),
        Value::Number(n) if n.is_i64() || n.is_u64() => {
            parse_rational(&n.to_string()).map_err(|e| e.to_string())
        }
        Value::Number(n) => Err(format!("floating-point entry {n} is not exact; write it as \"p/q\"")),
        other => Err(format!("unexpected entry {other}")),
    }
}

pub fn to_value(c: &CommMatrix) -> Value {
    rows_to_value(&c.to_rows())
}

pub fn rows_to_value(rows: &[Vec<Rational>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| Value::Array(r.iter().map(|x| Value::String(x.to_string())).collect()))
            .collect(),
    )
}

/// Compact single-line form, `[["1/2","1/2"],["0","1"]]`.
pub fn serialize(c: &CommMatrix) -> String {
    to_value(c).to_string()
}

pub fn serialize_named(name: &str, c: &CommMatrix) -> String {
    let value = serde_json::json!({ "name": name, "matrix": to_value(c) });
    serde_json::to_string_pretty(&value).expect("JSON values always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::make_d;
    use crate::rational::{int, rat};

    #[test]
    fn parses_strings_and_integers() {
        let c = parse(r#"[["1/2","1/2"],["0","1"]]"#).unwrap();
        assert_eq!(c.to_rows(), vec![vec![rat(1, 2), rat(1, 2)], vec![int(0), int(1)]]);
        let c = parse(r#"{"name":"id","matrix":[[1,0],[0,1]]}"#).unwrap();
        assert!(c.is_identity());
    }

    #[test]
    fn reports_bad_row_and_deficit() {
        let err = parse(r#"[["1/2","2/5"],["0","1"]]"#).unwrap_err();
        assert_eq!(
            err,
            Error::RowSum {
                row: 0,
                deficit: rat(1, 10)
            }
        );
    }

    #[test]
    fn rejects_floats_with_location() {
        let err = parse(r#"[["1/2", 0.5]]"#).unwrap_err();
        match err {
            Error::Parse { row, col, .. } => assert_eq!((row, col), (Some(0), Some(1))),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("[[").is_err());
        assert!(parse(r#"{"matrix": 3}"#).is_err());
    }

    #[test]
    fn round_trip() {
        let d = make_d(3, &rat(1, 3)).unwrap();
        assert_eq!(parse(&serialize(&d)).unwrap(), d);
        let named = parse_named(&serialize_named("D", &d)).unwrap();
        assert_eq!(named.name.as_deref(), Some("D"));
        assert_eq!(named.matrix, d);
    }
}

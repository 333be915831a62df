//! Spec loading, tolerance resolution and atomic output.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_path_to_error::Segment;

use dirackit_core::schema::SpecError;
use dirackit_core::Error;

pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_SCHEMA: i32 = 3;
pub const EXIT_REJECTED: i32 = 4;

/// A failure that ends the run with a specific exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    pub fn schema(pointer: &str, message: impl std::fmt::Display) -> Self {
        let pointer = if pointer.is_empty() { "/" } else { pointer };
        Failure::new(EXIT_SCHEMA, format!("schema violation at {pointer}: {message}"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(EXIT_REJECTED, e.to_string())
    }
}

impl From<SpecError> for Failure {
    fn from(e: SpecError) -> Self {
        match e {
            SpecError::Schema { pointer, message } => Failure::schema(&pointer, message),
            SpecError::Domain(e) => e.into(),
        }
    }
}

fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

/// JSON pointer of a deserialisation path.
pub fn pointer(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", escape(key))),
            Segment::Enum { variant } => out.push_str(&format!("/{}", escape(variant))),
            Segment::Unknown => {}
        }
    }
    out
}

/// Parses `text`, separating syntax errors from schema violations.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, Failure> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = match serde_path_to_error::deserialize(&mut de) {
        Ok(v) => v,
        Err(e) => {
            let ptr = pointer(e.path());
            let inner = e.into_inner();
            return Err(if inner.is_data() {
                Failure::schema(&ptr, strip_position(&inner.to_string()))
            } else {
                Failure::new(EXIT_MALFORMED, format!("malformed JSON: {inner}"))
            });
        }
    };
    de.end().map_err(|e| Failure::new(EXIT_MALFORMED, format!("malformed JSON: {e}")))?;
    Ok(value)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_MALFORMED, format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

/// `--tol`, else `DIRACKIT_TOL`, else `default`.
pub fn tolerance(flag: Option<f64>, default: f64) -> Result<f64, Failure> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var("DIRACKIT_TOL") {
            Ok(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| Failure::new(EXIT_MALFORMED, format!("DIRACKIT_TOL is not a number: {s:?}")))?,
            Err(_) => default,
        },
    };
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Failure::new(EXIT_MALFORMED, format!("tolerance must be positive and finite, got {tol}")));
    }
    Ok(tol)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| Failure::new(EXIT_MALFORMED, format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    write(tmp.as_file_mut()).map_err(fail)?;
    tmp.as_file_mut().flush().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialise");
    s.push('\n');
    s
}

/// Report to `out`, or to stdout when no path is given.
pub fn emit(report: &serde_json::Value, out: Option<&Path>) -> Result<(), Failure> {
    let text = to_json(report);
    match out {
        Some(p) => write_atomic(p, |w| w.write_all(text.as_bytes())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dirackit_core::schema::ConstructionSpec;

    #[test]
    fn negative_dimension_is_a_schema_error_with_pointer() {
        let e = parse::<ConstructionSpec>(r#"{"space": {"dimE": -1}, "construct": {"kind": "explicit", "vectors": []}}"#)
            .unwrap_err();
        assert_eq!(e.code, EXIT_SCHEMA);
        assert!(e.message.contains("/space/dimE"), "{}", e.message);
    }

    #[test]
    fn syntax_error_is_malformed() {
        let e = parse::<ConstructionSpec>(r#"{"space": {"dimE": 2"#).unwrap_err();
        assert_eq!(e.code, EXIT_MALFORMED);
        let e = parse::<ConstructionSpec>(r#"{"construct": {"kind": "explicit", "vectors": []}} x"#).unwrap_err();
        assert_eq!(e.code, EXIT_MALFORMED);
    }

    #[test]
    fn unknown_key_is_reported() {
        let e = parse::<ConstructionSpec>(r#"{"space": {"dimE": 2, "dimF": 1}, "construct": {"kind": "explicit", "vectors": []}}"#)
            .unwrap_err();
        assert_eq!(e.code, EXIT_SCHEMA);
        assert!(e.message.contains("dimF"), "{}", e.message);
    }

    #[test]
    fn pointer_escaping() {
        assert_eq!(escape("a/b~c"), "a~1b~0c");
    }
}

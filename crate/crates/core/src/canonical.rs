//! Canonical JSON output shared by every file the crate writes.
//!
//! Objects keep struct field order, arrays are pretty-printed with two-space
//! indent and every float is rounded to 12 significant digits, so equal
//! values always serialize to equal bytes.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};

/// Significant digits kept for every float written to disk.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds `v` to the value that a canonical file would store.
pub fn quantize(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return if v == 0.0 { 0.0 } else { v };
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .expect("formatted float parses")
}

/// Float as it appears in canonical output, e.g. `2.0` or `0.333333333333`.
pub fn format_float(v: f64) -> String {
    format!("{:?}", quantize(v))
}

struct CanonicalFormatter {
    inner: PrettyFormatter<'static>,
}

macro_rules! delegate {
    ($($name:ident $(($arg:ident : $ty:ty))?),* $(,)?) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)?) -> io::Result<()> {
                self.inner.$name(w $(, $arg)?)
            }
        )*
    };
}

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        // Debug keeps a trailing ".0" on integral values and switches to
        // exponent form only for very large or tiny magnitudes.
        w.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    delegate!(
        begin_array,
        end_array,
        begin_object,
        end_object,
        end_object_value,
        begin_array_value(first: bool),
        end_array_value,
        begin_object_key(first: bool),
        begin_object_value,
    );
}

pub fn to_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        CanonicalFormatter {
            inner: PrettyFormatter::with_indent(b"  "),
        },
    );
    value
        .serialize(&mut ser)
        .expect("in-memory serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits utf-8")
}

/// Writes canonical JSON to `path` via a temporary file and rename.
pub fn write_file<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    write_atomic(path, to_string(value).as_bytes())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_file<T: DeserializeOwned>(path: &Path, what: &'static str) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Parse { what, source })
}

//! Output files, 17-digit JSON and the per-run manifest.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Pretty JSON whose floats carry 17 significant digits.
struct Fixed17<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident $(($arg:ident : $ty:ty))?),* $(,)?) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)?) -> io::Result<()> {
            self.0.$name(w $(, $arg)?)
        })*
    };
}

impl Formatter for Fixed17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", powertriad::io::fmt_f64(value))
    }

    delegate!(
        begin_array,
        end_array,
        begin_array_value(first: bool),
        end_array_value,
        begin_object,
        end_object,
        begin_object_key(first: bool),
        begin_object_value,
        end_object_value,
    );
}

/// Compact variant for one-record-per-line output.
struct Compact17;

impl Formatter for Compact17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", powertriad::io::fmt_f64(value))
    }
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Data(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

pub fn to_json_line<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Compact17);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Data(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub parameters: BTreeMap<String, Value>,
    /// SHA-256 over every input file's bytes in order, followed by the
    /// compact JSON of `parameters`.
    pub input_checksum: String,
    pub warnings: Vec<String>,
}

/// Collects everything one run reads and writes, then emits the manifest.
pub struct Run {
    command: String,
    out_dir: PathBuf,
    inputs: Vec<(FileDigest, Vec<u8>)>,
    outputs: Vec<FileDigest>,
    pub parameters: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl Run {
    pub fn new(command: impl Into<String>, out_dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(out_dir).map_err(|e| {
            CliError::Usage(format!("cannot create output directory {}: {e}", out_dir.display()))
        })?;
        Ok(Self {
            command: command.into(),
            out_dir: out_dir.to_path_buf(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            parameters: BTreeMap::new(),
            warnings: Vec::new(),
        })
    }

    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        let digest = FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        };
        self.inputs.push((digest, bytes.clone()));
        Ok(bytes)
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.parameters.insert(key.to_string(), value.into());
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        eprintln!("warning: {message}");
        self.warnings.push(message);
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(FileDigest {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    pub fn finish(self) -> Result<RunManifest, CliError> {
        let mut hasher = Sha256::new();
        for (_, bytes) in &self.inputs {
            hasher.update(bytes);
        }
        hasher.update(to_json_line(&self.parameters)?);
        let input_checksum = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        let manifest = RunManifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            inputs: self.inputs.into_iter().map(|(d, _)| d).collect(),
            outputs: self.outputs,
            parameters: self.parameters,
            input_checksum,
            warnings: self.warnings,
        };
        let path = self.out_dir.join(MANIFEST_NAME);
        std::fs::write(&path, to_json_pretty(&manifest)?)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        let line = to_json_line(&serde_json::json!({"a": 0.1, "n": 3})).unwrap();
        assert_eq!(String::from_utf8(line).unwrap(), "{\"a\":1.0000000000000001e-1,\"n\":3}\n");
        let v: Value = serde_json::from_slice(&to_json_pretty(&[1.0 / 3.0]).unwrap()).unwrap();
        assert_eq!(v[0].as_f64(), Some(1.0 / 3.0));
    }
}

//! JSON input decoding and atomic output writes.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use portagent_core::env::{
    EnvError, EnvErrorKind, ExpertiseLevel, FleetConfig, NetworkFile, Requirements, ScenarioSpec,
};
use portagent_core::TerminalEnv;
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("schema error in {what}: {message}")]
    Schema { what: String, message: String },
}

/// Environment loading failure, classified as the input contract requires.
#[derive(Debug, Error)]
pub enum EnvLoadError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("reference error: {0}")]
    Reference(EnvError),
    #[error("value error: {0}")]
    Value(EnvError),
}

impl From<EnvError> for EnvLoadError {
    fn from(e: EnvError) -> Self {
        match e.kind() {
            EnvErrorKind::Reference => EnvLoadError::Reference(e),
            EnvErrorKind::Value => EnvLoadError::Value(e),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Read { path: path.to_owned(), source })
}

pub fn decode_json<T: DeserializeOwned>(what: &str, text: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Schema { what: what.to_owned(), message: e.to_string() })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    decode_json(&path.display().to_string(), &read_text(path)?)
}

/// Decodes and validates the three environment documents.
pub fn parse_environment(net: &str, config: &str, reqs: &str) -> Result<TerminalEnv, EnvLoadError> {
    let net: NetworkFile = decode_json("network", net)?;
    let config: FleetConfig = decode_json("config", config)?;
    let reqs: Requirements = decode_json("requirements", reqs)?;
    Ok(TerminalEnv::from_files(net, config, reqs)?)
}

pub fn load_environment(net: &Path, config: &Path, reqs: &Path) -> Result<TerminalEnv, EnvLoadError> {
    let net: NetworkFile = read_json(net)?;
    let config: FleetConfig = read_json(config)?;
    let reqs: Requirements = read_json(reqs)?;
    Ok(TerminalEnv::from_files(net, config, reqs)?)
}

/// Network and fleet only, with no requirement text.
pub fn load_network_and_fleet(net: &Path, config: &Path) -> Result<TerminalEnv, EnvLoadError> {
    let net: NetworkFile = read_json(net)?;
    let config: FleetConfig = read_json(config)?;
    let reqs = Requirements { expertise_level: ExpertiseLevel::Engineer, texts: Vec::new() };
    Ok(TerminalEnv::from_files(net, config, reqs)?)
}

/// Scenario spec file; `{}` stands for no scenario.
pub fn read_scenario(path: &Path) -> Result<ScenarioSpec, IoError> {
    let text = read_text(path)?;
    let value: serde_json::Value = decode_json(&path.display().to_string(), &text)?;
    if value.as_object().is_some_and(|o| o.is_empty()) {
        return Ok(ScenarioSpec::None);
    }
    decode_json(&path.display().to_string(), &text)
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let err = |source| IoError::Write { path: path.to_owned(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    // Temp files are created owner-only; outputs are ordinary files.
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(fs::Permissions::from_mode(0o644)).map_err(err)?;
    }
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

pub fn to_json_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), IoError> {
    write_atomic(path, to_json_pretty(value).as_bytes())
}

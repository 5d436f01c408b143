//! Delegating the energy evaluation to another program.
//!
//! The child receives one JSON request line on stdin and must answer with
//! one JSON line `{"edh":…,"edc":…,"nct":…,"q_sol_jul":…}` on stdout.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::SimulationResult;
use crate::building::BuildingModel;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("cannot start evaluator `{program}`: {source}")]
    Spawn {
        program: String,
        #[source]
        source: std::io::Error,
    },
    #[error("evaluator protocol error: {0}")]
    Protocol(String),
    #[error("evaluator did not answer within {0:?}")]
    Timeout(Duration),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalCommand {
    pub program: String,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default = "default_timeout", with = "secs")]
    pub timeout: Duration,
}

fn default_timeout() -> Duration {
    DEFAULT_TIMEOUT
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

impl ExternalCommand {
    pub fn new(program: impl Into<String>) -> Self {
        Self { program: program.into(), args: Vec::new(), timeout: DEFAULT_TIMEOUT }
    }
}

#[derive(Serialize)]
struct Request<'a, D: Serialize> {
    schema_version: u32,
    weather_path: String,
    building: &'a BuildingModel,
    design: &'a D,
}

#[derive(Deserialize)]
struct Response {
    edh: f64,
    edc: f64,
    nct: f64,
    q_sol_jul: f64,
}

pub fn external_evaluate<D: Serialize>(
    design: &D,
    building: &BuildingModel,
    weather_path: &Path,
    cmd: &ExternalCommand,
) -> Result<SimulationResult, ExternalError> {
    let request = Request {
        schema_version: SCHEMA_VERSION,
        weather_path: weather_path.display().to_string(),
        building,
        design,
    };
    let mut line = serde_json::to_string(&request).map_err(|e| ExternalError::Protocol(e.to_string()))?;
    line.push('\n');

    let mut child = Command::new(&cmd.program)
        .args(&cmd.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|source| ExternalError::Spawn { program: cmd.program.clone(), source })?;

    let mut stdin = child.stdin.take().expect("stdin is piped");
    let stdout = child.stdout.take().expect("stdout is piped");
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        // A child that exits without reading its input is reported through
        // the missing answer, not the write error.
        let _ = stdin.write_all(line.as_bytes());
        drop(stdin);
        let mut answer = String::new();
        let r = BufReader::new(stdout).read_line(&mut answer).map(|_| answer);
        let _ = tx.send(r);
    });
    let answer = match rx.recv_timeout(cmd.timeout) {
        Ok(r) => r,
        Err(_) => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(ExternalError::Timeout(cmd.timeout));
        }
    };
    let _ = child.wait();
    let answer = answer.map_err(|e| ExternalError::Protocol(e.to_string()))?;
    if answer.trim().is_empty() {
        return Err(ExternalError::Protocol("empty response".into()));
    }
    let r: Response = serde_json::from_str(answer.trim()).map_err(|e| ExternalError::Protocol(e.to_string()))?;
    let result = SimulationResult {
        edh: r.edh,
        edc: r.edc,
        nct: r.nct,
        q_sol_jul: r.q_sol_jul,
        balance: None,
        traces: None,
    };
    if !result.is_valid() {
        return Err(ExternalError::Protocol(format!(
            "metrics must be finite and non-negative: {answer}"
        )));
    }
    Ok(result)
}

use std::collections::BTreeMap;
use std::path::Path;

use coarsescope::Error;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Exit status classes.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// A failure that aborts the run before a report can be completed.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<Error> for InputError {
    fn from(e: Error) -> Self {
        InputError(format!("{}: {e}", e.code()))
    }
}

/// Errors that describe a property of valid inputs failing, as opposed to
/// malformed input. These become failing certificates (exit 1).
pub fn is_certificate_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::VerificationFailed { .. }
            | Error::LipschitzFailed { .. }
            | Error::VariationFailed { .. }
            | Error::PreconditionVariation { .. }
            | Error::ANotInSkeleton { .. }
            | Error::Precondition { .. }
            | Error::NoAssignableVertex { .. }
            | Error::ScheduleNotFound { .. }
            | Error::RatioPreconditionFailed { .. }
            | Error::ParameterConstraintFailed(_)
            | Error::BallTooBig { .. }
            | Error::NotInSkeleton { .. }
            | Error::SupportTooBig { .. }
            | Error::NotPartition { .. }
            | Error::DistortionViolated { .. }
            | Error::EmptyCx(_)
            | Error::DeltaTooLarge(_)
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Debug, Default)]
pub struct RunReport {
    pub command: String,
    pub seed: u64,
    pub inputs: BTreeMap<String, Value>,
    pub parameters: BTreeMap<String, Value>,
    pub certificates: Vec<Certificate>,
    pub outputs: BTreeMap<String, Value>,
}

impl RunReport {
    pub fn new(command: &str, seed: u64) -> Self {
        RunReport { command: command.into(), seed, ..Default::default() }
    }

    pub fn param<T: Serialize>(&mut self, name: &str, value: T) {
        self.parameters.insert(name.into(), to_json(&value));
    }

    pub fn output(&mut self, name: &str, value: Value) {
        self.outputs.insert(name.into(), value);
    }

    pub fn certify<T: Serialize>(&mut self, name: &str, pass: bool, detail: &T) {
        self.certificates.push(Certificate { name: name.into(), pass, detail: to_json(detail) });
    }

    /// Records `result` as a certificate, turning certificate-class errors
    /// into a failing entry. Input errors propagate.
    pub fn certify_result<T: Serialize>(
        &mut self,
        name: &str,
        result: coarsescope::Result<T>,
        pass: impl FnOnce(&T) -> bool,
    ) -> Result<Option<T>, InputError> {
        match result {
            Ok(v) => {
                let ok = pass(&v);
                self.certify(name, ok, &v);
                Ok(Some(v))
            }
            Err(e) if is_certificate_failure(&e) => {
                self.certify(name, false, &json!({ "error": e.code(), "message": e.to_string() }));
                Ok(None)
            }
            Err(e) => Err(e.into()),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.certificates.iter().all(|c| c.pass)
    }

    /// Canonical JSON: object keys sorted, two-space indent, trailing
    /// newline. Contains nothing time- or host-dependent.
    pub fn render(&self) -> String {
        let v = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.seed,
            "inputs": self.inputs,
            "parameters": self.parameters,
            "certificates": self.certificates,
            "outputs": self.outputs,
            "pass": self.all_pass(),
        });
        let mut s = serde_json::to_string_pretty(&v).expect("JSON values always serialize");
        s.push('\n');
        s
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Value {
    serde_json::to_value(value).expect("report types serialize")
}

/// Reads and parses a JSON input, recording its digest under `name`.
pub fn load(report: &mut RunReport, name: &str, path: &Path) -> Result<Value, InputError> {
    let bytes = std::fs::read(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let digest = Sha256::digest(&bytes);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    report.inputs.insert(name.into(), json!({ "path": path.display().to_string(), "sha256": hex }));
    serde_json::from_slice(&bytes).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

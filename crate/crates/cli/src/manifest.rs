use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{run_captured, CliError};

/// Record of one file read or written by a run. `flag` is the option that
/// named the file, so a replay can redirect outputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub flag: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the subcommand, without `--seed` and `--manifest`.
    pub parameters: Vec<String>,
    /// Resolved seed of seeded commands, whatever its source.
    pub seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub stdout_sha256: String,
    pub exit_code: i32,
    pub version: String,
    pub wall_clock_ms: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// Argument vector that replays the run, with each recorded output
    /// redirected through `redirect`.
    pub fn replay_args(&self, redirect: impl Fn(&FileDigest) -> String) -> anyhow::Result<Vec<String>> {
        let mut params = self.parameters.clone();
        for out in &self.outputs {
            let joined = format!("{}={}", out.flag, out.path);
            let pos = params
                .iter()
                .position(|p| *p == joined)
                .map(|i| (i, true))
                .or_else(|| {
                    params
                        .windows(2)
                        .position(|w| w[0] == out.flag && w[1] == out.path)
                        .map(|i| (i + 1, false))
                });
            match pos {
                Some((i, true)) => params[i] = format!("{}={}", out.flag, redirect(out)),
                Some((i, false)) => params[i] = redirect(out),
                None => bail!("output {} {} does not appear in the parameters", out.flag, out.path),
            }
        }
        let mut args = vec!["sosforge".to_string(), self.command.clone()];
        args.extend(params);
        if let Some(seed) = self.seed {
            args.push("--seed".into());
            args.push(seed.to_string());
        }
        Ok(args)
    }
}

/// Reruns a recorded command with outputs sent to a scratch directory and
/// compares every hash. Returns the mismatches.
pub fn reproduce(m: &RunManifest) -> Result<Vec<String>, CliError> {
    let mut mismatches = Vec::new();
    for input in &m.inputs {
        let bytes = fs::read(&input.path).with_context(|| format!("reading input {}", input.path))?;
        let h = sha256_hex(&bytes);
        if h != input.sha256 {
            mismatches.push(format!("input {} has sha256 {h}, recorded {}", input.path, input.sha256));
        }
    }
    if !mismatches.is_empty() {
        return Ok(mismatches);
    }

    let scratch = tempfile::tempdir().context("creating scratch directory")?;
    let target = |i: usize| scratch.path().join(format!("out{i}"));
    let args = m.replay_args(|d| {
        let i = m.outputs.iter().position(|o| o == d).expect("recorded output");
        target(i).display().to_string()
    })?;
    let rerun = run_captured(args);
    if rerun.code != m.exit_code {
        mismatches.push(format!("exit code {}, recorded {}", rerun.code, m.exit_code));
    }
    let h = sha256_hex(&rerun.stdout);
    if h != m.stdout_sha256 {
        mismatches.push(format!("stdout has sha256 {h}, recorded {}", m.stdout_sha256));
    }
    for (i, out) in m.outputs.iter().enumerate() {
        match fs::read(target(i)) {
            Ok(bytes) => {
                let h = sha256_hex(&bytes);
                if h != out.sha256 {
                    mismatches.push(format!("output {} has sha256 {h}, recorded {}", out.path, out.sha256));
                }
            }
            Err(_) => mismatches.push(format!("output {} was not written", out.path)),
        }
    }
    Ok(mismatches)
}

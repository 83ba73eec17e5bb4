//! Plain-text checkpoint layout (version 1):
//!
//! ```text
//! intervalcast-checkpoint 1
//! model <kind>            e.g. mlp:64 or linear:25
//! dims <w> <tau> <n>
//! policy <fingerprint>    free text up to end of line
//! params <count>
//! <one hex-encoded f64 bit pattern per line>
//! optimizer <step> | optimizer none
//! m <count>  followed by count lines      (only when step is given)
//! v <count>  followed by count lines
//! end
//! ```
//!
//! Values are stored as the 16-digit hex of `f64::to_bits`, so loading is
//! bit-exact.

use std::path::Path;

use super::{Architecture, ModelKind, ModelParams};
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &str = "intervalcast-checkpoint";

/// Adam moment accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub policy: String,
    pub optimizer: Option<MomentState>,
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let arch = self.params.arch();
        let mut s = String::new();
        s.push_str(&format!("{MAGIC} {CHECKPOINT_VERSION}\n"));
        s.push_str(&format!("model {}\n", arch.kind));
        s.push_str(&format!(
            "dims {} {} {}\n",
            arch.window, arch.horizon, arch.channels
        ));
        s.push_str(&format!("policy {}\n", self.policy.replace('\n', " ")));
        push_block(&mut s, "params", self.params.theta());
        match &self.optimizer {
            Some(opt) => {
                s.push_str(&format!("optimizer {}\n", opt.step));
                push_block(&mut s, "m", &opt.m);
                push_block(&mut s, "v", &opt.v);
            }
            None => s.push_str("optimizer none\n"),
        }
        s.push_str("end\n");
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::Checkpoint(format!("truncated before {what}")))
        };

        let header = next("header")?;
        let version = header
            .strip_prefix(MAGIC)
            .map(str::trim)
            .ok_or_else(|| Error::Checkpoint("not a checkpoint file".into()))?;
        if version != CHECKPOINT_VERSION.to_string() {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }

        let kind: ModelKind = field(next("model")?, "model")?.parse()?;
        let dims: Vec<usize> = field(next("dims")?, "dims")?
            .split_whitespace()
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Checkpoint(format!("bad dims value {v:?}")))
            })
            .collect::<Result<_>>()?;
        let [w, tau, n] = dims[..] else {
            return Err(Error::Checkpoint("dims needs three values".into()));
        };
        let arch = Architecture::new(kind, w, tau, n)?;
        let policy = field(next("policy")?, "policy")?.to_string();

        let theta = read_block(&mut next, "params")?;
        let params = ModelParams::from_vec(arch, theta)?;

        let opt_line = field(next("optimizer")?, "optimizer")?;
        let optimizer = if opt_line == "none" {
            None
        } else {
            let step = opt_line
                .parse()
                .map_err(|_| Error::Checkpoint(format!("bad optimizer step {opt_line:?}")))?;
            let m = read_block(&mut next, "m")?;
            let v = read_block(&mut next, "v")?;
            if m.len() != params.len() || v.len() != params.len() {
                return Err(Error::Checkpoint(
                    "optimizer state does not match parameter count".into(),
                ));
            }
            Some(MomentState { step, m, v })
        };
        if next("end")?.trim() != "end" {
            return Err(Error::Checkpoint("missing end marker".into()));
        }
        Ok(Self {
            params,
            policy,
            optimizer,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

fn push_block(s: &mut String, name: &str, values: &[f64]) {
    s.push_str(&format!("{name} {}\n", values.len()));
    for v in values {
        s.push_str(&format!("{:016x}\n", v.to_bits()));
    }
}

fn field<'a>(line: &'a str, name: &str) -> Result<&'a str> {
    line.strip_prefix(name)
        .and_then(|rest| rest.strip_prefix(' '))
        .map(str::trim)
        .ok_or_else(|| Error::Checkpoint(format!("expected `{name}` line, found {line:?}")))
}

fn read_block<'a>(next: &mut impl FnMut(&str) -> Result<&'a str>, name: &str) -> Result<Vec<f64>> {
    let count: usize = field(next(name)?, name)?
        .parse()
        .map_err(|_| Error::Checkpoint(format!("bad {name} count")))?;
    (0..count)
        .map(|_| {
            let line = next(name)?.trim();
            u64::from_str_radix(line, 16)
                .map(f64::from_bits)
                .map_err(|_| Error::Checkpoint(format!("bad hex value {line:?} in {name}")))
        })
        .collect()
}

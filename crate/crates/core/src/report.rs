//! Verification reports and deterministic per-trial randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Mixes `(seed, stream, index)` into an independent generator so that
/// trials can run in any order, or in parallel, with identical results.
pub fn trial_rng(seed: u64, stream: &str, index: u64) -> ChaCha8Rng {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for b in stream.bytes() {
        h = splitmix(h ^ u64::from(b));
    }
    h = splitmix(h ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03));
    ChaCha8Rng::seed_from_u64(splitmix(h))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Status::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Number of individual instances examined.
    pub trials: usize,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, ok: bool, trials: usize) -> Check {
        Check {
            name: name.into(),
            status: Status::from_bool(ok),
            trials,
            detail: String::new(),
            witnesses: Vec::new(),
        }
    }

    pub fn detail(mut self, d: impl Into<String>) -> Check {
        self.detail = d.into();
        self
    }

    pub fn witnesses(mut self, w: Vec<String>) -> Check {
        self.witnesses = w;
        self
    }
}

/// Outcome of a verification suite: an overall status plus one entry per
/// property examined.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub name: String,
    pub status: Status,
    pub seed: u64,
    /// Set when every check passed without examining a nontrivial instance.
    pub vacuous: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(name: impl Into<String>, seed: u64) -> Report {
        Report {
            name: name.into(),
            status: Status::Pass,
            seed,
            vacuous: false,
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        if !check.status.passed() {
            self.status = Status::Fail;
        }
        self.checks.push(check);
    }

    pub fn note(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
    }

    pub fn passed(&self) -> bool {
        self.status.passed()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Keeps at most this many witnesses per check.
pub(crate) const MAX_WITNESSES: usize = 5;

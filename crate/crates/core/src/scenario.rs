//! Experiment configuration: parsing, unit normalization and validation.
//!
//! Everything downstream of this module works in canonical units: bits,
//! Hz, bit/s, seconds, Joules and Watts. Unit conversion happens only here.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Bits in one kilobyte (1 KB = 1024 bytes of 8 bits).
pub const BITS_PER_KB: f64 = 8.0 * 1024.0;
pub const HZ_PER_GHZ: f64 = 1e9;
pub const BPS_PER_MBPS: f64 = 1e6;

pub fn kb_to_bits(kb: f64) -> f64 {
    kb * BITS_PER_KB
}

pub fn bits_to_kb(bits: f64) -> f64 {
    bits / BITS_PER_KB
}

pub fn ghz_to_hz(ghz: f64) -> f64 {
    ghz * HZ_PER_GHZ
}

pub fn hz_to_ghz(hz: f64) -> f64 {
    hz / HZ_PER_GHZ
}

pub fn mbps_to_bps(mbps: f64) -> f64 {
    mbps * BPS_PER_MBPS
}

pub fn bps_to_mbps(bps: f64) -> f64 {
    bps / BPS_PER_MBPS
}

/// How the configured SNR figures enter the Shannon rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrMode {
    /// The figure is used as-is inside `log2(1 + snr)`.
    #[default]
    Raw,
    /// The figure is in dB and converted with `10^(snr/10)`.
    DbToLinear,
}

impl SnrMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SnrMode::Raw => "raw",
            SnrMode::DbToLinear => "db-to-linear",
        }
    }
}

impl fmt::Display for SnrMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SnrMode {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(SnrMode::Raw),
            "db-to-linear" | "db_to_linear" => Ok(SnrMode::DbToLinear),
            other => Err(ScenarioError::InvalidValue {
                key: "snr_mode".into(),
                value: other.into(),
                reason: "expected `raw` or `db-to-linear`".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub snr_uplink: f64,
    pub snr_downlink: f64,
    pub mode: SnrMode,
}

impl ChannelSpec {
    fn effective(&self, figure: f64) -> f64 {
        match self.mode {
            SnrMode::Raw => figure,
            SnrMode::DbToLinear => 10f64.powf(figure / 10.0),
        }
    }

    pub fn effective_uplink(&self) -> f64 {
        self.effective(self.snr_uplink)
    }

    pub fn effective_downlink(&self) -> f64 {
        self.effective(self.snr_downlink)
    }

    /// Spectral efficiency `log2(1 + SNR_up)` in bit/s per unit bandwidth.
    pub fn uplink_efficiency(&self) -> f64 {
        (1.0 + self.effective_uplink()).log2()
    }

    pub fn downlink_efficiency(&self) -> f64 {
        (1.0 + self.effective_downlink()).log2()
    }
}

/// Full parameter set of one end-user / edge-server pair, canonical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    /// Offloaded data, bits.
    pub q: f64,
    /// CPU cycles needed per bit.
    pub cycles_per_bit: f64,
    /// Local CPU frequency, Hz.
    pub f_local: f64,
    /// Switched-capacitance coefficient, W·s³/cycle³.
    pub k: f64,
    /// Upload power, W.
    pub p_u: f64,
    /// Download power, W.
    pub p_d: f64,
    /// Download-to-upload data ratio.
    pub alpha: f64,
    /// Discount factor applied to saved energy.
    pub w1: f64,
    /// Discount factor applied to saved time.
    pub w2: f64,
    /// Reward index of the server's data revenue.
    pub mu: f64,
    pub channel: ChannelSpec,
    /// Search range for the purchased server frequency, Hz.
    pub f_range: (f64, f64),
    /// Search range for the purchased bandwidth, bit/s.
    pub b_range: (f64, f64),
}

impl Default for Scenario {
    /// Default parameter table with the comparison setting q = 500 KB and
    /// F_local = 0.1 GHz.
    fn default() -> Self {
        Scenario {
            q: kb_to_bits(500.0),
            cycles_per_bit: 2640.0,
            f_local: ghz_to_hz(0.1),
            k: 1e-27,
            p_u: 0.1,
            p_d: 1.0,
            alpha: 0.2,
            w1: 0.5,
            w2: 0.5,
            mu: 0.8,
            channel: ChannelSpec {
                snr_uplink: 20.0,
                snr_downlink: 30.0,
                mode: SnrMode::Raw,
            },
            f_range: (ghz_to_hz(1.0), ghz_to_hz(6.0)),
            b_range: (mbps_to_bps(0.1), mbps_to_bps(1.0)),
        }
    }
}

impl Scenario {
    pub fn with_q_kb(mut self, kb: f64) -> Self {
        self.q = kb_to_bits(kb);
        self
    }

    pub fn with_f_local_ghz(mut self, ghz: f64) -> Self {
        self.f_local = ghz_to_hz(ghz);
        self
    }

    pub fn with_snr_mode(mut self, mode: SnrMode) -> Self {
        self.channel.mode = mode;
        self
    }

    /// Apply one `key=value` setting using the configuration key names.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), ScenarioError> {
        let value = raw.trim().trim_matches('"');
        if key == "snr_mode" {
            self.channel.mode = value.parse()?;
            return Ok(());
        }
        let x: f64 = value.parse().map_err(|_| ScenarioError::InvalidValue {
            key: key.into(),
            value: value.into(),
            reason: "not a number".into(),
        })?;
        match key {
            "q_kb" => self.q = kb_to_bits(x),
            "c_cycles_per_bit" => self.cycles_per_bit = x,
            "f_local_ghz" => self.f_local = ghz_to_hz(x),
            "k_coeff" => self.k = x,
            "p_u_w" => self.p_u = x,
            "p_d_w" => self.p_d = x,
            "alpha" => self.alpha = x,
            "w1" => self.w1 = x,
            "w2" => self.w2 = x,
            "mu" => self.mu = x,
            "snr_uplink" => self.channel.snr_uplink = x,
            "snr_downlink" => self.channel.snr_downlink = x,
            "f_min_ghz" => self.f_range.0 = ghz_to_hz(x),
            "f_max_ghz" => self.f_range.1 = ghz_to_hz(x),
            "b_min_mbps" => self.b_range.0 = mbps_to_bps(x),
            "b_max_mbps" => self.b_range.1 = mbps_to_bps(x),
            other => return Err(ScenarioError::UnknownKey(other.into())),
        }
        Ok(())
    }

    /// Serialize back to the key=value configuration format.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        line("q_kb", bits_to_kb(self.q).to_string());
        line("c_cycles_per_bit", self.cycles_per_bit.to_string());
        line("f_local_ghz", hz_to_ghz(self.f_local).to_string());
        line("k_coeff", format!("{:e}", self.k));
        line("p_u_w", self.p_u.to_string());
        line("p_d_w", self.p_d.to_string());
        line("alpha", self.alpha.to_string());
        line("w1", self.w1.to_string());
        line("w2", self.w2.to_string());
        line("mu", self.mu.to_string());
        line("snr_uplink", self.channel.snr_uplink.to_string());
        line("snr_downlink", self.channel.snr_downlink.to_string());
        line("snr_mode", format!("\"{}\"", self.channel.mode));
        line("f_min_ghz", hz_to_ghz(self.f_range.0).to_string());
        line("f_max_ghz", hz_to_ghz(self.f_range.1).to_string());
        line("b_min_mbps", bps_to_mbps(self.b_range.0).to_string());
        line("b_max_mbps", bps_to_mbps(self.b_range.1).to_string());
        out
    }
}

/// Keys every configuration document must define for [`load_scenario`].
pub const REQUIRED_KEYS: [&str; 17] = [
    "q_kb",
    "c_cycles_per_bit",
    "f_local_ghz",
    "k_coeff",
    "p_u_w",
    "p_d_w",
    "alpha",
    "w1",
    "w2",
    "mu",
    "snr_uplink",
    "snr_downlink",
    "snr_mode",
    "f_min_ghz",
    "f_max_ghz",
    "b_min_mbps",
    "b_max_mbps",
];

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("key `{0}` defined more than once")]
    DuplicateKey(String),
    #[error("missing required key `{0}`")]
    MissingKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("invalid scenario: {0}")]
    Invalid(ValidationReport),
}

fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ScenarioError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ScenarioError::Syntax {
            line: idx + 1,
            text: raw.to_string(),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ScenarioError::Syntax {
                line: idx + 1,
                text: raw.to_string(),
            });
        }
        if pairs.iter().any(|(k, _)| k == key) {
            return Err(ScenarioError::DuplicateKey(key.into()));
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Strictly-positive fields reported as hard load errors.
fn positivity_errors(s: &Scenario) -> Vec<Violation> {
    validate(s)
        .violations
        .into_iter()
        .filter(|v| v.kind == ViolationKind::NonPositive)
        .collect()
}

fn finish(s: Scenario) -> Result<Scenario, ScenarioError> {
    let bad = positivity_errors(&s);
    if bad.is_empty() {
        Ok(s)
    } else {
        Err(ScenarioError::Invalid(ValidationReport { violations: bad }))
    }
}

/// Parse a complete configuration. Every key in [`REQUIRED_KEYS`] must be present.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let pairs = parse_pairs(text)?;
    if let Some(missing) = REQUIRED_KEYS
        .iter()
        .find(|k| !pairs.iter().any(|(key, _)| key == *k))
    {
        return Err(ScenarioError::MissingKey((*missing).into()));
    }
    let mut s = Scenario::default();
    for (k, v) in &pairs {
        s.set(k, v)?;
    }
    finish(s)
}

/// Parse a partial configuration on top of the default parameter table.
pub fn load_scenario_with_defaults(text: &str) -> Result<Scenario, ScenarioError> {
    let pairs = parse_pairs(text)?;
    let mut s = Scenario::default();
    for (k, v) in &pairs {
        s.set(k, v)?;
    }
    finish(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NonPositive,
    OutOfRange,
    EmptyRange,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, field: &str) -> bool {
        self.violations.iter().any(|v| v.field == field)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<&str> = self.violations.iter().map(|v| v.message.as_str()).collect();
        f.write_str(&msgs.join("; "))
    }
}

/// Check every scenario invariant, one entry per violated invariant.
pub fn validate(s: &Scenario) -> ValidationReport {
    let mut violations = Vec::new();
    let mut positive = |field: &'static str, x: f64| {
        if !(x > 0.0 && x.is_finite()) {
            violations.push(Violation {
                field,
                kind: ViolationKind::NonPositive,
                message: format!("{field} must be > 0 (got {x})"),
            });
        }
    };
    positive("q", s.q);
    positive("c_cycles_per_bit", s.cycles_per_bit);
    positive("f_local", s.f_local);
    positive("k_coeff", s.k);
    positive("w1", s.w1);
    positive("w2", s.w2);
    positive("snr_uplink", s.channel.snr_uplink);
    positive("snr_downlink", s.channel.snr_downlink);
    positive("f_min", s.f_range.0);
    positive("f_max", s.f_range.1);
    positive("b_min", s.b_range.0);
    positive("b_max", s.b_range.1);

    if !(s.alpha >= 0.0) {
        violations.push(Violation {
            field: "alpha",
            kind: ViolationKind::OutOfRange,
            message: format!("alpha must be >= 0 (got {})", s.alpha),
        });
    }
    if !(s.mu > 0.0 && s.mu < 1.0) {
        violations.push(Violation {
            field: "mu",
            kind: ViolationKind::OutOfRange,
            message: format!("mu out of (0,1) (got {})", s.mu),
        });
    }
    if s.w2 >= 1.0 {
        violations.push(Violation {
            field: "w2",
            kind: ViolationKind::OutOfRange,
            message: format!("w2 < 1 required for ES trend (got {})", s.w2),
        });
    }
    if !(s.f_range.0 < s.f_range.1) {
        violations.push(Violation {
            field: "f_range",
            kind: ViolationKind::EmptyRange,
            message: format!("f_min < f_max required (got {:?})", s.f_range),
        });
    }
    if !(s.b_range.0 < s.b_range.1) {
        violations.push(Violation {
            field: "b_range",
            kind: ViolationKind::EmptyRange,
            message: format!("b_min < b_max required (got {:?})", s.b_range),
        });
    }
    ValidationReport { violations }
}

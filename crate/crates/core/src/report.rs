//! Machine-readable reports and the surface definition file format.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::parse::{parse_constraint, parse_rational, parse_rational_poly};
use crate::scalar::Rational;
use crate::symmetry::{AffineVectorField, Hypersurface};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckStatus {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    #[serde(rename = "n/a")]
    NotApplicable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    /// exact value strings backing the verdict
    pub witness: String,
    pub wall_ms: u64,
}

impl CheckResult {
    pub fn pass(name: impl Into<String>, witness: impl Into<String>) -> CheckResult {
        CheckResult {
            name: name.into(),
            status: CheckStatus::Pass,
            witness: witness.into(),
            wall_ms: 0,
        }
    }

    pub fn fail(name: impl Into<String>, witness: impl Into<String>) -> CheckResult {
        CheckResult {
            name: name.into(),
            status: CheckStatus::Fail,
            witness: witness.into(),
            wall_ms: 0,
        }
    }

    pub fn na(name: impl Into<String>, witness: impl Into<String>) -> CheckResult {
        CheckResult {
            name: name.into(),
            status: CheckStatus::NotApplicable,
            witness: witness.into(),
            wall_ms: 0,
        }
    }

    pub fn of(name: impl Into<String>, ok: bool, witness: impl Into<String>) -> CheckResult {
        if ok {
            CheckResult::pass(name, witness)
        } else {
            CheckResult::fail(name, witness)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub tool_version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub checks: Vec<CheckResult>,
    pub passed: usize,
    pub failed: usize,
    pub na: usize,
}

impl Report {
    pub fn new(command: impl Into<String>, config: serde_json::Value) -> Report {
        Report {
            schema_version: SCHEMA_VERSION.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            checks: Vec::new(),
            passed: 0,
            failed: 0,
            na: 0,
        }
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = CheckResult>) {
        for c in checks {
            match c.status {
                CheckStatus::Pass => self.passed += 1,
                CheckStatus::Fail => self.failed += 1,
                CheckStatus::NotApplicable => self.na += 1,
            }
            self.checks.push(c);
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    /// Exit code contract: 0 all pass, 1 any fail (2 is reserved for
    /// configuration and parse errors).
    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# {} (schema {})\n",
            self.command, self.schema_version
        ));
        for c in &self.checks {
            let tag = match c.status {
                CheckStatus::Pass => "PASS",
                CheckStatus::Fail => "FAIL",
                CheckStatus::NotApplicable => "n/a ",
            };
            out.push_str(&format!("{tag}  {}", c.name));
            if !c.witness.is_empty() {
                out.push_str(&format!("  [{}]", c.witness));
            }
            out.push_str(&format!("  ({} ms)\n", c.wall_ms));
        }
        out.push_str(&format!(
            "summary: {} passed, {} failed, {} n/a\n",
            self.passed, self.failed, self.na
        ));
        out
    }

    /// The report with wall-clock fields zeroed; reports are deterministic
    /// modulo timing.
    pub fn normalized(&self) -> Report {
        let mut r = self.clone();
        for c in &mut r.checks {
            c.wall_ms = 0;
        }
        r
    }
}

/// Surface definition file:
/// `{ "n": 4, "F": "<polynomial>", "constraint": "x1 > 0" | null,
///    "point": ["1", "0", ...] }` with exact string rationals.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceFile {
    pub n: usize,
    #[serde(rename = "F")]
    pub f: String,
    #[serde(default)]
    pub constraint: Option<String>,
    pub point: Vec<String>,
}

impl SurfaceFile {
    pub fn to_hypersurface(&self) -> Result<Hypersurface> {
        let f = parse_rational_poly(&self.f, self.n + 1)?;
        let constraint = match &self.constraint {
            None => None,
            Some(c) => Some(parse_constraint(c, self.n + 1)?),
        };
        let point: Vec<Rational> = self
            .point
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<_>>()?;
        Hypersurface::new(self.n, f, constraint, point)
    }

    pub fn from_json(src: &str) -> Result<SurfaceFile> {
        Ok(serde_json::from_str(src)?)
    }
}

/// One symmetry field rendered with exact entry strings: matrix rows plus
/// the translation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldReport {
    pub linear: Vec<Vec<String>>,
    pub translation: Vec<String>,
}

impl FieldReport {
    pub fn from_field(f: &AffineVectorField) -> FieldReport {
        let d = f.dim();
        FieldReport {
            linear: (0..d)
                .map(|i| (0..d).map(|j| f.linear[(i, j)].to_string()).collect())
                .collect(),
            translation: f.translation.iter().map(|x| x.to_string()).collect(),
        }
    }
}

/// Invariant report for a single surface analysis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InvariantReport {
    /// raw signature of the jet at the reference point
    pub signature: [usize; 2],
    /// whether the graph coordinate was flipped to orient p >= q
    pub flipped_for_adaptation: bool,
    pub metric: String,
    pub l1_norm_sq: String,
    pub l1_trace_free_zero: bool,
    pub orbit: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<String>>,
    /// true | false | "n/a"
    pub tube: serde_json::Value,
    pub isotropy_dim: usize,
    pub symmetry_dim: usize,
    pub transitivity_rank: usize,
    pub filtration_dims: Vec<usize>,
    pub prop_cs_ok: bool,
    pub symmetry_fields: Vec<FieldReport>,
}

/// Normal-form comparison flags for the section-6 report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Section6CmReport {
    #[serde(rename = "F11_ok")]
    pub f11_ok: bool,
    #[serde(rename = "F22_ok")]
    pub f22_ok: bool,
    #[serde(rename = "F32_ok")]
    pub f32_ok: bool,
    #[serde(rename = "F33_ok")]
    pub f33_ok: bool,
    pub traces_ok: bool,
}

/// Structured summary of the complex-side verification for one dimension.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Section6Report {
    pub n: usize,
    pub tangent_fields_ok: usize,
    pub closure_ok: bool,
    pub isotropy_dim: usize,
    pub expected_isotropy_dim: usize,
    pub sl2_ok: bool,
    pub cm: Section6CmReport,
    /// verification gaps that are deliberate, not failures
    pub notes: Vec<String>,
}

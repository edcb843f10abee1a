//! Machine-readable and human-readable report emission.

use serde::{Deserialize, Serialize};

use crate::datadriven::ResilienceReport;
use crate::sysmodel::ScenarioTag;

pub const REPORT_SCHEMA: &str = "sparse-resilience/1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPair {
    pub re: f64,
    pub im: f64,
}

impl From<num_complex::Complex64> for ComplexPair {
    fn from(c: num_complex::Complex64) -> Self {
        ComplexPair { re: c.re, im: c.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaEntry {
    pub lambda: ComplexPair,
    pub zeta: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub lambda: ComplexPair,
    pub z: Vec<ComplexPair>,
}

/// What the computed index guarantees, in attacked-sensor counts: state
/// estimation tolerates up to `floor(rho_max / 2)` corrupted sensors, attack
/// detection up to `rho_max`. Absent when the index certifies nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interpretation {
    pub estimation_max_attacks: Option<u64>,
    pub detection_max_attacks: Option<u64>,
}

/// Field-for-field JSON mirror of [`ResilienceReport`], complex numbers as
/// re/im pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub schema: String,
    pub scenario: String,
    pub rho_max: i64,
    pub fast_path_used: bool,
    pub rank_deficient_xminus: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assumed_l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_admissible: Option<bool>,
    pub zeta_per_lambda: Vec<ZetaEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
    pub interpretation: Interpretation,
}

impl ReportJson {
    pub fn from_report(report: &ResilienceReport) -> Self {
        let interpretation = if report.rho_max >= 0 {
            Interpretation {
                estimation_max_attacks: Some((report.rho_max / 2) as u64),
                detection_max_attacks: Some(report.rho_max as u64),
            }
        } else {
            Interpretation {
                estimation_max_attacks: None,
                detection_max_attacks: None,
            }
        };
        ReportJson {
            schema: REPORT_SCHEMA.to_string(),
            scenario: report.scenario.as_str().to_string(),
            rho_max: report.rho_max,
            fast_path_used: report.fast_path_used,
            rank_deficient_xminus: report.rank_deficient_xminus,
            assumed_l: report.assumed_l,
            l_admissible: report.l_admissible,
            zeta_per_lambda: report
                .zeta_per_lambda
                .iter()
                .map(|(lambda, zeta)| ZetaEntry {
                    lambda: (*lambda).into(),
                    zeta: *zeta,
                })
                .collect(),
            witness: report.witness.as_ref().map(|w| WitnessJson {
                lambda: w.lambda.into(),
                z: w.z.iter().map(|c| ComplexPair::from(*c)).collect(),
            }),
            interpretation,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// One-screen human summary of a report.
pub fn text_summary(report: &ResilienceReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("scenario:            {}\n", report.scenario.as_str()));
    if report.rank_deficient_xminus {
        out.push_str("verdict:             X^- lacks full row rank\n");
        out.push_str("rho_max:             -1 (data not informative for any rho)\n");
        out.push_str(
            "hint:                re-collect data from a generic initial state with T >= n\n",
        );
        return out;
    }
    out.push_str(&format!("rho_max:             {}\n", report.rho_max));
    out.push_str(&format!(
        "fast path used:      {} (multiplicity-one)\n",
        if report.fast_path_used { "yes" } else { "no" }
    ));
    if let Some(l) = report.assumed_l {
        let admissible = report.l_admissible.unwrap_or(false);
        out.push_str(&format!(
            "assumed attacks l:   {} ({})\n",
            l,
            if admissible {
                "admissible: l <= rho_max"
            } else {
                "NOT admissible: l > rho_max, the index cannot certify resilience"
            }
        ));
    }
    if !report.zeta_per_lambda.is_empty() {
        out.push_str("zeta per eigenvalue:\n");
        for (lambda, zeta) in &report.zeta_per_lambda {
            out.push_str(&format!(
                "  lambda = {:>12.6}{:+.6}i   zeta = {}\n",
                lambda.re, lambda.im, zeta
            ));
        }
    }
    if report.rho_max >= 0 {
        out.push_str(&format!(
            "interpretation:      state estimation guaranteed under up to {} attacked sensors,\n",
            report.rho_max / 2
        ));
        out.push_str(&format!(
            "                     attack detection guaranteed under up to {} attacked sensors\n",
            report.rho_max
        ));
    } else {
        out.push_str("interpretation:      no resilience guarantee can be certified from these data\n");
    }
    if matches!(report.scenario, ScenarioTag::Poisoned) {
        out.push_str("note:                index from poisoned data is conservative\n");
    }
    out
}

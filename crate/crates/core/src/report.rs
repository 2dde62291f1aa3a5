//! Solver results and the errors shared by all solvers.

use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::model::{ItemSet, ModelError, UncertaintyKind};
use crate::num::{format_rational, to_f64, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("solver does not handle {} instances", .0.as_str())]
    UnsupportedKind(UncertaintyKind),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("instance has {n} items, above the enumeration cap of {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("increment at item {0} is negative")]
    NegativeIncrement(usize),
    #[error("time limit of {limit:?} exceeded")]
    TimeLimitExceeded {
        limit: Duration,
        /// Best value and witness found before the limit hit, if any.
        incumbent: Option<(Rational, ItemSet)>,
    },
}

impl SolveError {
    pub fn infeasible(msg: impl Into<String>) -> Self {
        SolveError::Model(ModelError::Infeasible(msg.into()))
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, SolveError::Model(ModelError::Infeasible(_)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Static,
    Continuous,
    Discrete,
    Variant,
    EqualCost,
    Oracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Static => "static",
            Method::Continuous => "continuous",
            Method::Discrete => "discrete",
            Method::Variant => "variant",
            Method::EqualCost => "equalcost",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantBranch {
    /// `Γ` plus the nominal value at lower costs.
    LowerPlusBudget,
    /// Nominal value at upper costs; the attack is absorbed entirely.
    Upper,
}

/// Which subproblem produced the reported optimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Static {
        #[serde(with = "crate::num::serde_rational")]
        pi: Rational,
    },
    SingleZ {
        k: usize,
        #[serde(with = "crate::num::serde_rational")]
        pi2: Rational,
        #[serde(with = "crate::num::serde_rational")]
        pi1: Rational,
    },
    PairZ {
        k1: usize,
        k2: usize,
        /// 1-based.
        forced_item: usize,
        #[serde(with = "crate::num::serde_rational")]
        pi1: Rational,
        #[serde(with = "crate::num::serde_rational")]
        weight1: Rational,
    },
    Variant {
        branch: VariantBranch,
    },
    Discrete {
        /// Budget the adversary spends on the first-stage purchase.
        worst_gamma1: usize,
        /// 1-based items attacked in stage one.
        attacked_first: Vec<usize>,
        evaluated: u64,
        pruned: u64,
    },
    EqualCost {
        #[serde(with = "crate::num::serde_rational")]
        pi0: Rational,
        #[serde(with = "crate::num::serde_rational")]
        pi1: Rational,
    },
    Oracle,
}

/// How far a witness can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// Value and witness re-evaluated exactly.
    Exact,
    /// Value is the decomposition optimum; the witness is not independently checked.
    ValueCertifiedByDecomposition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub value: Rational,
    pub witness_x: ItemSet,
    pub method: Method,
    pub provenance: Provenance,
    pub certificate: Certificate,
    pub elapsed: Duration,
}

impl SolveReport {
    pub fn to_json(&self) -> Value {
        json!({
            "value": format_rational(&self.value),
            "value_float": to_f64(&self.value),
            "witness_x": self.witness_x.one_based(),
            "method": self.method.as_str(),
            "subproblem_provenance": serde_json::to_value(&self.provenance)
                .expect("provenance is always encodable"),
            "certificate": serde_json::to_value(self.certificate)
                .expect("certificate is always encodable"),
            "millis": self.elapsed.as_millis() as u64,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::frac;

    #[test]
    fn json_shape() {
        let report = SolveReport {
            value: frac(79, 8),
            witness_x: ItemSet::new([0]),
            method: Method::Continuous,
            provenance: Provenance::SingleZ { k: 2, pi2: frac(4, 1), pi1: frac(0, 1) },
            certificate: Certificate::ValueCertifiedByDecomposition,
            elapsed: Duration::from_millis(3),
        };
        let v = report.to_json();
        assert_eq!(v["value"], "79/8");
        assert_eq!(v["value_float"], 9.875);
        assert_eq!(v["witness_x"], json!([1]));
        assert_eq!(v["method"], "continuous");
        assert_eq!(v["subproblem_provenance"]["kind"], "single_z");
        assert_eq!(v["subproblem_provenance"]["pi2"], "4");
        assert_eq!(v["millis"], 3);
    }
}

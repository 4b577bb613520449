//! Named strategies for the computations that have more than one method.

use crate::error::{Error, Result};
use crate::graph_core::{is_legal, refined_legal, remark_legal, AGraph, IdealEdge};
use crate::metric_maps::{BruteForceEngine, CandidateEngine, LipschitzEngine};
use crate::spine_complex::{HomologyEngine, RationalEngine, SmithEngine};

/// A test for whether an ideal edge may be blown up.
pub trait LegalityRule: Send + Sync {
    fn name(&self) -> &'static str;
    fn is_legal(&self, g: &AGraph, e: &IdealEdge) -> bool;
}

/// Blow up and validate the result.
pub struct BlowUpRule;
/// Separates at most one pair of circles.
pub struct RemarkRule;
/// Pair count refined by where the separated circles sit.
pub struct RefinedRule;

impl LegalityRule for BlowUpRule {
    fn name(&self) -> &'static str {
        "blow-up"
    }
    fn is_legal(&self, g: &AGraph, e: &IdealEdge) -> bool {
        is_legal(g, e)
    }
}

impl LegalityRule for RemarkRule {
    fn name(&self) -> &'static str {
        "remark"
    }
    fn is_legal(&self, g: &AGraph, e: &IdealEdge) -> bool {
        remark_legal(g, e)
    }
}

impl LegalityRule for RefinedRule {
    fn name(&self) -> &'static str {
        "refined"
    }
    fn is_legal(&self, g: &AGraph, e: &IdealEdge) -> bool {
        refined_legal(g, e)
    }
}

pub const HOMOLOGY_ENGINES: &[&str] = &["snf", "rational"];
pub const LIPSCHITZ_ENGINES: &[&str] = &["candidates", "brute-force"];
pub const LEGALITY_RULES: &[&str] = &["blow-up", "remark", "refined"];

pub fn homology_engine(name: &str) -> Result<Box<dyn HomologyEngine>> {
    match name {
        "snf" => Ok(Box::new(SmithEngine)),
        "rational" => Ok(Box::new(RationalEngine)),
        _ => Err(Error::UnknownStrategy(name.into())),
    }
}

pub fn lipschitz_engine(name: &str) -> Result<Box<dyn LipschitzEngine>> {
    match name {
        "candidates" => Ok(Box::new(CandidateEngine)),
        "brute-force" => Ok(Box::new(BruteForceEngine { max_len: None })),
        _ => Err(Error::UnknownStrategy(name.into())),
    }
}

pub fn legality_rule(name: &str) -> Result<Box<dyn LegalityRule>> {
    match name {
        "blow-up" => Ok(Box::new(BlowUpRule)),
        "remark" => Ok(Box::new(RemarkRule)),
        "refined" => Ok(Box::new(RefinedRule)),
        _ => Err(Error::UnknownStrategy(name.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for &n in HOMOLOGY_ENGINES {
            assert_eq!(homology_engine(n).unwrap().name(), n);
        }
        for &n in LIPSCHITZ_ENGINES {
            assert_eq!(lipschitz_engine(n).unwrap().name(), n);
        }
        for &n in LEGALITY_RULES {
            assert_eq!(legality_rule(n).unwrap().name(), n);
        }
        assert_eq!(homology_engine("x").err(), Some(Error::UnknownStrategy("x".into())));
    }
}

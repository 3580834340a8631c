//! The 5-ary match classifier over per-feature g-codes.
//!
//! Two g-codes of the same feature relate in exactly one of five ways,
//! ordered by strength: exact (4) > plug-in (3) > subsume (2) > sibling (1)
//! > no match (0). Plug-in means the first code is subsumed by the second;
//! subsume is its inverse; sibling means the codes are incomparable but
//! share a nonzero AND, which doubles as the code of their common abstract
//! parent. The strength values order results only — no arithmetic is
//! defined over them.

use crate::bitcode::BitCode;
use crate::service::GCode;
use crate::{Error, Result};

/// Match strength; comparison follows 4 > 3 > 2 > 1 > 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MatchStrength {
    NoMatch = 0,
    Sibling = 1,
    Subsume = 2,
    PlugIn = 3,
    Exact = 4,
}

impl MatchStrength {
    pub fn label(self) -> &'static str {
        match self {
            MatchStrength::NoMatch => "no-match",
            MatchStrength::Sibling => "sibling",
            MatchStrength::Subsume => "subsume",
            MatchStrength::PlugIn => "plug-in",
            MatchStrength::Exact => "exact",
        }
    }

    pub fn value(self) -> u8 {
        self as u8
    }
}

impl std::fmt::Display for MatchStrength {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Outcome of one pairwise comparison. The abstract parent code is present
/// exactly on sibling matches and equals the nonzero AND of the operands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    pub strength: MatchStrength,
    pub abstract_parent_code: Option<BitCode>,
}

/// Classifies a pair of raw codes. This is the comparison hot path: two
/// word-parallel passes over the operands.
pub fn relate(code1: &BitCode, code2: &BitCode) -> MatchResult {
    if code1 == code2 {
        return MatchResult {
            strength: MatchStrength::Exact,
            abstract_parent_code: None,
        };
    }
    if code1.absorbs(code2) {
        // code1 | code2 == code1: the first service is subsumed by the second
        return MatchResult {
            strength: MatchStrength::PlugIn,
            abstract_parent_code: None,
        };
    }
    if code2.absorbs(code1) {
        return MatchResult {
            strength: MatchStrength::Subsume,
            abstract_parent_code: None,
        };
    }
    let shared = code1.and(code2);
    if !shared.is_zero() {
        return MatchResult {
            strength: MatchStrength::Sibling,
            abstract_parent_code: Some(shared),
        };
    }
    MatchResult {
        strength: MatchStrength::NoMatch,
        abstract_parent_code: None,
    }
}

/// Classifies two stamped g-codes, enforcing the feature and generation
/// contracts first.
pub fn g_subsumption(g1: &GCode, g2: &GCode) -> Result<MatchResult> {
    if g1.feature != g2.feature {
        return Err(Error::FeatureMismatch(g1.feature.label(), g2.feature.label()));
    }
    if g1.stamp != g2.stamp {
        return Err(Error::StaleCode);
    }
    Ok(relate(&g1.code, &g2.code))
}

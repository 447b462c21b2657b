//! Validation and verification reports.
//!
//! Validators never fail: every broken law becomes a [`Violation`] entry.
//! Checks produce a [`VerificationReport`] whose failures carry
//! human-readable witnesses.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// A single broken law found by a validator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    MissingIdentity { object: String },
    IdentityTyping { object: String, morphism: String },
    CompositionNotTotal { after: String, then: String },
    SpuriousComposite { after: String, then: String },
    CompositionTyping { after: String, then: String, equals: String },
    LeftUnit { morphism: String },
    RightUnit { morphism: String },
    Associativity { f: String, g: String, h: String },
    NotASieve { object: String, sieve: String },
    MaximalSieve { object: String },
    Stability { morphism: String, sieve: String },
    LocalCharacter { object: String, sieve: String },
    SupersetClosure { object: String, sieve: String, superset: String },
    RestrictionNotTotal { object: String, element: String, morphism: String },
    RestrictionOutOfRange { object: String, element: String, morphism: String },
    PresheafUnit { object: String, element: String },
    PresheafComposition { object: String, element: String, after: String, then: String },
    MapNotTotal { object: String, element: String },
    MapOutOfRange { object: String, element: String },
    Naturality { object: String, element: String, morphism: String },
}

impl Violation {
    /// Stable short name of the broken law.
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::MissingIdentity { .. } => "missing-identity",
            Violation::IdentityTyping { .. } => "identity-typing",
            Violation::CompositionNotTotal { .. } => "composition-not-total",
            Violation::SpuriousComposite { .. } => "spurious-composite",
            Violation::CompositionTyping { .. } => "composition-typing",
            Violation::LeftUnit { .. } | Violation::RightUnit { .. } => "unit-law",
            Violation::Associativity { .. } => "associativity",
            Violation::NotASieve { .. } => "not-a-sieve",
            Violation::MaximalSieve { .. } => "maximal-sieve",
            Violation::Stability { .. } => "stability",
            Violation::LocalCharacter { .. } => "local-character",
            Violation::SupersetClosure { .. } => "superset-closure",
            Violation::RestrictionNotTotal { .. } => "restriction-not-total",
            Violation::RestrictionOutOfRange { .. } => "restriction-out-of-range",
            Violation::PresheafUnit { .. } => "presheaf-unit",
            Violation::PresheafComposition { .. } => "presheaf-composition",
            Violation::MapNotTotal { .. } => "map-not-total",
            Violation::MapOutOfRange { .. } => "map-out-of-range",
            Violation::Naturality { .. } => "naturality",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.kind())?;
        match self {
            Violation::MissingIdentity { object } => write!(f, "object {object} has no identity"),
            Violation::IdentityTyping { object, morphism } => {
                write!(f, "identity {morphism} of {object} is not an endomorphism of {object}")
            }
            Violation::CompositionNotTotal { after, then } => {
                write!(f, "{after}∘{then} is composable but has no table entry")
            }
            Violation::SpuriousComposite { after, then } => {
                write!(f, "{after}∘{then} has a table entry but is not composable")
            }
            Violation::CompositionTyping { after, then, equals } => {
                write!(f, "{after}∘{then} = {equals} has the wrong domain or codomain")
            }
            Violation::LeftUnit { morphism } => write!(f, "id∘{morphism} ≠ {morphism}"),
            Violation::RightUnit { morphism } => write!(f, "{morphism}∘id ≠ {morphism}"),
            Violation::Associativity { f: a, g, h } => {
                write!(f, "({a}∘{g})∘{h} ≠ {a}∘({g}∘{h})")
            }
            Violation::NotASieve { object, sieve } => {
                write!(f, "{sieve} on {object} is not closed under precomposition")
            }
            Violation::MaximalSieve { object } => {
                write!(f, "the maximal sieve on {object} is not covering")
            }
            Violation::Stability { morphism, sieve } => {
                write!(f, "pullback of covering {sieve} along {morphism} is not covering")
            }
            Violation::LocalCharacter { object, sieve } => write!(
                f,
                "{sieve} on {object} is locally covering along a covering sieve but not covering"
            ),
            Violation::SupersetClosure { object, sieve, superset } => {
                write!(f, "{superset} ⊇ covering {sieve} on {object} is not covering")
            }
            Violation::RestrictionNotTotal { object, element, morphism } => {
                write!(f, "{element}·{morphism} undefined ({element} at {object})")
            }
            Violation::RestrictionOutOfRange { object, element, morphism } => {
                write!(f, "{element}·{morphism} is not an element ({element} at {object})")
            }
            Violation::PresheafUnit { object, element } => {
                write!(f, "{element}·id ≠ {element} at {object}")
            }
            Violation::PresheafComposition { object, element, after, then } => write!(
                f,
                "({element}·{after})·{then} ≠ {element}·({after}∘{then}) ({element} at {object})"
            ),
            Violation::MapNotTotal { object, element } => {
                write!(f, "map undefined on {element} at {object}")
            }
            Violation::MapOutOfRange { object, element } => {
                write!(f, "image of {element} at {object} is not an element")
            }
            Violation::Naturality { object, element, morphism } => {
                write!(f, "F({element})·{morphism} ≠ F({element}·{morphism}) ({element} at {object})")
            }
        }
    }
}

/// Collected violations; empty iff the validated structure is lawful.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    /// Whether some violation of the named kind was found.
    pub fn has(&self, kind: &str) -> bool {
        self.violations.iter().any(|v| v.kind() == kind)
    }

    pub(crate) fn finish(mut self) -> Self {
        self.violations.sort();
        self.violations.dedup();
        self
    }
}

/// Outcome of one verification check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The check could not be decided on this (truncated) instance.
    Inconclusive(String),
    Skipped(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub check: &'static str,
    pub status: CheckStatus,
    /// Number of individual cases examined.
    pub cases: usize,
    pub failed_cases: usize,
    /// The first few failure witnesses.
    pub failures: Vec<String>,
}

const MAX_WITNESSES: usize = 16;

impl VerificationReport {
    pub fn new(check: &'static str) -> Self {
        VerificationReport { check, status: CheckStatus::Pass, cases: 0, failed_cases: 0, failures: Vec::new() }
    }

    pub fn skipped(check: &'static str, reason: impl Into<String>) -> Self {
        VerificationReport {
            check,
            status: CheckStatus::Skipped(reason.into()),
            cases: 0,
            failed_cases: 0,
            failures: Vec::new(),
        }
    }

    pub fn fail(&mut self, witness: String) {
        self.status = CheckStatus::Fail;
        self.failed_cases += 1;
        if self.failures.len() < MAX_WITNESSES {
            self.failures.push(witness);
        }
    }

    pub fn inconclusive(&mut self, reason: impl Into<String>) {
        if self.status == CheckStatus::Pass {
            self.status = CheckStatus::Inconclusive(reason.into());
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.status {
            CheckStatus::Pass => write!(f, "{}: pass ({} cases)", self.check, self.cases),
            CheckStatus::Fail => write!(
                f,
                "{}: FAIL ({} of {} cases), first: {}",
                self.check,
                self.failed_cases,
                self.cases,
                self.failures.first().map(String::as_str).unwrap_or("")
            ),
            CheckStatus::Inconclusive(r) => write!(f, "{}: inconclusive ({r})", self.check),
            CheckStatus::Skipped(r) => write!(f, "{}: skipped ({r})", self.check),
        }
    }
}

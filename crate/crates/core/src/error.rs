use crate::qfield::PrimeKind;
use crate::twistlab::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("q = {0} must be a prime congruent to 7 mod 8")]
    InvalidField(u64),
    #[error("input size unsupported: {0}")]
    SizeUnsupported(String),
    #[error("could not completely factor {0} within the configured effort")]
    FactorizationTooLarge(String),
    #[error("2-adic precision exhausted at {0} bits")]
    PrecisionExhausted(u32),
    #[error("ideal power has no primitive generator (not principal)")]
    NotPrincipal,
    #[error("norm equation search exceeded {0} iterations")]
    SearchBoundExceeded(u64),
    #[error("prime ideal of kind {0} is not allowed here")]
    DisallowedKind(PrimeKind),
    #[error("witness construction not applicable: {0}")]
    NotApplicable(String),
    #[error("needs q = 7 mod 16, got q = {0}")]
    InapplicableCongruence(u64),
    #[error("twisting hypothesis fails: {}", violation_list(.0))]
    InvalidTwist(Vec<Violation>),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

fn violation_list(v: &[Violation]) -> String {
    v.iter().map(|x| x.as_str()).collect::<Vec<_>>().join(", ")
}

impl Error {
    /// Errors caused by exhausting a configured budget rather than by bad input.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::SizeUnsupported(_)
                | Error::FactorizationTooLarge(_)
                | Error::PrecisionExhausted(_)
                | Error::SearchBoundExceeded(_)
        )
    }

    /// Stable snake_case tag used in serialized error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidField(_) => "invalid_field",
            Error::SizeUnsupported(_) => "size_unsupported",
            Error::FactorizationTooLarge(_) => "factorization_too_large",
            Error::PrecisionExhausted(_) => "precision_exhausted",
            Error::NotPrincipal => "not_principal",
            Error::SearchBoundExceeded(_) => "search_bound_exceeded",
            Error::DisallowedKind(_) => "disallowed_kind",
            Error::NotApplicable(_) => "not_applicable",
            Error::InapplicableCongruence(_) => "inapplicable_congruence",
            Error::InvalidTwist(_) => "invalid_twist",
            Error::InvalidInput(_) => "invalid_input",
        }
    }
}

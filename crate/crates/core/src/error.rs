use crate::arith::DomainError;
use crate::monoid::MonoidError;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Monoid(#[from] MonoidError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("search bound exhausted: {0}")]
    BoundExhausted(String),
    #[error("inverting {0} yields the zero blueprint")]
    ZeroInverted(String),
    #[error("diagram is not directed: {0}")]
    NotDirected(String),
    #[error("not a cover: {0}")]
    NotACover(String),
    #[error("spectrum is not locally finite")]
    NotLocallyFinite,
    #[error("canonical cover unavailable: {0}")]
    CanonicalCoverUnavailable(String),
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("no common refinement found: {0}")]
    RefinementNotFound(String),
    #[error("morphism is invalid: {0}")]
    InvalidMorphism(String),
    #[error("modules live over different bases")]
    BaseMismatch,
    #[error("not algebraically presented: {0}")]
    NotAlgebraicallyPresented(String),
    #[error("global sections did not reach a fixpoint: {0}")]
    GammaFixpointNotReached(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

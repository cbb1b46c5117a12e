use core::fmt;

/// A type alias for `Result<T, Error>`.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors produced by the analysis primitives in this crate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// A letter is not in the alphabet of the block position it occupies.
    InvalidLetter { position: usize, symbol: u8 },
    /// A block string is not 7 symbols long.
    BadBlockLength { got: usize },
    /// A gap block was passed where a fully encoded block is required.
    GapInBlock,
    /// Tried to build a sequence from an empty post list.
    EmptyPostList,
    /// An operation requires a non-empty, gap-free sequence.
    EmptySequence,
    /// Cosine similarity is undefined for an all-zero frequency vector.
    ZeroVector,
    /// An all-pairs operation needs at least `need` accounts.
    TooFewAccounts { got: usize, need: usize },
    /// A dissimilarity matrix failed a shape or symmetry check.
    InvalidMatrix(&'static str),
    /// Requested cluster count is outside `1..=m`.
    BadK { k: usize, max: usize },
    /// Requested validation range is outside `2..=m-1`.
    BadKRange { lo: usize, hi: usize, max: usize },
    /// A family-level statistic was requested for an empty family.
    EmptyFamily,
    /// Mutation statistics are undefined when no mutations were detected.
    NoMutations,
    /// Transfer confusion needs a non-empty family mutation universe.
    EmptyUniverse,
    /// Paired sequences come from different aligned length groups.
    GroupMismatch,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Error::InvalidLetter { position, symbol } => write!(
                f,
                "symbol '{}' is not valid at block position {}",
                symbol as char, position
            ),
            Error::BadBlockLength { got } => {
                write!(f, "block strings must have exactly 7 symbols, got {}", got)
            }
            Error::GapInBlock => write!(f, "operation requires a gap-free block"),
            Error::EmptyPostList => write!(f, "cannot build a sequence from zero posts"),
            Error::EmptySequence => write!(f, "operation requires a non-empty sequence"),
            Error::ZeroVector => write!(f, "cosine similarity is undefined for a zero vector"),
            Error::TooFewAccounts { got, need } => {
                write!(f, "need at least {} accounts, got {}", need, got)
            }
            Error::InvalidMatrix(reason) => write!(f, "invalid matrix: {}", reason),
            Error::BadK { k, max } => write!(f, "cluster count {} outside 1..={}", k, max),
            Error::BadKRange { lo, hi, max } => {
                write!(f, "k range {}..={} outside 2..={}", lo, hi, max)
            }
            Error::EmptyFamily => write!(f, "family has no member sequences"),
            Error::NoMutations => write!(f, "no mutations detected for this family"),
            Error::EmptyUniverse => write!(f, "family mutation universe is empty"),
            Error::GroupMismatch => write!(f, "sequences belong to different length groups"),
        }
    }
}

impl core::error::Error for Error {}

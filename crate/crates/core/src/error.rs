use core::fmt;

use alloc::string::String;

/// Errors raised by constructors and operations across the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    TooFewVertices(usize),
    RepeatedVertex(usize),
    SelfIntersection {
        edge_a: usize,
        edge_b: usize,
    },
    DegeneratePolygon,
    InvalidParameter(String),
    NoQualifyingCube {
        max_level: u8,
    },
    NeighborRatio {
        a: usize,
        b: usize,
    },
    Disconnected {
        a: usize,
        b: usize,
    },
    NoShadowRatio {
        q: usize,
        s: usize,
    },
    /// A hypothesis on `(s, p, q)` required by the requested variant fails.
    Hypothesis(&'static str),
    NonFiniteSample {
        cube: usize,
        node: usize,
    },
    NotANode,
    NegativeValues,
    OrphanCube {
        cube: usize,
    },
    CoverMismatch,
    ZeroNorm,
    Refused(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::TooFewVertices(n) => write!(f, "polygon needs at least 3 vertices, got {n}"),
            Error::RepeatedVertex(i) => write!(f, "vertex {i} repeats its predecessor"),
            Error::SelfIntersection { edge_a, edge_b } => {
                write!(f, "polygon is self-intersecting (edges {edge_a} and {edge_b})")
            }
            Error::DegeneratePolygon => write!(f, "polygon has zero area"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::NoQualifyingCube { max_level } => {
                write!(f, "no dyadic cube satisfies the Whitney bracket at any level <= {max_level}")
            }
            Error::NeighborRatio { a, b } => write!(
                f,
                "touching cubes {a} and {b} differ by more than a factor 2 in size; c_w is incompatible with the neighbor-ratio condition"
            ),
            Error::Disconnected { a, b } => {
                write!(f, "cubes {a} and {b} lie in different adjacency components")
            }
            Error::NoShadowRatio { q, s } => {
                write!(f, "no shadow ratio in the search grid works for the chain [{q}, {s}]")
            }
            Error::Hypothesis(h) => write!(f, "parameter hypothesis violated: requires {h}"),
            Error::NonFiniteSample { cube, node } => {
                write!(f, "non-finite function value at cube {cube}, node {node}")
            }
            Error::NotANode => write!(f, "point is not a node of the cover"),
            Error::NegativeValues => write!(f, "maximal operator needs a non-negative function"),
            Error::OrphanCube { cube } => write!(
                f,
                "exterior cube {cube} touches the boundary but has no same-size interior partner; the interior cover is too shallow"
            ),
            Error::CoverMismatch => write!(f, "function is not sampled on the expected cover"),
            Error::ZeroNorm => write!(f, "denominator norm vanishes for a non-constant function"),
            Error::Refused(why) => write!(f, "refused: {why}"),
        }
    }
}

#[cfg(feature = "std")]
extern crate std;

#[cfg(feature = "std")]
impl std::error::Error for Error {}

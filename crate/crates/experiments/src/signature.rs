//! Signature matrices of the nine parts.

use dyadlab_core::operators::parts::Part;
use dyadlab_core::operators::Piece;
use dyadlab_core::{Error, Result};

pub type Signature = [[u8; 3]; 2];

fn row(p: Piece) -> [u8; 3] {
    match p {
        Piece::Pi => [0, 1, 0],
        Piece::Z => [0, 0, 1],
        _ => [0, 0, 0],
    }
}

fn pieces(p: Part) -> (Piece, Piece) {
    match p {
        Part::DD => (Piece::D, Piece::D),
        Part::DPi => (Piece::D, Piece::Pi),
        Part::DZ => (Piece::D, Piece::Z),
        Part::PiD => (Piece::Pi, Piece::D),
        Part::PiPi => (Piece::Pi, Piece::Pi),
        Part::PiZ => (Piece::Pi, Piece::Z),
        Part::ZD => (Piece::Z, Piece::D),
        Part::ZPi => (Piece::Z, Piece::Pi),
        Part::ZZ => (Piece::Z, Piece::Z),
    }
}

/// Row one describes the first variable, row two the second.
pub fn signature(p: Part) -> Signature {
    let (x, y) = pieces(p);
    [row(x), row(y)]
}

pub fn signature_of(name: &str) -> Result<Signature> {
    Part::from_name(name).map(signature).ok_or_else(|| Error::InvalidParameter(format!("unknown part {name:?}")))
}

/// Number of ones in the signature.
pub fn ones(p: Part) -> usize {
    signature(p).iter().flatten().filter(|v| **v == 1).count()
}

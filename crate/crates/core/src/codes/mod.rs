//! Reed–Solomon, BCH and Reed–Muller codes, and the bridge from field symbols
//! to the binary strings written into memory cells.

mod bch;
mod bm;
mod rm;
mod rs;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::field::{FieldError, FieldPoly, FieldSpec, Symbol};

pub use bch::{bch_build, Bch};
pub use bm::{berlekamp_massey, chien_search};
pub use rm::{rm_build, rm_dimension, ReedMuller};
pub use rs::{rs_build, ReedSolomon};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("invalid code parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("symbol {value} is not an element of GF(2^{s})")]
    SymbolOutOfRange { value: Symbol, s: u32 },
    #[error("bit value {0} is not 0 or 1")]
    NotABit(u8),
    #[error("{0} codes are not cyclic in this construction")]
    NotCyclic(CodeFamily),
    #[error(transparent)]
    Field(#[from] FieldError),
}

impl CodeError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Self::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<(), CodeError> {
    if expected != actual {
        return Err(CodeError::LengthMismatch { expected, actual });
    }
    Ok(())
}

pub(crate) fn check_bits(bits: &[u8]) -> Result<(), CodeError> {
    match bits.iter().find(|&&b| b > 1) {
        Some(&b) => Err(CodeError::NotABit(b)),
        None => Ok(()),
    }
}

/// Result of running a decoder on a received word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded<T> {
    /// A codeword was reached by changing `corrected` positions.
    Corrected { info: T, corrected: usize },
    /// No codeword within the decoding radius. `fallback` is the info word read
    /// off the uncorrected input through the encoder's inverse.
    Failure { fallback: T },
}

impl<T> Decoded<T> {
    /// The decoder's best guess of the information word.
    pub fn estimate(&self) -> &T {
        match self {
            Decoded::Corrected { info, .. } => info,
            Decoded::Failure { fallback } => fallback,
        }
    }

    pub fn into_estimate(self) -> T {
        match self {
            Decoded::Corrected { info, .. } => info,
            Decoded::Failure { fallback } => fallback,
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, Decoded::Failure { .. })
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Decoded<U> {
        match self {
            Decoded::Corrected { info, corrected } => Decoded::Corrected {
                info: f(info),
                corrected,
            },
            Decoded::Failure { fallback } => Decoded::Failure {
                fallback: f(fallback),
            },
        }
    }
}

/// Dense binary matrix with bit-packed rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        Self {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn row(&self, r: usize) -> Vec<u8> {
        (0..self.cols).map(|c| self.get(r, c) as u8).collect()
    }

    /// `coeffs · M` over GF(2); `coeffs.len()` must equal the row count.
    pub fn left_mul(&self, coeffs: &[u8]) -> Vec<u8> {
        debug_assert_eq!(coeffs.len(), self.rows);
        let mut acc = vec![0u64; self.words];
        for (r, _) in coeffs.iter().enumerate().filter(|(_, &b)| b & 1 == 1) {
            let row = &self.data[r * self.words..(r + 1) * self.words];
            for (a, w) in acc.iter_mut().zip(row) {
                *a ^= w;
            }
        }
        (0..self.cols)
            .map(|c| ((acc[c / 64] >> (c % 64)) & 1) as u8)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodeFamily {
    Rs,
    Bch,
    Rm,
}

impl fmt::Display for CodeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CodeFamily::Rs => "rs",
            CodeFamily::Bch => "bch",
            CodeFamily::Rm => "rm",
        })
    }
}

/// A constructed code together with its encoder and decoder.
#[derive(Debug, Clone)]
pub enum CodeSpec {
    Rs(ReedSolomon),
    Bch(Bch),
    Rm(ReedMuller),
}

impl CodeSpec {
    pub fn family(&self) -> CodeFamily {
        match self {
            CodeSpec::Rs(_) => CodeFamily::Rs,
            CodeSpec::Bch(_) => CodeFamily::Bch,
            CodeSpec::Rm(_) => CodeFamily::Rm,
        }
    }

    /// Block length in code symbols.
    pub fn n(&self) -> usize {
        match self {
            CodeSpec::Rs(c) => c.n(),
            CodeSpec::Bch(c) => c.n(),
            CodeSpec::Rm(c) => c.n(),
        }
    }

    /// Dimension in code symbols.
    pub fn k(&self) -> usize {
        match self {
            CodeSpec::Rs(c) => c.k(),
            CodeSpec::Bch(c) => c.k(),
            CodeSpec::Rm(c) => c.k(),
        }
    }

    /// Designed minimum distance (true minimum distance for RS and RM).
    pub fn d_design(&self) -> usize {
        match self {
            CodeSpec::Rs(c) => c.n() - c.k() + 1,
            CodeSpec::Bch(c) => c.delta(),
            CodeSpec::Rm(c) => c.min_distance(),
        }
    }

    /// Number of symbol (RS) or bit errors the decoder always corrects.
    pub fn correction_capability(&self) -> usize {
        match self {
            CodeSpec::Rs(c) => (c.n() - c.k()) / 2,
            CodeSpec::Bch(c) => (c.delta().saturating_sub(1)) / 2,
            CodeSpec::Rm(c) => (c.min_distance() - 1) / 2,
        }
    }

    /// Field the code symbols live in. BCH and RM codewords are binary; for
    /// BCH this is the extension holding the roots of g(x).
    pub fn field(&self) -> &Arc<FieldSpec> {
        match self {
            CodeSpec::Rs(c) => c.field(),
            CodeSpec::Bch(c) => c.ext(),
            CodeSpec::Rm(c) => c.field(),
        }
    }

    /// Bits per code symbol once written to cells.
    pub fn symbol_bits(&self) -> usize {
        match self {
            CodeSpec::Rs(c) => c.field().degree() as usize,
            _ => 1,
        }
    }

    /// K: information bits per block.
    pub fn info_bits(&self) -> usize {
        self.k() * self.symbol_bits()
    }

    /// N: memory cells per block.
    pub fn cell_bits(&self) -> usize {
        self.n() * self.symbol_bits()
    }

    /// R = K / N.
    pub fn rate(&self) -> f64 {
        self.info_bits() as f64 / self.cell_bits() as f64
    }

    pub fn generator_poly(&self) -> Option<&FieldPoly> {
        match self {
            CodeSpec::Rs(c) => Some(c.generator()),
            CodeSpec::Bch(c) => Some(c.generator()),
            CodeSpec::Rm(_) => None,
        }
    }

    pub fn generator_matrix(&self) -> Option<&BitMatrix> {
        match self {
            CodeSpec::Rs(_) => None,
            CodeSpec::Bch(c) => Some(c.generator_matrix()),
            CodeSpec::Rm(c) => Some(c.generator_matrix()),
        }
    }

    /// Human-readable parameters, e.g. `RS[255,25] over GF(2^8)`.
    pub fn label(&self) -> String {
        match self {
            CodeSpec::Rs(c) => format!(
                "RS[{},{}] over GF(2^{}), b={}",
                c.n(),
                c.k(),
                c.field().degree(),
                c.b()
            ),
            CodeSpec::Bch(c) => format!(
                "BCH[{},{}] delta={}, b={}",
                c.n(),
                c.k(),
                c.delta(),
                c.b()
            ),
            CodeSpec::Rm(c) => format!("RM({},{}) [{},{}]", c.r(), c.m(), c.n(), c.k()),
        }
    }

    /// Per-symbol basis expansion; identity for binary codes.
    pub fn codeword_to_bits(&self, symbols: &[Symbol]) -> Result<Vec<u8>, CodeError> {
        match self {
            CodeSpec::Rs(c) => {
                let f = c.field();
                let mut out = Vec::with_capacity(symbols.len() * f.degree() as usize);
                for &v in symbols {
                    if !f.contains(v as u32) {
                        return Err(CodeError::SymbolOutOfRange { value: v, s: f.degree() });
                    }
                    out.extend(f.basis_expand(v));
                }
                Ok(out)
            }
            _ => {
                if let Some(&v) = symbols.iter().find(|&&v| v > 1) {
                    return Err(CodeError::SymbolOutOfRange { value: v, s: 1 });
                }
                Ok(symbols.iter().map(|&v| v as u8).collect())
            }
        }
    }

    /// Inverse of [`codeword_to_bits`](Self::codeword_to_bits).
    pub fn bits_to_symbols(&self, bits: &[u8]) -> Result<Vec<Symbol>, CodeError> {
        check_bits(bits)?;
        let s = self.symbol_bits();
        if !bits.len().is_multiple_of(s) {
            return Err(CodeError::invalid(
                "bits",
                format!("length {} is not a multiple of {s}", bits.len()),
            ));
        }
        match self {
            CodeSpec::Rs(c) => bits
                .chunks(s)
                .map(|chunk| c.field().basis_compose(chunk).map_err(CodeError::from))
                .collect(),
            _ => Ok(bits.iter().map(|&b| b as Symbol).collect()),
        }
    }

    /// Encodes K information bits into the N-bit cell string.
    pub fn encode_bits(&self, info: &[u8]) -> Result<Vec<u8>, CodeError> {
        check_len(self.info_bits(), info.len())?;
        check_bits(info)?;
        match self {
            CodeSpec::Rs(c) => {
                let syms = self.bits_to_symbols(info)?;
                self.codeword_to_bits(&c.encode(&syms)?)
            }
            CodeSpec::Bch(c) => c.encode(info),
            CodeSpec::Rm(c) => c.encode(info),
        }
    }

    /// Decodes an N-bit cell string back to K information bits.
    pub fn decode_bits(&self, cells: &[u8]) -> Result<Decoded<Vec<u8>>, CodeError> {
        check_len(self.cell_bits(), cells.len())?;
        check_bits(cells)?;
        match self {
            CodeSpec::Rs(c) => {
                let syms = self.bits_to_symbols(cells)?;
                let decoded = c.decode(&syms)?;
                Ok(decoded.map(|info| {
                    self.codeword_to_bits(&info)
                        .expect("decoder output lies in the field")
                }))
            }
            CodeSpec::Bch(c) => c.decode(cells),
            CodeSpec::Rm(c) => c.decode(cells),
        }
    }

    /// Z(C): exponents i in 0..n with g(α^i) = 0.
    pub fn defining_set(&self) -> Result<BTreeSet<usize>, CodeError> {
        let (g, ext) = match self {
            CodeSpec::Rs(c) => (c.generator(), c.field()),
            CodeSpec::Bch(c) => (c.generator(), c.ext()),
            CodeSpec::Rm(_) => return Err(CodeError::NotCyclic(CodeFamily::Rm)),
        };
        // Binary generator coefficients 0/1 embed unchanged into the extension.
        Ok((0..self.n())
            .filter(|&i| g.eval(ext, ext.alpha_pow(i as i64)) == 0)
            .collect())
    }
}

impl From<ReedSolomon> for CodeSpec {
    fn from(c: ReedSolomon) -> Self {
        CodeSpec::Rs(c)
    }
}

impl From<Bch> for CodeSpec {
    fn from(c: Bch) -> Self {
        CodeSpec::Bch(c)
    }
}

impl From<ReedMuller> for CodeSpec {
    fn from(c: ReedMuller) -> Self {
        CodeSpec::Rm(c)
    }
}

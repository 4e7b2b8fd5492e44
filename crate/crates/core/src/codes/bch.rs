//! Binary primitive BCH codes of length n = 2^e − 1.

use std::sync::Arc;

use super::bm::{berlekamp_massey, chien_search};
use super::{check_bits, check_len, BitMatrix, CodeError, CodeSpec, Decoded};
use crate::field::{cyclotomic_coset, minimal_polynomial, FieldPoly, FieldSpec, Symbol};

/// BCH(δ, b) with g(x) = lcm{M^(b), …, M^(b+δ−2)} over GF(2).
#[derive(Debug, Clone)]
pub struct Bch {
    ext: Arc<FieldSpec>,
    n: usize,
    k: usize,
    delta: usize,
    b: usize,
    generator: FieldPoly,
    // generator bits, lowest degree first
    gen_bits: Vec<u8>,
    matrix: BitMatrix,
}

pub fn bch_build(ext: Arc<FieldSpec>, delta: usize, b: usize) -> Result<CodeSpec, CodeError> {
    Bch::new(ext, delta, b).map(CodeSpec::Bch)
}

impl Bch {
    pub fn new(ext: Arc<FieldSpec>, delta: usize, b: usize) -> Result<Self, CodeError> {
        let n = ext.group_order();
        if delta == 0 || delta > n {
            return Err(CodeError::invalid("delta", format!("{delta} outside 1..={n}")));
        }
        let base = FieldSpec::new(1)?;
        let mut generator = FieldPoly::one();
        let mut covered = vec![false; n];
        for j in b..b + delta - 1 {
            let i = j % n;
            if covered[i] {
                continue;
            }
            for c in cyclotomic_coset(i, n, 1) {
                covered[c] = true;
            }
            generator = generator.mul(&base, &minimal_polynomial(i, &base, &ext)?);
        }
        let deg = generator.degree().unwrap_or(0);
        if deg >= n {
            return Err(CodeError::invalid(
                "delta",
                format!("{delta} leaves no information symbols (deg g = {deg})"),
            ));
        }
        let k = n - deg;
        let gen_bits: Vec<u8> = generator.coeffs().iter().map(|&c| c as u8).collect();
        let mut matrix = BitMatrix::zeros(k, n);
        for row in 0..k {
            for (j, &g) in gen_bits.iter().enumerate() {
                matrix.set(row, row + j, g == 1);
            }
        }
        Ok(Self {
            ext,
            n,
            k,
            delta,
            b,
            generator,
            gen_bits,
            matrix,
        })
    }

    pub fn ext(&self) -> &Arc<FieldSpec> {
        &self.ext
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn generator(&self) -> &FieldPoly {
        &self.generator
    }

    /// k × n matrix whose rows are x^i g(x).
    pub fn generator_matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>, CodeError> {
        check_len(self.k, info.len())?;
        check_bits(info)?;
        Ok(self.matrix.left_mul(info))
    }

    /// Quotient of `word(x) / g(x)` over GF(2) and whether the remainder is zero.
    fn divide(&self, word: &[u8]) -> (Vec<u8>, bool) {
        let dg = self.gen_bits.len() - 1;
        let mut rem = word.to_vec();
        let mut quot = vec![0u8; self.k];
        for i in (dg..self.n).rev() {
            if rem[i] == 1 {
                quot[i - dg] = 1;
                for (j, &g) in self.gen_bits.iter().enumerate() {
                    rem[i - dg + j] ^= g;
                }
            }
        }
        let exact = rem[..dg].iter().all(|&r| r == 0);
        (quot, exact)
    }

    /// Syndromes S_j = r(α^(b+j)), j = 0..δ−1, in the extension field.
    fn syndromes(&self, word: &[u8]) -> Vec<Symbol> {
        let f = &self.ext;
        let n = self.n;
        let mut synd = vec![0 as Symbol; self.delta - 1];
        for (i, _) in word.iter().enumerate().filter(|(_, &r)| r == 1) {
            let mut e = ((self.b % n) * i) % n;
            for s in synd.iter_mut() {
                *s ^= f.exp_raw(e);
                e += i;
                if e >= n {
                    e -= n;
                }
            }
        }
        synd
    }

    /// Corrects up to ⌊(δ − 1)/2⌋ bit errors.
    pub fn decode(&self, received: &[u8]) -> Result<Decoded<Vec<u8>>, CodeError> {
        check_len(self.n, received.len())?;
        check_bits(received)?;
        let failure = || Decoded::Failure {
            fallback: self.divide(received).0,
        };
        let synd = self.syndromes(received);
        if synd.iter().all(|&s| s == 0) {
            return Ok(Decoded::Corrected {
                info: self.divide(received).0,
                corrected: 0,
            });
        }
        let t = (self.delta - 1) / 2;
        let (lambda, len) = berlekamp_massey(&self.ext, &synd);
        if len > t || lambda.degree() != Some(len) {
            return Ok(failure());
        }
        let positions = chien_search(&self.ext, &lambda, self.n);
        if positions.len() != len {
            return Ok(failure());
        }
        let mut error_word = vec![0u8; self.n];
        for &p in &positions {
            error_word[p] = 1;
        }
        if self.syndromes(&error_word) != synd {
            return Ok(failure());
        }
        let corrected: Vec<u8> = received
            .iter()
            .zip(&error_word)
            .map(|(r, e)| r ^ e)
            .collect();
        let (info, exact) = self.divide(&corrected);
        debug_assert!(exact, "zero syndromes imply divisibility by g");
        Ok(Decoded::Corrected {
            info,
            corrected: positions.len(),
        })
    }
}

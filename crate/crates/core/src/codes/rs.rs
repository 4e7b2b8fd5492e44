//! Reed–Solomon codes of length n = q − 1 over GF(q).
//!
//! Codewords are evaluations c_i = α^(i(1−b)) · f(α^i), i = 0..n, of message
//! polynomials f with deg f < k. The column multipliers make this set equal to
//! the cyclic code generated by g(x) = (x − α^b)···(x − α^(b+n−k−1)); for the
//! narrow-sense b = 1 they are all 1 and the code is the plain evaluation map.
//! Decoding is syndrome-based: Berlekamp–Massey, Chien search, Forney, then an
//! inverse transform back to the coefficients of f.

use std::sync::Arc;

use super::bm::{berlekamp_massey, chien_search};
use super::{check_len, CodeError, CodeSpec, Decoded};
use crate::field::{FieldPoly, FieldSpec, Symbol};

#[derive(Debug, Clone)]
pub struct ReedSolomon {
    field: Arc<FieldSpec>,
    n: usize,
    k: usize,
    b: usize,
    generator: FieldPoly,
    points: Vec<Symbol>,
    // log of the column multiplier α^(i(1−b)), reduced mod n
    column_log: Vec<usize>,
    // Syndrome contribution of each (position, basis bit), n−k symbols each,
    // so a syndrome is an XOR of columns. Only built while it stays small.
    syndrome_columns: Option<Arc<Vec<Symbol>>>,
}

/// Largest syndrome column table built, in symbols.
const SYNDROME_TABLE_LIMIT: usize = 1 << 20;

/// RS_k(n, b) over `field`, n = q − 1.
pub fn rs_build(field: Arc<FieldSpec>, k: usize, b: usize) -> Result<CodeSpec, CodeError> {
    ReedSolomon::new(field, k, b).map(CodeSpec::Rs)
}

impl ReedSolomon {
    pub fn new(field: Arc<FieldSpec>, k: usize, b: usize) -> Result<Self, CodeError> {
        let n = field.group_order();
        if k == 0 || k > n {
            return Err(CodeError::invalid("k", format!("{k} outside 1..={n}")));
        }
        let mut generator = FieldPoly::one();
        for j in b..b + n - k {
            generator = generator.mul(&field, &FieldPoly::linear(field.alpha_pow(j as i64)));
        }
        let points = (0..n).map(|i| field.alpha_pow(i as i64)).collect();
        let column_log = (0..n)
            .map(|i| (i as i64 * (1 - b as i64)).rem_euclid(n as i64) as usize)
            .collect();
        let syndrome_columns = syndrome_table(&field, k, b);
        Ok(Self {
            field,
            n,
            k,
            b,
            generator,
            points,
            column_log,
            syndrome_columns,
        })
    }

    pub fn field(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn generator(&self) -> &FieldPoly {
        &self.generator
    }

    /// Evaluation points P_1..P_n = α^0..α^(n−1).
    pub fn points(&self) -> &[Symbol] {
        &self.points
    }

    fn check_symbols(&self, symbols: &[Symbol]) -> Result<(), CodeError> {
        match symbols.iter().find(|&&v| !self.field.contains(v as u32)) {
            Some(&value) => Err(CodeError::SymbolOutOfRange {
                value,
                s: self.field.degree(),
            }),
            None => Ok(()),
        }
    }

    /// `info` holds the k coefficients of f, lowest degree first.
    pub fn encode(&self, info: &[Symbol]) -> Result<Vec<Symbol>, CodeError> {
        check_len(self.k, info.len())?;
        self.check_symbols(info)?;
        let f = &self.field;
        Ok(self
            .points
            .iter()
            .zip(&self.column_log)
            .map(|(&p, &cl)| {
                let v = info.iter().rev().fold(0, |acc, &c| f.mul(acc, p) ^ c);
                f.mul(v, f.exp_raw(cl))
            })
            .collect())
    }

    /// Coefficients f_0..f_(limit−1) of the message polynomial behind `word`,
    /// assuming `word` is a codeword: f_l = Σ_i c_i α^(−i(1−b)) α^(−il).
    pub(crate) fn message_coeffs(&self, word: &[Symbol], limit: usize) -> Vec<Symbol> {
        let f = &self.field;
        let n = self.n;
        // log of c_i / column multiplier, None for zero symbols
        let logs: Vec<Option<usize>> = word
            .iter()
            .zip(&self.column_log)
            .map(|(&c, &cl)| f.log(c).map(|l| (l as usize + n - cl) % n))
            .collect();
        (0..limit)
            .map(|l| {
                let mut acc: Symbol = 0;
                // shift = i·l mod n, kept incrementally
                let mut shift = 0usize;
                for lg in &logs {
                    if let Some(lg) = lg {
                        acc ^= f.exp_raw(lg + n - shift);
                    }
                    shift += l;
                    if shift >= n {
                        shift -= n;
                    }
                }
                // n is odd, so n^(−1) = 1 in characteristic 2.
                acc
            })
            .collect()
    }

    /// Syndromes S_j = r(α^(b+j)), j = 0..n−k.
    pub(crate) fn syndromes(&self, received: &[Symbol]) -> Vec<Symbol> {
        let Some(table) = &self.syndrome_columns else {
            return self.syndromes_by_log(received);
        };
        let m = self.n - self.k;
        let s = self.field.degree() as usize;
        let mut synd = vec![0 as Symbol; m];
        for (i, &r) in received.iter().enumerate() {
            let mut bits = r;
            while bits != 0 {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let col = &table[(i * s + v) * m..][..m];
                for (acc, &c) in synd.iter_mut().zip(col) {
                    *acc ^= c;
                }
            }
        }
        synd
    }

    fn syndromes_by_log(&self, received: &[Symbol]) -> Vec<Symbol> {
        let f = &self.field;
        let n = self.n;
        let m = n - self.k;
        let mut synd = vec![0 as Symbol; m];
        for (i, &r) in received.iter().enumerate() {
            let Some(lr) = f.log(r) else { continue };
            let mut e = (lr as usize + (self.b % n) * i) % n;
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

    /// Bounded-distance decoding up to ⌊(n − k)/2⌋ symbol errors.
    pub fn decode(&self, received: &[Symbol]) -> Result<Decoded<Vec<Symbol>>, CodeError> {
        check_len(self.n, received.len())?;
        self.check_symbols(received)?;
        let failure = || Decoded::Failure {
            fallback: self.message_coeffs(received, self.k),
        };

        let synd = self.syndromes(received);
        if synd.iter().all(|&s| s == 0) {
            return Ok(Decoded::Corrected {
                info: self.message_coeffs(received, self.k),
                corrected: 0,
            });
        }
        let f = &self.field;
        let n = self.n;
        let t = (n - self.k) / 2;
        let (lambda, len) = berlekamp_massey(f, &synd);
        if len > t || lambda.degree() != Some(len) {
            return Ok(failure());
        }
        let positions = chien_search(f, &lambda, n);
        if positions.len() != len {
            return Ok(failure());
        }

        // Ω = S·Λ mod x^(n−k)
        let synd_poly = FieldPoly::new(synd.clone());
        let mut omega = synd_poly.mul(f, &lambda).coeffs().to_vec();
        omega.truncate(synd.len());
        let omega = FieldPoly::new(omega);
        let lambda_d = lambda.derivative();

        let mut error_word = vec![0 as Symbol; n];
        for &pos in &positions {
            let x_inv = f.alpha_pow(-(pos as i64));
            let denom = lambda_d.eval(f, x_inv);
            if denom == 0 {
                return Ok(failure());
            }
            // Y = X^(1−b) Ω(X^−1) / Λ'(X^−1)
            let scale = f.alpha_pow(pos as i64 * (1 - self.b as i64));
            let y = f.mul(scale, f.div(omega.eval(f, x_inv), denom)?);
            if y == 0 {
                return Ok(failure());
            }
            error_word[pos] = y;
        }

        // The error pattern must reproduce every syndrome, otherwise the
        // corrected word is not a codeword.
        if self.syndromes(&error_word) != synd {
            return Ok(failure());
        }
        let corrected: Vec<Symbol> = received
            .iter()
            .zip(&error_word)
            .map(|(r, e)| r ^ e)
            .collect();
        Ok(Decoded::Corrected {
            info: self.message_coeffs(&corrected, self.k),
            corrected: positions.len(),
        })
    }
}

/// Column for (i, v) holds α^(v + (b+j)i), j = 0..n−k: the syndromes of the
/// word with α^v at position i.
fn syndrome_table(field: &FieldSpec, k: usize, b: usize) -> Option<Arc<Vec<Symbol>>> {
    let n = field.group_order();
    let m = n - k;
    let s = field.degree() as usize;
    if m == 0 || n * s * m > SYNDROME_TABLE_LIMIT {
        return None;
    }
    let mut table = Vec::with_capacity(n * s * m);
    for i in 0..n {
        for v in 0..s {
            let mut e = (v + (b % n) * i) % n;
            for _ in 0..m {
                table.push(field.exp_raw(e));
                e = (e + i) % n;
            }
        }
    }
    Some(Arc::new(table))
}

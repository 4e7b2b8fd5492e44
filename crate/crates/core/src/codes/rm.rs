//! Binary Reed–Muller codes RM(r, m) with Reed's majority-logic decoder.
//!
//! Evaluation point j ∈ 0..2^m has coordinates x_v = bit v of j. Information
//! bit i is the coefficient of the i-th monomial, monomials ordered by degree
//! and then by variable bitmask.

use std::sync::Arc;

use super::{check_bits, check_len, BitMatrix, CodeError, CodeSpec, Decoded};
use crate::field::FieldSpec;

/// |E_q(r, m)|: exponent vectors e ∈ {0..q−1}^m with Σ e_i ≤ r.
pub fn rm_dimension(r: usize, m: usize, q: usize) -> usize {
    // counts[s] = number of vectors so far with coordinate sum s
    let mut counts = vec![0usize; r + 1];
    counts[0] = 1;
    for _ in 0..m {
        let mut next = vec![0usize; r + 1];
        for (s, &c) in counts.iter().enumerate() {
            for e in 0..q.min(r - s + 1) {
                next[s + e] += c;
            }
        }
        counts = next;
    }
    counts.iter().sum()
}

#[derive(Debug, Clone)]
pub struct ReedMuller {
    field: Arc<FieldSpec>,
    r: usize,
    m: usize,
    monomials: Vec<u32>,
    matrix: BitMatrix,
}

pub fn rm_build(r: usize, m: usize, field: Arc<FieldSpec>) -> Result<CodeSpec, CodeError> {
    ReedMuller::new(r, m, field).map(CodeSpec::Rm)
}

impl ReedMuller {
    pub fn new(r: usize, m: usize, field: Arc<FieldSpec>) -> Result<Self, CodeError> {
        if field.degree() != 1 {
            return Err(CodeError::invalid(
                "field",
                format!("only binary RM codes are supported, got GF(2^{})", field.degree()),
            ));
        }
        if m == 0 || m > 20 {
            return Err(CodeError::invalid("m", format!("{m} outside 1..=20")));
        }
        let q = field.order();
        if r >= m * (q - 1) {
            return Err(CodeError::invalid(
                "r",
                format!("need 0 <= r < m(q-1) = {}, got {r}", m * (q - 1)),
            ));
        }
        let mut monomials: Vec<u32> = (0..1u32 << m)
            .filter(|mask| mask.count_ones() as usize <= r)
            .collect();
        monomials.sort_by_key(|&mask| (mask.count_ones(), mask));
        let n = 1usize << m;
        let mut matrix = BitMatrix::zeros(monomials.len(), n);
        for (row, &mask) in monomials.iter().enumerate() {
            for j in 0..n {
                matrix.set(row, j, (j as u32) & mask == mask);
            }
        }
        Ok(Self {
            field,
            r,
            m,
            monomials,
            matrix,
        })
    }

    pub fn field(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        1 << self.m
    }

    pub fn k(&self) -> usize {
        self.monomials.len()
    }

    /// 2^(m − r).
    pub fn min_distance(&self) -> usize {
        1 << (self.m - self.r)
    }

    /// Monomial variable masks in information-bit order.
    pub fn monomials(&self) -> &[u32] {
        &self.monomials
    }

    pub fn generator_matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>, CodeError> {
        check_len(self.k(), info.len())?;
        check_bits(info)?;
        Ok(self.matrix.left_mul(info))
    }

    /// Majority-logic decoding, highest degree first. Each degree-d coefficient
    /// gets 2^(m−d) independent parity checks (sums over the subcubes spanned by
    /// its variables); ties vote 0. Always returns an estimate.
    pub fn decode(&self, received: &[u8]) -> Result<Decoded<Vec<u8>>, CodeError> {
        check_len(self.n(), received.len())?;
        check_bits(received)?;
        let n = self.n();
        let mut residual = received.to_vec();
        let mut info = vec![0u8; self.k()];
        for degree in (0..=self.r).rev() {
            let layer: Vec<usize> = (0..self.k())
                .filter(|&i| self.monomials[i].count_ones() as usize == degree)
                .collect();
            for &i in &layer {
                let mask = self.monomials[i];
                let mut ones = 0usize;
                let mut checks = 0usize;
                for base in (0..n as u32).filter(|j| j & mask == 0) {
                    let mut parity = 0u8;
                    let mut sub = mask;
                    loop {
                        parity ^= residual[(base | sub) as usize];
                        if sub == 0 {
                            break;
                        }
                        sub = (sub - 1) & mask;
                    }
                    ones += parity as usize;
                    checks += 1;
                }
                info[i] = u8::from(2 * ones > checks);
            }
            for &i in &layer {
                if info[i] == 1 {
                    let mask = self.monomials[i];
                    for (j, r) in residual.iter_mut().enumerate() {
                        if (j as u32) & mask == mask {
                            *r ^= 1;
                        }
                    }
                }
            }
        }
        let corrected = residual.iter().filter(|&&b| b == 1).count();
        Ok(Decoded::Corrected { info, corrected })
    }
}

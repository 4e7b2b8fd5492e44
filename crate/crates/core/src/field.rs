//! Arithmetic over GF(2^s), 1 ≤ s ≤ 16, and polynomials with coefficients in it.
//!
//! Elements are represented in the polynomial basis {1, α, …, α^(s−1)}: bit `j`
//! of a value is the coefficient of α^j. Multiplication goes through log/antilog
//! tables, so the modulus must be primitive (x must generate the multiplicative
//! group), not merely irreducible.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// A field symbol: the integer form of an element of GF(2^s), always `< q`.
pub type Symbol = u16;

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 16;

/// Default primitive polynomials for s = 1..=16, bit `j` = coefficient of x^j.
///
/// | s | polynomial |
/// |---|------------|
/// | 1 | x + 1 |
/// | 2 | x² + x + 1 |
/// | 3 | x³ + x + 1 |
/// | 4 | x⁴ + x + 1 |
/// | 5 | x⁵ + x² + 1 |
/// | 6 | x⁶ + x + 1 |
/// | 7 | x⁷ + x³ + 1 |
/// | 8 | x⁸ + x⁴ + x³ + x² + 1 |
/// | 9 | x⁹ + x⁴ + 1 |
/// | 10 | x¹⁰ + x³ + 1 |
/// | 11 | x¹¹ + x² + 1 |
/// | 12 | x¹² + x⁶ + x⁴ + x + 1 |
/// | 13 | x¹³ + x⁴ + x³ + x + 1 |
/// | 14 | x¹⁴ + x¹⁰ + x⁶ + x + 1 |
/// | 15 | x¹⁵ + x + 1 |
/// | 16 | x¹⁶ + x¹² + x³ + x + 1 |
pub const DEFAULT_MODULI: [u32; 16] = [
    0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1100B,
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("extension degree {0} outside 1..=16")]
    DegreeOutOfRange(u32),
    #[error("modulus {modulus:#x} has degree {actual}, expected {expected}")]
    ModulusDegree {
        modulus: u32,
        expected: u32,
        actual: u32,
    },
    #[error("modulus {modulus:#x} is reducible: divisible by {factor:#x}")]
    Reducible { modulus: u32, factor: u32 },
    #[error("modulus {modulus:#x} is irreducible but not primitive: x has order {order}")]
    NonPrimitive { modulus: u32, order: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("elements belong to different fields")]
    FieldMismatch,
    #[error("value {value} is not an element of GF(2^{s})")]
    ValueOutOfRange { value: u32, s: u32 },
    #[error("expected {expected} bits, got {actual}")]
    BitLength { expected: usize, actual: usize },
    #[error("GF(2^{base}) is not a subfield of GF(2^{ext})")]
    NotSubfield { base: u32, ext: u32 },
    #[error("exponent {i} outside 0..{n}")]
    ExponentOutOfRange { i: usize, n: usize },
}

/// Degree of a binary polynomial stored as a bit-vector; `None` for zero.
fn bit_degree(p: u32) -> Option<u32> {
    (p != 0).then(|| 31 - p.leading_zeros())
}

/// Remainder of binary polynomial division `a mod b`, `b != 0`.
fn bit_rem(mut a: u32, b: u32) -> u32 {
    let db = bit_degree(b).expect("division by zero polynomial");
    while let Some(da) = bit_degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// Smallest nontrivial factor of `p` of degree ≤ deg(p)/2, found by trial division.
fn find_factor(p: u32) -> Option<u32> {
    let deg = bit_degree(p)?;
    // All polynomials of degree 1..=deg/2 live in [2, 2^(deg/2 + 1)).
    let bound = 1u32 << (deg / 2 + 1);
    (2..bound).find(|&d| bit_rem(p, d) == 0)
}

/// Context for GF(2^s): order, modulus, and the log/antilog tables.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldSpec {
    s: u32,
    modulus: u32,
    // exp has length 2(q-1) so products of two logs never need a reduction.
    exp: Vec<Symbol>,
    log: Vec<u32>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("s", &self.s)
            .field("modulus", &format_args!("{:#x}", self.modulus))
            .finish()
    }
}

/// Builds GF(2^s) with the given modulus, or the documented default when `None`.
pub fn build_field(s: u32, modulus: Option<u32>) -> Result<FieldSpec, FieldError> {
    if !(1..=MAX_DEGREE).contains(&s) {
        return Err(FieldError::DegreeOutOfRange(s));
    }
    let modulus = modulus.unwrap_or(DEFAULT_MODULI[s as usize - 1]);
    let actual = bit_degree(modulus).unwrap_or(0);
    if modulus == 0 || actual != s {
        return Err(FieldError::ModulusDegree {
            modulus,
            expected: s,
            actual,
        });
    }
    if let Some(factor) = find_factor(modulus) {
        return Err(FieldError::Reducible { modulus, factor });
    }

    let q = 1u32 << s;
    let n = q - 1;
    let mut exp = vec![0 as Symbol; 2 * n as usize];
    let mut log = vec![0u32; q as usize];
    let mut x: u32 = 1;
    for i in 0..n {
        if i > 0 && x == 1 {
            return Err(FieldError::NonPrimitive { modulus, order: i });
        }
        exp[i as usize] = x as Symbol;
        log[x as usize] = i;
        x <<= 1;
        if x & q != 0 {
            x ^= modulus;
        }
    }
    if x != 1 {
        // Unreachable for irreducible moduli, kept for table integrity.
        return Err(FieldError::NonPrimitive { modulus, order: 0 });
    }
    for i in n..2 * n {
        exp[i as usize] = exp[(i - n) as usize];
    }
    Ok(FieldSpec { s, modulus, exp, log })
}

impl FieldSpec {
    pub fn new(s: u32) -> Result<Self, FieldError> {
        build_field(s, None)
    }

    /// Shared handle, the form codes hold.
    pub fn shared(s: u32) -> Result<Arc<Self>, FieldError> {
        Self::new(s).map(Arc::new)
    }

    /// Extension degree over GF(2).
    #[inline]
    pub fn degree(&self) -> u32 {
        self.s
    }

    /// Number of elements q = 2^s.
    #[inline]
    pub fn order(&self) -> usize {
        1usize << self.s
    }

    /// Order of the multiplicative group, q − 1.
    #[inline]
    pub fn group_order(&self) -> usize {
        self.order() - 1
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        (v as usize) < self.order()
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: Symbol) -> Result<Symbol, FieldError> {
        if a == 0 {
            return Err(FieldError::ZeroInverse);
        }
        let n = self.group_order() as u32;
        Ok(self.exp[((n - self.log[a as usize]) % n) as usize])
    }

    pub fn div(&self, a: Symbol, b: Symbol) -> Result<Symbol, FieldError> {
        let inv = self.inv(b)?;
        Ok(self.mul(a, inv))
    }

    /// `a^e` for any integer exponent; `0^0 = 1`, `0^e = 0` for e > 0.
    /// Negative powers of zero are a domain error.
    pub fn pow(&self, a: Symbol, e: i64) -> Result<Symbol, FieldError> {
        if a == 0 {
            return match e {
                0 => Ok(1),
                e if e > 0 => Ok(0),
                _ => Err(FieldError::ZeroInverse),
            };
        }
        let n = self.group_order() as i64;
        let l = (self.log[a as usize] as i64 * e.rem_euclid(n)).rem_euclid(n);
        Ok(self.exp[l as usize])
    }

    /// α^e for the primitive element α = x.
    #[inline]
    pub fn alpha_pow(&self, e: i64) -> Symbol {
        let n = self.group_order() as i64;
        self.exp[e.rem_euclid(n) as usize]
    }

    /// Discrete logarithm base α; `None` for zero.
    #[inline]
    pub fn log(&self, a: Symbol) -> Option<u32> {
        (a != 0).then(|| self.log[a as usize])
    }

    /// Antilog table entry α^i, `i < 2(q − 1)`.
    #[inline]
    pub(crate) fn exp_raw(&self, i: usize) -> Symbol {
        self.exp[i]
    }

    /// Wraps a raw value as a checked element of this field.
    pub fn element(&self, value: u32) -> Result<FieldElement<'_>, FieldError> {
        if !self.contains(value) {
            return Err(FieldError::ValueOutOfRange { value, s: self.s });
        }
        Ok(FieldElement {
            field: self,
            value: value as Symbol,
        })
    }

    /// Coordinates of `e` in the polynomial basis, least significant first.
    pub fn basis_expand(&self, e: Symbol) -> Vec<u8> {
        (0..self.s).map(|j| ((e >> j) & 1) as u8).collect()
    }

    /// Inverse of [`basis_expand`](Self::basis_expand).
    pub fn basis_compose(&self, bits: &[u8]) -> Result<Symbol, FieldError> {
        if bits.len() != self.s as usize {
            return Err(FieldError::BitLength {
                expected: self.s as usize,
                actual: bits.len(),
            });
        }
        Ok(bits
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &b)| acc | (((b & 1) as Symbol) << j)))
    }

    /// Whether `base` embeds into this field (s_base divides s).
    pub fn has_subfield(&self, base: &FieldSpec) -> bool {
        self.s.is_multiple_of(base.s)
    }
}

/// An element bound to its field. Arithmetic between different fields fails.
#[derive(Clone, Copy)]
pub struct FieldElement<'f> {
    field: &'f FieldSpec,
    value: Symbol,
}

impl fmt::Debug for FieldElement<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}∈GF(2^{})", self.value, self.field.s)
    }
}

impl PartialEq for FieldElement<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.field == other.field
    }
}

impl<'f> FieldElement<'f> {
    pub fn value(&self) -> Symbol {
        self.value
    }

    pub fn field(&self) -> &'f FieldSpec {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn check(&self, other: &Self) -> Result<(), FieldError> {
        if std::ptr::eq(self.field, other.field) || self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    fn wrap(&self, value: Symbol) -> Self {
        Self {
            field: self.field,
            value,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.check(other)?;
        Ok(self.wrap(self.value ^ other.value))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.check(other)?;
        Ok(self.wrap(self.field.mul(self.value, other.value)))
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        Ok(self.wrap(self.field.inv(self.value)?))
    }

    pub fn pow(&self, e: i64) -> Result<Self, FieldError> {
        Ok(self.wrap(self.field.pow(self.value, e)?))
    }

    pub fn basis_expand(&self) -> Vec<u8> {
        self.field.basis_expand(self.value)
    }
}

/// Polynomial over a field, coefficients lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FieldPoly {
    coeffs: Vec<Symbol>,
}

impl FieldPoly {
    pub fn new(mut coeffs: Vec<Symbol>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1] }
    }

    /// `x − root` (equal to `x + root` in characteristic 2).
    pub fn linear(root: Symbol) -> Self {
        Self::new(vec![root, 1])
    }

    pub fn coeffs(&self) -> &[Symbol] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Symbol {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1)
    }

    pub fn eval(&self, field: &FieldSpec, x: Symbol) -> Symbol {
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| field.mul(acc, x) ^ c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..len).map(|i| self.coeff(i) ^ other.coeff(i)).collect())
    }

    pub fn mul(&self, field: &FieldSpec, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] ^= field.mul(a, b);
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, field: &FieldSpec, c: Symbol) -> Self {
        Self::new(self.coeffs.iter().map(|&a| field.mul(a, c)).collect())
    }

    /// Quotient and remainder; `divisor` must be nonzero.
    pub fn div_rem(&self, field: &FieldSpec, divisor: &Self) -> Result<(Self, Self), FieldError> {
        let dd = divisor.degree().ok_or(FieldError::ZeroInverse)?;
        let lead_inv = field.inv(divisor.coeffs[dd])?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![0; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = rem[i];
            if c == 0 {
                continue;
            }
            let f = field.mul(c, lead_inv);
            quot[i - dd] = f;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[i - dd + j] ^= field.mul(f, d);
            }
        }
        rem.truncate(dd);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Formal derivative. In characteristic 2 the even-degree terms vanish.
    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| if i % 2 == 1 { c } else { 0 })
                .collect(),
        )
    }
}

/// The 2^t-cyclotomic coset of `i` modulo `n`, sorted ascending.
pub fn cyclotomic_coset(i: usize, n: usize, t: u32) -> Vec<usize> {
    let q = 1usize << t;
    let mut coset = vec![i % n];
    let mut j = (i * q) % n;
    while j != i % n {
        coset.push(j);
        j = (j * q) % n;
    }
    coset.sort_unstable();
    coset
}

/// Minimal polynomial over `base` of α^i, α the primitive element of `ext`.
///
/// Computed as ∏ (x − α^j) over the cyclotomic coset of `i`, then mapped into
/// `base`'s representation. For base GF(2) the coefficients are the bits 0/1.
pub fn minimal_polynomial(i: usize, base: &FieldSpec, ext: &FieldSpec) -> Result<FieldPoly, FieldError> {
    if !ext.has_subfield(base) {
        return Err(FieldError::NotSubfield {
            base: base.s,
            ext: ext.s,
        });
    }
    let n = ext.group_order();
    if i >= n {
        return Err(FieldError::ExponentOutOfRange { i, n });
    }
    let mut m = FieldPoly::one();
    for j in cyclotomic_coset(i, n, base.s) {
        m = m.mul(ext, &FieldPoly::linear(ext.alpha_pow(j as i64)));
    }
    let embed = SubfieldMap::new(base, ext)?;
    Ok(FieldPoly::new(
        m.coeffs.iter().map(|&c| embed.to_base(c)).collect(),
    ))
}

/// Isomorphism between `base` and the copy of it inside `ext`.
struct SubfieldMap {
    // ext value -> base value, only meaningful on the subfield.
    to_base: Vec<Symbol>,
}

impl SubfieldMap {
    fn new(base: &FieldSpec, ext: &FieldSpec) -> Result<Self, FieldError> {
        let mut to_base = vec![0; ext.order()];
        if base.s == 1 {
            to_base[1] = 1;
            return Ok(Self { to_base });
        }
        let nb = base.group_order();
        let step = (ext.group_order() / nb) as i64;
        // A root in ext of base's modulus plays the role of base's α.
        let root = (1..nb as i64)
            .map(|j| ext.alpha_pow(j * step))
            .find(|&cand| {
                let mut acc: Symbol = 0;
                for d in (0..=base.s).rev() {
                    acc = ext.mul(acc, cand);
                    if (base.modulus >> d) & 1 == 1 {
                        acc ^= 1;
                    }
                }
                acc == 0
            })
            .ok_or(FieldError::NotSubfield {
                base: base.s,
                ext: ext.s,
            })?;
        let mut x: Symbol = 1;
        for k in 0..nb {
            to_base[x as usize] = base.alpha_pow(k as i64);
            x = ext.mul(x, root);
        }
        Ok(Self { to_base })
    }

    fn to_base(&self, v: Symbol) -> Symbol {
        self.to_base[v as usize]
    }
}

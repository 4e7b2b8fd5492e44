//! Error-locator synthesis and root search shared by the RS and BCH decoders.

use crate::field::{FieldPoly, FieldSpec, Symbol};

/// Berlekamp–Massey: the shortest LFSR connection polynomial Λ(x), Λ(0) = 1,
/// generating `syndromes`. Returns Λ and the register length L.
pub fn berlekamp_massey(field: &FieldSpec, syndromes: &[Symbol]) -> (FieldPoly, usize) {
    let cap = syndromes.len() + 1;
    let mut c: Vec<Symbol> = Vec::with_capacity(cap);
    c.push(1);
    let mut prev: Vec<Symbol> = Vec::with_capacity(cap);
    prev.push(1);
    let mut len = 0usize;
    let mut shift = 1usize;
    let mut prev_disc: Symbol = 1;
    let mut scratch: Vec<Symbol> = Vec::with_capacity(cap);

    for step in 0..syndromes.len() {
        let mut d = syndromes[step];
        for i in 1..=len.min(c.len() - 1) {
            d ^= field.mul(c[i], syndromes[step - i]);
        }
        if d == 0 {
            shift += 1;
            continue;
        }
        let factor = field.div(d, prev_disc).expect("previous discrepancy is nonzero");
        let grow = prev.len() + shift;
        if 2 * len <= step {
            scratch.clear();
            scratch.extend_from_slice(&c);
            if c.len() < grow {
                c.resize(grow, 0);
            }
            for (i, &p) in prev.iter().enumerate() {
                c[i + shift] ^= field.mul(factor, p);
            }
            len = step + 1 - len;
            std::mem::swap(&mut prev, &mut scratch);
            prev_disc = d;
            shift = 1;
        } else {
            if c.len() < grow {
                c.resize(grow, 0);
            }
            for (i, &p) in prev.iter().enumerate() {
                c[i + shift] ^= field.mul(factor, p);
            }
            shift += 1;
        }
    }
    (FieldPoly::new(c), len)
}

/// Chien search over positions 0..n: returns every `i` with Λ(α^(−i)) = 0.
/// Stops early once `deg Λ` roots are found.
pub fn chien_search(field: &FieldSpec, locator: &FieldPoly, n: usize) -> Vec<usize> {
    let order = field.group_order();
    let coeffs = locator.coeffs();
    let Some(deg) = locator.degree() else {
        return Vec::new();
    };
    // (log step α^(−k), current log of Λ_k α^(−ik)) for the nonzero terms.
    let mut terms: Vec<(usize, usize)> = coeffs
        .iter()
        .enumerate()
        .filter_map(|(k, &c)| field.log(c).map(|l| ((order - k % order) % order, l as usize)))
        .collect();
    let mut roots = Vec::with_capacity(deg);
    for i in 0..n {
        let mut acc: Symbol = 0;
        for (step, cur) in terms.iter_mut() {
            acc ^= field.exp_raw(*cur);
            *cur += *step;
            if *cur >= order {
                *cur -= order;
            }
        }
        if acc == 0 {
            roots.push(i);
            if roots.len() == deg {
                break;
            }
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::build_field;

    #[test]
    fn recovers_known_locator() {
        let f = build_field(4, None).unwrap();
        // errors at positions 2 and 7 with values 5 and 1, syndromes S_j = Σ Y X^(j+1)
        let errs = [(2usize, 5u16), (7, 1)];
        let synd: Vec<Symbol> = (1..=6)
            .map(|j| {
                errs.iter().fold(0, |acc, &(p, y)| {
                    acc ^ f.mul(y, f.alpha_pow((p * j) as i64))
                })
            })
            .collect();
        let (lambda, len) = berlekamp_massey(&f, &synd);
        assert_eq!(len, 2);
        let mut roots = chien_search(&f, &lambda, 15);
        roots.sort();
        assert_eq!(roots, vec![2, 7]);
    }

    #[test]
    fn zero_syndromes_give_trivial_locator() {
        let f = build_field(8, None).unwrap();
        let (lambda, len) = berlekamp_massey(&f, &[0; 10]);
        assert_eq!(len, 0);
        assert_eq!(lambda, FieldPoly::one());
        assert!(chien_search(&f, &lambda, 255).is_empty());
    }

    #[test]
    fn locator_generates_the_sequence() {
        let f = build_field(8, None).unwrap();
        let seq: Vec<Symbol> = (0..20u16).map(|i| (i * 37 + 11) % 256).collect();
        let (lambda, len) = berlekamp_massey(&f, &seq);
        let c = lambda.coeffs();
        for n in len..seq.len() {
            let mut acc = seq[n];
            for i in 1..c.len() {
                acc ^= f.mul(c[i], seq[n - i]);
            }
            assert_eq!(acc, 0, "LFSR fails at {n}");
        }
    }
}

//! Dense univariate polynomials over GF(2^ℓ), lowest coefficient first.

use crate::field::{Fe, Field};

pub fn degree(p: &[Fe]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn eval(f: &Field, p: &[Fe], x: Fe) -> Fe {
    p.iter().rev().fold(Fe::ZERO, |acc, &c| f.mul(acc, x) + c)
}

/// Quotient and remainder of `a / b`; `b` must be nonzero.
pub fn divrem(f: &Field, a: &[Fe], b: &[Fe]) -> (Vec<Fe>, Vec<Fe>) {
    let db = degree(b).expect("nonzero divisor");
    let lead_inv = f.inv(b[db]).expect("nonzero leading coefficient");
    let mut rem = a.to_vec();
    let Some(da) = degree(a) else { return (vec![], rem) };
    if da < db {
        return (vec![], rem);
    }
    let mut quot = vec![Fe::ZERO; da - db + 1];
    for i in (db..=da).rev() {
        let c = rem[i];
        if c.is_zero() {
            continue;
        }
        let q = f.mul(c, lead_inv);
        quot[i - db] = q;
        for j in 0..=db {
            let t = f.mul(q, b[j]);
            rem[i - db + j] += t;
        }
    }
    rem.truncate(db);
    (quot, rem)
}

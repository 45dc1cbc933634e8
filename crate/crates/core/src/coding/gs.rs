//! Guruswami–Sudan list decoding: Kötter interpolation with multiplicities,
//! then Roth–Ruckenstein root finding.

use super::RsCode;
use crate::field::{Fe, Field};

/// Bivariate polynomial, indexed `[y-degree][x-degree]`.
type BiPoly = Vec<Vec<Fe>>;

const MAX_MULTIPLICITY: usize = 64;

/// Binomial coefficient mod 2 (Lucas).
#[inline]
fn binom2(n: usize, r: usize) -> bool {
    n & r == r
}

fn monomials_below(d: usize, k1: usize) -> usize {
    (0..=d / k1).map(|j| d - k1 * j + 1).sum()
}

/// Smallest multiplicity whose interpolation problem has a nonzero solution
/// of (1, k−1)-weighted degree below `agree · m`.
fn multiplicity(n: usize, k: usize, agree: usize) -> Option<(usize, usize)> {
    (1..=MAX_MULTIPLICITY).find_map(|m| {
        let d = agree * m - 1;
        (monomials_below(d, k - 1) > n * m * (m + 1) / 2).then_some((m, d))
    })
}

fn trim(p: &mut Vec<Fe>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

/// (weighted degree, y-degree) of the leading monomial.
fn order_key(g: &BiPoly, k1: usize) -> (usize, usize) {
    let mut best = (0, 0);
    let mut any = false;
    for (j, row) in g.iter().enumerate() {
        if let Some(i) = row.iter().rposition(|c| !c.is_zero()) {
            let key = (i + k1 * j, j);
            if !any || key > best {
                best = key;
                any = true;
            }
        }
    }
    best
}

/// Hasse derivative D_{a,b} of `g` evaluated at (x0, y0).
fn hasse(f: &Field, g: &BiPoly, a: usize, b: usize, xp: &[Fe], yp: &[Fe]) -> Fe {
    let mut acc = Fe::ZERO;
    for (j, row) in g.iter().enumerate().skip(b) {
        if !binom2(j, b) {
            continue;
        }
        let mut inner = Fe::ZERO;
        for (i, &c) in row.iter().enumerate().skip(a) {
            if !c.is_zero() && binom2(i, a) {
                inner += f.mul(c, xp[i - a]);
            }
        }
        acc += f.mul(inner, yp[j - b]);
    }
    acc
}

fn powers(f: &Field, x: Fe, len: usize) -> Vec<Fe> {
    let mut out = Vec::with_capacity(len);
    let mut p = Fe::ONE;
    for _ in 0..len {
        out.push(p);
        p = f.mul(p, x);
    }
    out
}

fn interpolate(code: &RsCode, word: &[Fe], m: usize, ymax: usize) -> BiPoly {
    let f = code.field();
    let k1 = code.k() - 1;
    let mut basis: Vec<BiPoly> = (0..=ymax)
        .map(|j| {
            let mut g = vec![Vec::new(); j + 1];
            g[j] = vec![Fe::ONE];
            g
        })
        .collect();
    for (&x0, &y0) in code.points().iter().zip(word) {
        for b in 0..m {
            for a in 0..m - b {
                let xlen = basis.iter().flat_map(|g| g.iter().map(Vec::len)).max().unwrap_or(0) + 1;
                let xp = powers(f, x0, xlen);
                let yp = powers(f, y0, ymax + 1);
                let deltas: Vec<Fe> = basis.iter().map(|g| hasse(f, g, a, b, &xp, &yp)).collect();
                let Some(star) = (0..basis.len())
                    .filter(|&j| !deltas[j].is_zero())
                    .min_by_key(|&j| order_key(&basis[j], k1))
                else {
                    continue;
                };
                let gstar = basis[star].clone();
                let dstar = deltas[star];
                for j in 0..basis.len() {
                    if j == star || deltas[j].is_zero() {
                        continue;
                    }
                    let g = &mut basis[j];
                    if g.len() < gstar.len() {
                        g.resize(gstar.len(), Vec::new());
                    }
                    for row in g.iter_mut() {
                        for c in row.iter_mut() {
                            *c = f.mul(*c, dstar);
                        }
                    }
                    for (row, srow) in g.iter_mut().zip(&gstar) {
                        add_shifted(f, row, srow, deltas[j], 0);
                        trim(row);
                    }
                }
                // G* ← (x − x0)·G*
                for row in basis[star].iter_mut() {
                    if row.is_empty() {
                        continue;
                    }
                    let mut shifted = vec![Fe::ZERO; row.len() + 1];
                    for (i, &c) in row.iter().enumerate() {
                        shifted[i + 1] += c;
                        shifted[i] += f.mul(c, x0);
                    }
                    trim(&mut shifted);
                    *row = shifted;
                }
            }
        }
    }
    basis
        .into_iter()
        .filter(|g| g.iter().any(|r| !r.is_empty()))
        .min_by_key(|g| order_key(g, k1))
        .expect("interpolation module has a nonzero element")
}

fn add_shifted(f: &Field, dst: &mut Vec<Fe>, src: &[Fe], scale: Fe, shift: usize) {
    if dst.len() < src.len() + shift {
        dst.resize(src.len() + shift, Fe::ZERO);
    }
    for (i, &c) in src.iter().enumerate() {
        dst[i + shift] += f.mul(c, scale);
    }
}

/// Q(x, x·y + γ).
fn substitute(f: &Field, q: &BiPoly, gamma: Fe) -> BiPoly {
    let ymax = q.len();
    let gp = powers(f, gamma, ymax + 1);
    let mut out: BiPoly = vec![Vec::new(); ymax];
    for (i, ci) in q.iter().enumerate() {
        if ci.is_empty() {
            continue;
        }
        for (j, slot) in out.iter_mut().enumerate().take(i + 1) {
            if binom2(i, j) {
                add_shifted(f, slot, ci, gp[i - j], j);
            }
        }
    }
    for row in out.iter_mut() {
        trim(row);
    }
    out
}

fn roth_ruckenstein(f: &Field, q: BiPoly, k: usize, prefix: &mut Vec<Fe>, out: &mut Vec<Vec<Fe>>) {
    let shift = q
        .iter()
        .filter_map(|r| r.iter().position(|c| !c.is_zero()))
        .min();
    let Some(shift) = shift else {
        // Q ≡ 0: every continuation is a root; leave completion to the caller's brute force
        return;
    };
    let q: BiPoly = q.into_iter().map(|r| if r.len() > shift { r[shift..].to_vec() } else { Vec::new() }).collect();
    let h: Vec<Fe> = q.iter().map(|r| r.first().copied().unwrap_or(Fe::ZERO)).collect();
    for gamma in f.elements() {
        if !super::poly::eval(f, &h, gamma).is_zero() {
            continue;
        }
        prefix.push(gamma);
        if prefix.len() == k {
            out.push(prefix.clone());
        } else {
            roth_ruckenstein(f, substitute(f, &q, gamma), k, prefix, out);
        }
        prefix.pop();
    }
}

/// Candidate messages; the caller filters them by actual distance.
pub(super) fn candidates(code: &RsCode, word: &[Fe], radius: usize) -> Vec<Vec<Fe>> {
    let (n, k) = (code.n(), code.k());
    let agree = n - radius;
    let Some((m, d)) = multiplicity(n, k, agree) else {
        return Vec::new();
    };
    let ymax = d / (k - 1);
    let q = interpolate(code, word, m, ymax);
    let mut out = Vec::new();
    roth_ruckenstein(code.field(), q, k, &mut Vec::with_capacity(k), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicities_for_presets() {
        assert_eq!(multiplicity(16, 3, 7).map(|p| p.0), Some(2));
        assert_eq!(multiplicity(32, 6, 14).map(|p| p.0), Some(3));
        assert_eq!(monomials_below(41, 5), 198);
    }

    #[test]
    fn substitution_matches_evaluation() {
        let f = Field::with_ell(4).unwrap();
        let q: BiPoly = vec![vec![Fe(3), Fe(1)], vec![Fe(0), Fe(7), Fe(2)], vec![Fe(5)]];
        let gamma = Fe(9);
        let s = substitute(&f, &q, gamma);
        let ev = |p: &BiPoly, x: Fe, y: Fe| {
            p.iter().enumerate().fold(Fe::ZERO, |acc, (j, r)| {
                acc + f.mul(super::super::poly::eval(&f, r, x), f.pow(y, j as u64))
            })
        };
        for x in f.elements() {
            for y in f.elements() {
                assert_eq!(ev(&s, x, y), ev(&q, x, f.mul(x, y) + gamma));
            }
        }
    }
}

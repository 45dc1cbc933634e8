use super::{BitVec, Fe, Field, FieldError};

/// Incremental Gaussian elimination over GF(2).
///
/// Each stored row's pivot is its lowest set bit, so reducing a new row by
/// existing pivots only ever touches higher columns.
#[derive(Debug, Clone)]
pub struct Gf2System {
    n_vars: usize,
    rows: Vec<(BitVec, bool)>,
    pivot_row: Vec<Option<usize>>,
}

fn lowest_set_from(v: &BitVec, from: usize) -> Option<usize> {
    let words = v.words();
    let mut w = from / 64;
    if w >= words.len() {
        return None;
    }
    let mut cur = words[w] & (u64::MAX << (from % 64));
    loop {
        if cur != 0 {
            return Some(w * 64 + cur.trailing_zeros() as usize);
        }
        w += 1;
        if w == words.len() {
            return None;
        }
        cur = words[w];
    }
}

impl Gf2System {
    pub fn new(n_vars: usize) -> Self {
        Self { n_vars, rows: Vec::new(), pivot_row: vec![None; n_vars] }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Add `⟨row, x⟩ = rhs`. Returns whether the equation raised the rank.
    pub fn add_equation(&mut self, mut row: BitVec, mut rhs: bool) -> Result<bool, FieldError> {
        if row.len() != self.n_vars {
            return Err(FieldError::LengthMismatch(row.len(), self.n_vars));
        }
        let mut from = 0;
        while let Some(c) = lowest_set_from(&row, from) {
            match self.pivot_row[c] {
                Some(r) => {
                    let (pr, prhs) = &self.rows[r];
                    row.xor_assign(pr);
                    rhs ^= prhs;
                    from = c + 1;
                }
                None => {
                    self.pivot_row[c] = Some(self.rows.len());
                    self.rows.push((row, rhs));
                    return Ok(true);
                }
            }
        }
        if rhs {
            Err(FieldError::Inconsistent)
        } else {
            Ok(false)
        }
    }

    /// Whether `⟨c, x⟩` takes the same value on every solution.
    pub fn determines(&self, c: &BitVec) -> bool {
        let mut row = c.clone();
        let mut from = 0;
        while let Some(col) = lowest_set_from(&row, from) {
            match self.pivot_row[col] {
                Some(r) => row.xor_assign(&self.rows[r].0),
                None => return false,
            }
            from = col + 1;
        }
        true
    }

    /// A solution with every free variable set to zero.
    pub fn solution(&self) -> BitVec {
        let mut x = BitVec::zeros(self.n_vars);
        for p in (0..self.n_vars).rev() {
            if let Some(r) = self.pivot_row[p] {
                let (row, rhs) = &self.rows[r];
                let v = rhs ^ row.inner(&x).expect("lengths agree");
                x.set(p, v);
            }
        }
        x
    }
}

/// Solve the dense system `a · x = b` over GF(2^ℓ); free variables are zero.
pub fn solve_dense(field: &Field, a: &[Vec<Fe>], b: &[Fe]) -> Option<Vec<Fe>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Fe>> = a
        .iter()
        .zip(b)
        .map(|(r, &y)| {
            let mut r = r.clone();
            r.push(y);
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = field.inv(m[r][c]).expect("nonzero pivot");
        for v in m[r].iter_mut() {
            *v = field.mul(*v, inv);
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c];
                for j in c..=cols {
                    let t = field.mul(f, m[r][j]);
                    m[i][j] += t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Fe::ZERO; cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols];
    }
    Some(x)
}

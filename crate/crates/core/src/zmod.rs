//! Linear algebra over `Z/p^M`: Howell normal form, membership, left solving
//! and Smith invariants.
//!
//! `Z/p^M` is a chain ring, so an entry of minimal valuation in a column
//! divides every other entry of that column. That makes the echelon
//! construction below very short; the only subtlety is feeding back the
//! annihilator multiple `p^{M-v}·row` of each pivot row, which is what turns
//! an echelon form into a Howell form.

#[inline]
pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    if m <= 1 << 32 {
        (a * b) % m
    } else {
        ((a as u128 * b as u128) % m as u128) as u64
    }
}

#[inline]
pub fn addmod(a: u64, b: u64, m: u64) -> u64 {
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

#[inline]
pub fn submod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + m - b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimePowerModulus {
    p: u64,
    exp: u32,
    modulus: u64,
}

impl PrimePowerModulus {
    pub fn new(p: u64, exp: u32) -> Self {
        PrimePowerModulus { p, exp, modulus: p.pow(exp) }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn reduce_i64(&self, a: i64) -> u64 {
        a.rem_euclid(self.modulus as i64) as u64
    }

    /// `p`-adic valuation, `exp` for zero.
    pub fn valuation(&self, a: u64) -> u32 {
        let mut a = a % self.modulus;
        if a == 0 {
            return self.exp;
        }
        let mut v = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        v
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mulmod(a, b, self.modulus)
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        addmod(a, b, self.modulus)
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        submod(a, b, self.modulus)
    }

    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    pub fn pow_p(&self, k: u32) -> u64 {
        if k >= self.exp {
            0
        } else {
            self.p.pow(k)
        }
    }

    /// Inverse of a unit. Panics on non-units; callers check valuations first.
    pub fn unit_inv(&self, a: u64) -> u64 {
        let (mut t, mut new_t) = (0i128, 1i128);
        let (mut r, mut new_r) = (self.modulus as i128, (a % self.modulus) as i128);
        while new_r != 0 {
            let q = r / new_r;
            (t, new_t) = (new_t, t - q * new_t);
            (r, new_r) = (new_r, r - q * new_r);
        }
        assert!(r == 1, "{a} is not a unit mod {}", self.modulus);
        t.rem_euclid(self.modulus as i128) as u64
    }

    /// `a / p^v` for `a` of valuation at least `v`, as a residue mod `p^M`.
    fn shift_down(&self, a: u64, v: u32) -> u64 {
        a / self.p.pow(v)
    }
}

/// `row += c * other` over `Z/m`, starting at column `from`.
fn axpy(row: &mut [u64], c: u64, other: &[u64], from: usize, m: u64) {
    if c == 0 {
        return;
    }
    for (x, &y) in row[from..].iter_mut().zip(&other[from..]) {
        if y != 0 {
            *x = addmod(*x, mulmod(c, y, m), m);
        }
    }
}

/// `{"p", "exp", "ncols", "rows", "pivots": [{"col", "val"}]}`; the pivot
/// entry of a row is `p^val`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct HowellJson {
    pub p: u64,
    pub exp: u32,
    pub ncols: usize,
    pub rows: Vec<Vec<u64>>,
    pub pivots: Vec<PivotJson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct PivotJson {
    pub col: usize,
    pub val: u32,
}

/// Canonical generating set of a row span in `(Z/p^M)^n`.
///
/// Two spans are equal exactly when their Howell forms compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HowellForm {
    m: PrimePowerModulus,
    ncols: usize,
    rows: Vec<Vec<u64>>,
    /// `(column, valuation)` of each row's pivot; the pivot entry is `p^valuation`.
    pivots: Vec<(usize, u32)>,
}

impl HowellForm {
    pub fn new<I>(m: PrimePowerModulus, ncols: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = Vec<u64>>,
    {
        let md = m.modulus();
        let mut work: Vec<Vec<u64>> = rows
            .into_iter()
            .map(|mut r| {
                assert_eq!(r.len(), ncols, "row length does not match column count");
                for x in r.iter_mut() {
                    *x %= md;
                }
                r
            })
            .filter(|r| r.iter().any(|&x| x != 0))
            .collect();
        let mut rows = Vec::new();
        let mut pivots = Vec::new();
        for col in 0..ncols {
            // every remaining work row vanishes before `col`
            let best = work
                .iter()
                .enumerate()
                .filter(|(_, r)| r[col] != 0)
                .min_by_key(|(_, r)| m.valuation(r[col]))
                .map(|(i, _)| i);
            let Some(bi) = best else { continue };
            let mut piv = work.swap_remove(bi);
            let v = m.valuation(piv[col]);
            let unit = m.shift_down(piv[col], v);
            let uinv = m.unit_inv(unit);
            if uinv != 1 {
                for x in piv[col..].iter_mut() {
                    *x = mulmod(*x, uinv, md);
                }
            }
            debug_assert_eq!(piv[col], m.pow_p(v));
            for w in work.iter_mut() {
                if w[col] != 0 {
                    let q = m.shift_down(w[col], v);
                    axpy(w, md - q, &piv, col, md);
                    debug_assert_eq!(w[col], 0);
                }
            }
            if v > 0 {
                let scale = m.pow_p(m.exp() - v);
                let ann: Vec<u64> = piv.iter().map(|&x| mulmod(x, scale, md)).collect();
                if ann.iter().any(|&x| x != 0) {
                    work.push(ann);
                }
            }
            work.retain(|r| r.iter().any(|&x| x != 0));
            rows.push(piv);
            pivots.push((col, v));
        }
        debug_assert!(work.is_empty());
        // reduce entries above each pivot into [0, p^v)
        for i in 0..rows.len() {
            let (col, v) = pivots[i];
            let pv = m.pow_p(v);
            let (above, rest) = rows.split_at_mut(i);
            let pr = &rest[0];
            for r in above.iter_mut() {
                let q = r[col] / pv;
                if q != 0 {
                    axpy(r, md - q % md, pr, col, md);
                }
            }
        }
        HowellForm { m, ncols, rows, pivots }
    }

    pub fn empty(m: PrimePowerModulus, ncols: usize) -> Self {
        HowellForm { m, ncols, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn modulus(&self) -> PrimePowerModulus {
        self.m
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[(usize, u32)] {
        &self.pivots
    }

    pub fn to_json(&self) -> HowellJson {
        HowellJson {
            p: self.m.p(),
            exp: self.m.exp(),
            ncols: self.ncols,
            rows: self.rows.clone(),
            pivots: self.pivots.iter().map(|&(col, val)| PivotJson { col, val }).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// Span is the whole of `(Z/p^M)^n`.
    pub fn is_full(&self) -> bool {
        self.pivots.len() == self.ncols && self.pivots.iter().all(|&(_, v)| v == 0)
    }

    /// `log_p` of the number of elements of the span.
    pub fn log_size(&self) -> u32 {
        self.pivots.iter().map(|&(_, v)| self.m.exp() - v).sum()
    }

    /// Canonical representative of `v` modulo the span.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let md = self.m.modulus();
        let mut v: Vec<u64> = v.iter().map(|&x| x % md).collect();
        for (row, &(col, val)) in self.rows.iter().zip(&self.pivots) {
            let q = v[col] / self.m.pow_p(val);
            if q != 0 {
                axpy(&mut v, md - q, row, col, md);
            }
        }
        v
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    pub fn contains_span(&self, other: &HowellForm) -> bool {
        other.rows.iter().all(|r| self.contains(r))
    }

    /// Span of the union of both generating sets.
    pub fn sum(&self, other: &HowellForm) -> HowellForm {
        HowellForm::new(self.m, self.ncols, self.rows.iter().chain(&other.rows).cloned())
    }
}

/// Result of solving `x · A = b` for a row vector `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeftSolve {
    /// Canonical particular solution (reduced modulo the kernel), if any.
    pub solution: Option<Vec<u64>>,
    /// Howell form of `{ y : y · A = 0 }`.
    pub kernel: HowellForm,
}

/// Left kernel of `rows` (a list of `nrows` vectors of length `ncols`).
pub fn left_kernel(m: PrimePowerModulus, rows: &[Vec<u64>], ncols: usize) -> HowellForm {
    solve_left(m, rows, ncols, None).kernel
}

/// Solve `Σ x_i rows[i] = b`; with `b = None` only the kernel is computed.
pub fn solve_left(m: PrimePowerModulus, rows: &[Vec<u64>], ncols: usize, b: Option<&[u64]>) -> LeftSolve {
    let r = rows.len();
    let aug = rows.iter().enumerate().map(|(i, row)| {
        let mut v = Vec::with_capacity(ncols + r);
        v.extend_from_slice(row);
        v.resize(ncols + r, 0);
        v[ncols + i] = 1;
        v
    });
    let h = HowellForm::new(m, ncols + r, aug);
    let kernel = HowellForm::new(
        m,
        r,
        h.rows
            .iter()
            .zip(&h.pivots)
            .filter(|(_, &(c, _))| c >= ncols)
            .map(|(row, _)| row[ncols..].to_vec()),
    );
    let solution = b.and_then(|b| {
        let mut v = b.to_vec();
        v.resize(ncols + r, 0);
        let red = h.reduce(&v);
        if red[..ncols].iter().any(|&x| x != 0) {
            return None;
        }
        let x: Vec<u64> = red[ncols..].iter().map(|&t| m.neg(t)).collect();
        Some(kernel.reduce(&x))
    });
    LeftSolve { solution, kernel }
}

/// Valuations of the nonzero Smith diagonal entries, ascending.
pub fn smith_valuations(m: PrimePowerModulus, rows: &[Vec<u64>], ncols: usize) -> Vec<u32> {
    let md = m.modulus();
    let mut a: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|&x| x % md).collect()).collect();
    let mut out = Vec::new();
    let mut live_cols: Vec<usize> = (0..ncols).collect();
    loop {
        let mut best: Option<(usize, usize, u32)> = None;
        for (i, row) in a.iter().enumerate() {
            for &j in &live_cols {
                if row[j] != 0 {
                    let v = m.valuation(row[j]);
                    if best.is_none_or(|(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                    }
                }
            }
        }
        let Some((pi, pj, v)) = best else { break };
        let piv_row = a.swap_remove(pi);
        let unit_inv = m.unit_inv(m.shift_down(piv_row[pj], v));
        for row in a.iter_mut() {
            if row[pj] != 0 {
                let q = mulmod(m.shift_down(row[pj], v), unit_inv, md);
                for &j in &live_cols {
                    row[j] = submod(row[j], mulmod(q, piv_row[j], md), md);
                }
            }
        }
        // column operations are implicit: once the pivot row is removed the
        // remaining rows no longer touch column pj
        live_cols.retain(|&j| j != pj);
        out.push(v);
    }
    out.sort_unstable();
    out
}

/// Exponents `e` of the cyclic factors `Z/p^e` of `(Z/p^M)^n / span(rows)`,
/// ascending, trivial factors dropped.
pub fn quotient_invariants(m: PrimePowerModulus, rows: &[Vec<u64>], ncols: usize) -> Vec<u32> {
    let vals = smith_valuations(m, rows, ncols);
    let free = ncols - vals.len();
    let mut out: Vec<u32> = vals.into_iter().filter(|&v| v > 0).collect();
    out.extend(std::iter::repeat_n(m.exp(), free));
    out.sort_unstable();
    out
}

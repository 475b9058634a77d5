//! Exact dense linear algebra over the rationals: fraction-free rank,
//! modular rank oracles, and rational kernel/solve for small systems.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::rational::Rational;

/// Rank by fraction-free (Bareiss) elimination over the integers.
pub fn rank_bareiss(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0usize;
    let mut prev = BigInt::one();
    let mut row = 0usize;
    for col in 0..cols {
        // pivot search
        let pivot = (row..rows).find(|&r| !m[r][col].is_zero());
        let pr = match pivot {
            Some(pr) => pr,
            None => continue,
        };
        m.swap(row, pr);
        // one-directional Bareiss step: the division by the previous pivot
        // is exact for rows below the pivot row
        for r in (row + 1)..rows {
            for c in 0..cols {
                if c == col {
                    continue;
                }
                let val = (&m[row][col] * &m[r][c] - &m[r][col] * &m[row][c]) / &prev;
                m[r][c] = val;
            }
            m[r][col] = BigInt::zero();
        }
        prev = m[row][col].clone();
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // Fermat: p prime
    mod_pow(a, p - 2, p)
}

fn mod_pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut b: u128 = base as u128 % p as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % p as u128;
        }
        b = b * b % p as u128;
        exp >>= 1;
    }
    base = acc as u64;
    base
}

fn bigint_mod(v: &BigInt, p: u64) -> u64 {
    let m = BigInt::from(p);
    let r = v.mod_floor(&m);
    let (_, digits) = r.to_u64_digits();
    digits.first().copied().unwrap_or(0)
}

/// Rank over Z/p by standard Gaussian elimination.
pub fn rank_mod(m: &[Vec<BigInt>], p: u64) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut a: Vec<Vec<u64>> = m
        .iter()
        .map(|row| row.iter().map(|v| bigint_mod(v, p)).collect())
        .collect();
    let mut rank = 0usize;
    let mut row = 0usize;
    for col in 0..cols {
        let pivot = (row..rows).find(|&r| a[r][col] != 0);
        let pr = match pivot {
            Some(pr) => pr,
            None => continue,
        };
        a.swap(row, pr);
        let inv = mod_inv(a[row][col], p) as u128;
        for c in col..cols {
            a[row][c] = (a[row][c] as u128 * inv % p as u128) as u64;
        }
        for r in 0..rows {
            if r != row && a[r][col] != 0 {
                let f = a[r][col] as u128;
                for c in col..cols {
                    let sub = f * a[row][c] as u128 % p as u128;
                    a[r][c] = ((a[r][c] as u128 + p as u128 - sub) % p as u128) as u64;
                }
            }
        }
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

/// Clears denominators row by row; rank is unchanged.
pub fn to_integer_rows(m: &[Vec<Rational>]) -> Vec<Vec<BigInt>> {
    m.iter()
        .map(|row| {
            let mut l = BigInt::one();
            for v in row {
                l = l.lcm(v.denom());
            }
            row.iter()
                .map(|v| v.numer() * (&l / v.denom()))
                .collect()
        })
        .collect()
}

/// Reduced row echelon form over Q; returns (matrix, pivot columns).
fn rref(mut a: Vec<Vec<Rational>>) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut row = 0usize;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let pr = match (row..rows).find(|&r| !a[r][col].is_zero()) {
            Some(pr) => pr,
            None => continue,
        };
        a.swap(row, pr);
        let inv = a[row][col].clone().recip();
        for c in col..cols {
            a[row][c] = &a[row][c] * &inv;
        }
        for r in 0..rows {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..cols {
                    let v = &a[r][c] - &f * &a[row][c];
                    a[r][c] = v;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

/// Basis of the null space of `m` (vectors indexed by columns).
pub fn rational_kernel(m: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    if m.is_empty() {
        // whole space
        return (0..cols)
            .map(|i| {
                let mut v = vec![Rational::zero(); cols];
                v[i] = Rational::one();
                v
            })
            .collect();
    }
    let (r, pivots) = rref(m.to_vec());
    let mut basis = Vec::new();
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    for &fc in &free {
        let mut v = vec![Rational::zero(); cols];
        v[fc] = Rational::one();
        for (prow, &pc) in pivots.iter().enumerate() {
            v[pc] = -r[prow][fc].clone();
        }
        basis.push(v);
    }
    basis
}

/// Solves `a x = b` over Q; `None` when inconsistent.
pub fn rational_solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    if rows == 0 {
        return if b.iter().all(|v| v.is_zero()) { Some(vec![]) } else { None };
    }
    let (r, pivots) = {
        let (rr, p) = rref(std::mem::take(&mut aug));
        (rr, p)
    };
    // inconsistent when a pivot lands in the augmented column
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (prow, &pc) in pivots.iter().enumerate() {
        x[pc] = r[prow][cols].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn bareiss_and_modular_agree() {
        let m = vec![
            vec![bi(2), bi(4), bi(6)],
            vec![bi(1), bi(2), bi(3)],
            vec![bi(0), bi(1), bi(-1)],
        ];
        assert_eq!(rank_bareiss(m.clone()), 2);
        assert_eq!(rank_mod(&m, 2_147_483_647), 2);
        assert_eq!(rank_mod(&m, 2_147_483_629), 2);
    }

    #[test]
    fn kernel_and_solve() {
        let m = vec![vec![rat(1), rat(2), rat(3)], vec![rat(2), rat(4), rat(6)]];
        let k = rational_kernel(&m, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            let dot: Rational = (0..3).map(|i| &m[0][i] * &v[i]).sum();
            assert!(dot == rat(0));
        }
        let a = vec![vec![rat(1), rat(1)], vec![rat(1), rat(-1)]];
        let x = rational_solve(&a, &[rat(3), rat(1)]).unwrap();
        assert_eq!(x, vec![rat(2), rat(1)]);
        assert!(rational_solve(&m, &[rat(1), rat(3)]).is_none());
    }
}

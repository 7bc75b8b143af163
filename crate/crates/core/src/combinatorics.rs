//! Exact binomial coefficients (additive Pascal rows in u128).

use alloc::vec::Vec;

/// Largest `n` whose full row fits u128 (C(120, 60) < 2^117).
pub(crate) const MAX_BINOMIAL_N: u32 = 120;

/// Row `n` of Pascal's triangle, exact. Panics beyond [`MAX_BINOMIAL_N`];
/// callers validate first.
pub(crate) fn binomial_row(n: u32) -> Vec<u128> {
    assert!(n <= MAX_BINOMIAL_N, "binomial row {n} exceeds u128");
    let mut row = alloc::vec![1u128];
    for _ in 0..n {
        let mut next = alloc::vec![1u128; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row
}

/// Rows `0..=n` at once, for per-step coefficient lookups.
pub(crate) fn pascal_triangle(n: u32) -> Vec<Vec<u128>> {
    assert!(n <= MAX_BINOMIAL_N, "pascal triangle {n} exceeds u128");
    let mut rows = Vec::with_capacity(n as usize + 1);
    rows.push(alloc::vec![1u128]);
    for m in 1..=n as usize {
        let prev = &rows[m - 1];
        let mut row = alloc::vec![1u128; m + 1];
        for i in 1..m {
            row[i] = prev[i - 1] + prev[i];
        }
        rows.push(row);
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let r = binomial_row(10);
        assert_eq!(r[3], 120);
        assert_eq!(r[5], 252);
        let r = binomial_row(100);
        assert_eq!(r[50], 100891344545564193334812497256u128);
        let t = pascal_triangle(6);
        assert_eq!(t[6], alloc::vec![1, 6, 15, 20, 15, 6, 1]);
    }
}

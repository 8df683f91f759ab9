//! Index arithmetic for row-major packed triangles.

/// Position of the unordered pair `i < j` in the strictly upper triangle of an
/// `n × n` matrix, enumerated lexicographically by `(i, j)`.
#[inline]
pub fn strict_index(i: usize, j: usize, n: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Position of `i <= j` in the upper triangle including the diagonal.
#[inline]
pub fn upper_index(i: usize, j: usize, n: usize) -> usize {
    debug_assert!(i <= j && j < n);
    i * (2 * n - i + 1) / 2 + (j - i)
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// All unordered pairs `(i, j)` with `i < j`, in lexicographic order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

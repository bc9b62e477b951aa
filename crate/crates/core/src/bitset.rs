/// Fixed-width rows of bits, one row per candidate point.
#[derive(Debug, Clone)]
pub(crate) struct BitRows {
    words: usize,
    bits: Vec<u64>,
}

impl BitRows {
    pub(crate) fn new(rows: usize, width: usize) -> Self {
        let words = width.div_ceil(64).max(1);
        Self {
            words,
            bits: vec![0; rows * words],
        }
    }

    pub(crate) fn set(&mut self, row: usize, col: usize) {
        self.bits[row * self.words + col / 64] |= 1 << (col % 64);
    }

    pub(crate) fn row(&self, row: usize) -> &[u64] {
        &self.bits[row * self.words..(row + 1) * self.words]
    }

    /// Whether rows `a` and `b` share a set bit.
    pub(crate) fn intersects(&self, a: usize, b: usize) -> bool {
        self.row(a).iter().zip(self.row(b)).any(|(x, y)| x & y != 0)
    }
}

#[cfg(test)]
mod tests {
    use super::BitRows;

    #[test]
    fn intersection_across_words() {
        let mut rows = BitRows::new(3, 130);
        rows.set(0, 129);
        rows.set(1, 129);
        rows.set(2, 5);
        assert!(rows.intersects(0, 1));
        assert!(!rows.intersects(0, 2));
    }
}

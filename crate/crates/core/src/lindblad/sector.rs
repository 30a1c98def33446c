/// A set of matrix elements `|i><j|` used as the basis of a (possibly
/// restricted) vectorized density matrix.
///
/// States are grouped by an integer charge; the sector keeps the pairs whose
/// charges agree. Within a charge block, pairs are ordered row-major over the
/// block's states, so the single-block case with every state in natural
/// order reproduces the full row-major vectorization.
#[derive(Clone, Debug)]
pub struct Sector {
    dim: usize,
    basis: Vec<(usize, usize)>,
    charge_of: Vec<usize>,
    rank_in_block: Vec<usize>,
    block_offset: Vec<usize>,
    block_size: Vec<usize>,
}

impl Sector {
    /// All `d²` matrix elements in row-major order.
    pub fn full(dim: usize) -> Self {
        Self::by_charge(&vec![0; dim])
    }

    pub fn by_charge(charges: &[usize]) -> Self {
        let dim = charges.len();
        let n_blocks = charges.iter().copied().max().map_or(0, |m| m + 1);
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_blocks];
        let mut rank_in_block = vec![0; dim];
        for (i, &q) in charges.iter().enumerate() {
            rank_in_block[i] = members[q].len();
            members[q].push(i);
        }
        let mut block_offset = Vec::with_capacity(n_blocks);
        let mut block_size = Vec::with_capacity(n_blocks);
        let mut basis = Vec::new();
        for block in &members {
            block_offset.push(basis.len());
            block_size.push(block.len());
            for &i in block {
                for &j in block {
                    basis.push((i, j));
                }
            }
        }
        Self {
            dim,
            basis,
            charge_of: charges.to_vec(),
            rank_in_block,
            block_offset,
            block_size,
        }
    }

    /// Hilbert-space dimension the sector lives in.
    pub fn hilbert_dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[(usize, usize)] {
        &self.basis
    }

    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let q = self.charge_of[i];
        if self.charge_of[j] != q {
            return None;
        }
        Some(self.block_offset[q] + self.rank_in_block[i] * self.block_size[q] + self.rank_in_block[j])
    }

    /// Position of every diagonal element `|i><i|`.
    pub fn diagonal_positions(&self) -> Vec<usize> {
        (0..self.dim)
            .map(|i| self.position(i, i).expect("diagonal always in sector"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_sector_is_row_major() {
        let s = Sector::full(3);
        assert_eq!(s.len(), 9);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(s.position(i, j), Some(i * 3 + j));
            }
        }
    }

    #[test]
    fn charge_blocks() {
        let s = Sector::by_charge(&[0, 1, 1, 2]);
        assert_eq!(s.len(), 1 + 4 + 1);
        assert_eq!(s.position(0, 1), None);
        for (p, &(i, j)) in s.basis().iter().enumerate() {
            assert_eq!(s.position(i, j), Some(p));
        }
    }
}

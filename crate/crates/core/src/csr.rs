/// Compressed rows: `offsets[i]..offsets[i + 1]` indexes the values of row `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Csr<T> {
    offsets: Vec<usize>,
    values: Vec<T>,
}

impl<T> Default for Csr<T> {
    fn default() -> Self {
        Csr {
            offsets: vec![0],
            values: Vec::new(),
        }
    }
}

impl<T> Csr<T> {
    pub fn from_rows<I, R>(rows: I) -> Self
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = T>,
    {
        let mut csr = Csr::default();
        for row in rows {
            csr.values.extend(row);
            csr.offsets.push(csr.values.len());
        }
        csr
    }

    /// Groups `(row, value)` pairs; rows beyond the largest key come out empty.
    pub fn from_pairs(rows: usize, mut pairs: Vec<(usize, T)>) -> Self
    where
        T: Ord,
    {
        pairs.sort_unstable();
        let mut offsets = vec![0usize; rows + 1];
        for (row, _) in &pairs {
            offsets[row + 1] += 1;
        }
        for i in 0..rows {
            offsets[i + 1] += offsets[i];
        }
        Csr {
            offsets,
            values: pairs.into_iter().map(|(_, v)| v).collect(),
        }
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub(crate) fn from_parts(offsets: Vec<usize>, values: Vec<T>) -> Option<Self> {
        let well_formed = offsets.first() == Some(&0)
            && offsets.windows(2).all(|w| w[0] <= w[1])
            && offsets.last() == Some(&values.len());
        well_formed.then_some(Csr { offsets, values })
    }
}

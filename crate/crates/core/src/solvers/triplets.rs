use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Anchor `i` is strictly closer to `positive` than to `negative`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triplet {
    pub anchor: usize,
    pub positive: usize,
    pub negative: usize,
}

/// Uniform sampler over strictly ordered triplets of a distance matrix.
pub struct TripletSampler<'a, T> {
    dm: &'a DistanceMatrix<T>,
    rng: ChaCha8Rng,
}

impl<'a, T: Scalar> TripletSampler<'a, T> {
    pub fn new(dm: &'a DistanceMatrix<T>, seed: u64) -> Result<Self> {
        let n = dm.len();
        let exists = (0..n).any(|i| {
            let mut others = (0..n).filter(|&j| j != i).map(|j| dm.get(i, j));
            match others.next() {
                Some(first) => others.any(|d| d != first),
                None => false,
            }
        });
        if !exists {
            return Err(Error::NoValidTriplet);
        }
        Ok(Self { dm, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    /// Draws ordered `(i, j, k)` uniformly, rejects ties and orients the pair so
    /// that `D(i, j) < D(i, k)`; the result is uniform over valid triplets.
    pub fn sample(&mut self) -> Triplet {
        let n = self.dm.len();
        loop {
            let i = self.rng.random_range(0..n);
            let mut j = self.rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let mut k = self.rng.random_range(0..n - 2);
            let (lo, hi) = if i < j { (i, j) } else { (j, i) };
            if k >= lo {
                k += 1;
            }
            if k >= hi {
                k += 1;
            }
            let (dj, dk) = (self.dm.get(i, j), self.dm.get(i, k));
            if dj < dk {
                return Triplet { anchor: i, positive: j, negative: k };
            } else if dk < dj {
                return Triplet { anchor: i, positive: k, negative: j };
            }
        }
    }
}

pub fn generate_triplets<T: Scalar>(dm: &DistanceMatrix<T>, count: usize, seed: u64) -> Result<Vec<Triplet>> {
    let mut sampler = TripletSampler::new(dm, seed)?;
    Ok((0..count).map(|_| sampler.sample()).collect())
}

//! Execution policy for the data-parallel loops.
//!
//! All parallel paths collect per-index results into a `Vec` in index order,
//! and every floating-point reduction is done afterwards in ascending index
//! order. Partial sums are taken over fixed-size chunks, so the grouping of
//! additions never depends on how many workers rayon happens to use.

/// Chunk length used for chunked reductions.
pub const REDUCTION_CHUNK: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Falls back to sequential execution without the `parallel` feature.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// `(0..len).map(f).collect()`, possibly in parallel; output order is
    /// always the index order.
    pub fn map<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
            _ => (0..len).map(f).collect(),
        }
    }

    /// Reduce `(0..len)` by summing `f` over fixed chunks of
    /// [`REDUCTION_CHUNK`] indices; chunk partials are combined left to right
    /// with `add`.
    pub fn chunked_sum<T, F, A>(self, len: usize, zero: T, f: F, add: A) -> T
    where
        T: Send + Clone + Sync,
        F: Fn(usize, &mut T) + Sync + Send,
        A: Fn(&mut T, &T),
    {
        let chunks = len.div_ceil(REDUCTION_CHUNK);
        let partials = self.map(chunks, |c| {
            let mut acc = zero.clone();
            let lo = c * REDUCTION_CHUNK;
            let hi = (lo + REDUCTION_CHUNK).min(len);
            for i in lo..hi {
                f(i, &mut acc);
            }
            acc
        });
        let mut total = zero;
        for p in &partials {
            add(&mut total, p);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree_bitwise() {
        let f = |i: usize| (i as f64 * 0.37).sin() / (1.0 + i as f64);
        let run = |e: Exec| e.chunked_sum(10_000, 0.0f64, |i, acc| *acc += f(i), |a, b| *a += *b);
        assert_eq!(run(Exec::Sequential).to_bits(), run(Exec::Parallel).to_bits());
        assert_eq!(Exec::Sequential.map(17, f), Exec::Parallel.map(17, f));
    }

    #[test]
    fn empty_range() {
        let s = Exec::Parallel.chunked_sum(0, 1.5f64, |_, _| unreachable!(), |a, b| *a += *b);
        assert_eq!(s, 1.5);
    }
}

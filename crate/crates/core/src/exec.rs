//! Execution policy for trial loops and exhaustive searches.
//!
//! Every parallel path reduces with an order-independent combiner, so the
//! sequential and parallel backends return identical results for the same
//! inputs. Without the `parallel` feature, [`Exec::Parallel`] runs sequentially.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Map every index in `range` and fold the results with `combine`.
    ///
    /// `combine` must be associative and commutative with `identity` as unit.
    pub fn map_reduce<T, M, C, I>(self, range: Range<u64>, identity: I, map: M, combine: C) -> T
    where
        T: Send,
        M: Fn(u64) -> T + Sync + Send,
        C: Fn(T, T) -> T + Sync + Send,
        I: Fn() -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return range.into_par_iter().map(map).reduce(&identity, &combine);
        }
        let mut acc = identity();
        for i in range {
            acc = combine(acc, map(i));
        }
        acc
    }

    /// Smallest index in `range` satisfying `pred`, independent of scheduling.
    pub fn find_first<P>(self, range: Range<u64>, pred: P) -> Option<u64>
    where
        P: Fn(u64) -> bool + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return range.into_par_iter().find_first(|&i| pred(i));
        }
        range.into_iter().find(|&i| pred(i))
    }

    /// Ordered map over a slice.
    pub fn map_collect<A, T, M>(self, items: &[A], map: M) -> Vec<T>
    where
        A: Sync,
        T: Send,
        M: Fn(&A) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(map).collect();
        }
        items.iter().map(map).collect()
    }
}

//! Data-parallel helpers. With the `parallel` feature these dispatch to
//! rayon; without it, or with [`Execution::Sequential`], they run in order.
//! Results are always returned in input order, and reductions are summed
//! sequentially, so output does not depend on the thread count.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Ordered map over a slice.
pub fn map<T, U, F>(exec: Execution, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Ordered map over `0..n`.
pub fn map_range<U, F>(exec: Execution, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Sum of `f(i)` for `i in 0..n`, computed per index and added in order.
pub fn sum_range<F>(exec: Execution, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_range(exec, n, f).into_iter().sum()
}

/// Caps the global rayon pool. Returns false if the pool was already built
/// or the feature is off.
pub fn init_threads(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    let built = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().is_ok();
    #[cfg(not(feature = "parallel"))]
    let built = {
        let _ = n;
        false
    };
    built
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let a = map(Execution::Sequential, &xs, |x| x * x);
        let b = map(Execution::Parallel, &xs, |x| x * x);
        assert_eq!(a, b);
        let s1 = sum_range(Execution::Sequential, 1000, |i| xs[i]);
        let s2 = sum_range(Execution::Parallel, 1000, |i| xs[i]);
        assert_eq!(s1.to_bits(), s2.to_bits());
    }
}

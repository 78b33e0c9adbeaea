//! Index-parallel loops that fall back to serial without the `parallel`
//! feature. Results are always collected in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) fn map<T: Send>(len: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// First index attaining the maximum of `f` over `0..len`.
pub(crate) fn argmax(len: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> Option<(usize, f64)> {
    let better = |a: (usize, f64), b: (usize, f64)| {
        if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
            b
        } else {
            a
        }
    };
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(|i| (i, f(i))).reduce_with(better)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(|i| (i, f(i))).reduce(better)
    }
}

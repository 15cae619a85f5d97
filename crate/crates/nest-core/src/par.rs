//! Data-parallel map helper with a sequential fallback.
//!
//! Callers must keep results independent of execution order (indexed
//! outputs, order-insensitive reductions) so both modes agree bit-for-bit.

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    (0..len).map(f).collect()
}

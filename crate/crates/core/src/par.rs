//! Switch between rayon and plain iterators depending on the `parallel`
//! feature. Only adaptor methods shared by `Iterator` and `ParallelIterator`
//! (`map`, `filter`, `filter_map`, `any`, `all`, `sum`, `collect`) may follow
//! these macros, and callers import [`prelude`] for the rayon traits.

/// Rayon traits when the `parallel` feature is on, nothing otherwise.
pub(crate) mod prelude {
    #[cfg(feature = "parallel")]
    pub use rayon::prelude::*;
}

#[cfg(feature = "parallel")]
macro_rules! par_iter {
    ($e:expr) => {
        $e.par_iter()
    };
}

#[cfg(not(feature = "parallel"))]
macro_rules! par_iter {
    ($e:expr) => {
        $e.iter()
    };
}

#[cfg(feature = "parallel")]
macro_rules! into_par_iter {
    ($e:expr) => {
        $e.into_par_iter()
    };
}

#[cfg(not(feature = "parallel"))]
macro_rules! into_par_iter {
    ($e:expr) => {
        $e.into_iter()
    };
}

pub(crate) use into_par_iter;
pub(crate) use par_iter;

/// Whether this build runs data-parallel loops on the rayon pool.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

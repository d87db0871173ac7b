//! Index-ordered parallel map with a sequential fallback.
//!
//! With the `parallel` feature off, [`Execution::Parallel`] runs sequentially.
//! Results always come back in index order, so reductions over them do not
//! depend on the schedule.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_preserve_order() {
        let seq = map_indexed(1000, Execution::Sequential, |i| i * i);
        let par = map_indexed(1000, Execution::Parallel, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[999], 999 * 999);
    }
}

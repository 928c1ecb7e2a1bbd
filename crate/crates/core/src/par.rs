//! Data-parallel helpers. With the `parallel` feature these run on the
//! rayon global pool; without it, or inside [`sequential`], they fall back
//! to plain iterators. Output order always matches input order.

use std::cell::Cell;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Run `f` with every helper in this module on the sequential path.
pub fn sequential<R>(f: impl FnOnce() -> R) -> R {
    struct Reset(bool);
    impl Drop for Reset {
        fn drop(&mut self) {
            FORCE_SEQUENTIAL.with(|c| c.set(self.0));
        }
    }
    let _reset = Reset(FORCE_SEQUENTIAL.with(|c| c.replace(true)));
    f()
}

/// True when [`map`] would use the thread pool from this thread.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.with(Cell::get)
}

pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Like [`map`] but stops at the first error in input order.
pub fn try_map<T, U, E, F>(items: &[T], f: F) -> Result<Vec<U>, E>
where
    T: Sync,
    U: Send,
    E: Send,
    F: Fn(&T) -> Result<U, E> + Sync + Send,
{
    map(items, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order() {
        let xs: Vec<u32> = (0..1000).collect();
        let ys = map(&xs, |x| x * 2);
        assert!(ys.iter().enumerate().all(|(i, y)| *y == 2 * i as u32));
        assert_eq!(sequential(|| map(&xs, |x| x * 2)), ys);
    }

    #[test]
    fn first_error_in_input_order() {
        let xs: Vec<u32> = (0..100).collect();
        let r: Result<Vec<u32>, u32> = try_map(&xs, |&x| if x % 10 == 7 { Err(x) } else { Ok(x) });
        assert_eq!(r, Err(7));
    }

    #[test]
    fn sequential_scope_restores() {
        let before = is_parallel();
        sequential(|| {
            assert!(!is_parallel());
            sequential(|| assert!(!is_parallel()));
            assert!(!is_parallel());
        });
        assert_eq!(is_parallel(), before);
        assert_eq!(before, cfg!(feature = "parallel"));
    }
}

//! Order-preserving map over independent jobs, parallel when the `parallel`
//! feature is on and `HOLONOMY_LAB_THREADS` is not `0`.

pub const THREADS_ENV: &str = "HOLONOMY_LAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Serial,
    /// `None` uses the global pool; `Some(k)` a pool of `k` threads.
    Parallel(Option<usize>),
}

impl Mode {
    /// Reads the thread cap from the environment.
    pub fn from_env() -> Mode {
        match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            Some(0) => Mode::Serial,
            Some(k) => Mode::Parallel(Some(k)),
            None => Mode::Parallel(None),
        }
    }
}

/// `(0..n).map(f)` collected in index order.
pub fn map_indexed<T, F>(mode: Mode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        Mode::Serial => (0..n).map(f).collect(),
        Mode::Parallel(cap) => parallel(cap, n, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel<T, F>(cap: Option<usize>, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let run = || (0..n).into_par_iter().map(&f).collect();
    match cap {
        None => run(),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(run),
            Err(_) => (0..n).map(&f).collect(),
        },
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel<T, F>(_cap: Option<usize>, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let f = |i: usize| (i as f64).sqrt();
        let a = map_indexed(Mode::Serial, 100, f);
        let b = map_indexed(Mode::Parallel(None), 100, f);
        let c = map_indexed(Mode::Parallel(Some(2)), 100, f);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}

//! Compute backends for the per-cell and per-line kernels.
//!
//! `Serial` runs everything on the calling thread. `Parallel` splits the same
//! work over the rayon pool. Both apply identical arithmetic to each element,
//! so results agree bit for bit; reductions stay on the calling thread so
//! their summation order is fixed.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

/// Minimum cells per rayon task for cheap pointwise kernels.
const MIN_CELLS_PER_TASK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Backend {
    #[default]
    Serial,
    Parallel,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Serial => "serial",
            Backend::Parallel => "parallel",
        }
    }

    /// Calls `f(index, chunk)` for each `size`-element chunk of `data`.
    pub fn for_each_chunk<T, F>(self, data: &mut [T], size: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        match self {
            Backend::Serial => data.chunks_mut(size).enumerate().for_each(|(n, c)| f(n, c)),
            Backend::Parallel => data
                .par_chunks_mut(size)
                .enumerate()
                .for_each(|(n, c)| f(n, c)),
        }
    }

    /// Like [`Backend::for_each_chunk`] with per-task state created by `init`.
    pub fn for_each_chunk_init<T, S, I, F>(self, data: &mut [T], size: usize, init: I, f: F)
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize, &mut [T]) + Sync + Send,
    {
        match self {
            Backend::Serial => {
                let mut state = init();
                data.chunks_mut(size)
                    .enumerate()
                    .for_each(|(n, c)| f(&mut state, n, c));
            }
            Backend::Parallel => data
                .par_chunks_mut(size)
                .enumerate()
                .for_each_init(init, |s, (n, c)| f(s, n, c)),
        }
    }

    /// Calls `f(state, index, x, y, z)` for matching `size`-element chunks
    /// of three equally long slices.
    pub fn for_each_chunk3_init<T, S, I, F>(self, x: &mut [T], y: &mut [T], z: &mut [T], size: usize, init: I, f: F)
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize, &mut [T], &mut [T], &mut [T]) + Sync + Send,
    {
        assert!(x.len() == y.len() && y.len() == z.len());
        match self {
            Backend::Serial => {
                let mut state = init();
                for (n, ((a, b), c)) in x
                    .chunks_mut(size)
                    .zip(y.chunks_mut(size))
                    .zip(z.chunks_mut(size))
                    .enumerate()
                {
                    f(&mut state, n, a, b, c);
                }
            }
            Backend::Parallel => x
                .par_chunks_mut(size)
                .zip(y.par_chunks_mut(size))
                .zip(z.par_chunks_mut(size))
                .enumerate()
                .for_each_init(init, |s, (n, ((a, b), c))| f(s, n, a, b, c)),
        }
    }

    /// Calls `f(cell, &mut x, &mut y, &mut z)` for every cell of three
    /// component lattices.
    pub fn for_each_cell<T, F>(self, x: &mut [T], y: &mut [T], z: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T, &mut T, &mut T) + Sync + Send,
    {
        assert!(x.len() == y.len() && y.len() == z.len());
        match self {
            Backend::Serial => {
                for (n, ((a, b), c)) in x.iter_mut().zip(y.iter_mut()).zip(z.iter_mut()).enumerate() {
                    f(n, a, b, c);
                }
            }
            Backend::Parallel => x
                .par_iter_mut()
                .zip(y.par_iter_mut())
                .zip(z.par_iter_mut())
                .enumerate()
                .with_min_len(MIN_CELLS_PER_TASK)
                .for_each(|(n, ((a, b), c))| f(n, a, b, c)),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "serial" => Ok(Backend::Serial),
            "parallel" => Ok(Backend::Parallel),
            other => Err(format!("unknown backend `{other}` (expected serial or parallel)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backends_visit_every_cell_once() {
        for backend in [Backend::Serial, Backend::Parallel] {
            let n = 5000;
            let (mut x, mut y, mut z) = (vec![0usize; n], vec![0usize; n], vec![0usize; n]);
            backend.for_each_cell(&mut x, &mut y, &mut z, |c, a, b, d| {
                *a += c;
                *b += 1;
                *d += 2 * c;
            });
            assert!(x.iter().enumerate().all(|(c, &v)| v == c));
            assert!(y.iter().all(|&v| v == 1));
            assert!(z.iter().enumerate().all(|(c, &v)| v == 2 * c));
        }
    }

    #[test]
    fn chunk_indices_are_ordered() {
        for backend in [Backend::Serial, Backend::Parallel] {
            let mut data = vec![0usize; 64];
            backend.for_each_chunk(&mut data, 8, |n, c| c.iter_mut().for_each(|v| *v = n));
            for (i, v) in data.iter().enumerate() {
                assert_eq!(*v, i / 8);
            }
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("serial".parse::<Backend>().unwrap(), Backend::Serial);
        assert_eq!("parallel".parse::<Backend>().unwrap(), Backend::Parallel);
        assert!("gpu".parse::<Backend>().is_err());
    }
}

//! Three-dimensional complex FFT built from rustfft line transforms.
//!
//! Each pass transforms a rectangular subset of the lines along one axis,
//! which lets the demag convolution skip lines that are known to be zero
//! (forward) or whose values are never read (inverse).

use std::ops::Range;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::backend::Backend;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

pub(crate) struct Fft3<T: Real> {
    dims: [usize; 3],
    forward: [Arc<dyn Fft<T>>; 3],
    inverse: [Arc<dyn Fft<T>>; 3],
}

impl<T: Real> Fft3<T> {
    pub fn new(dims: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = dims.map(|n| planner.plan_fft_forward(n));
        let inverse = dims.map(|n| planner.plan_fft_inverse(n));
        Fft3 { dims, forward, inverse }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    /// Line transform along x, for callers that process rows themselves.
    pub fn row_plan(&self, dir: Direction) -> &Arc<dyn Fft<T>> {
        match dir {
            Direction::Forward => &self.forward[0],
            Direction::Inverse => &self.inverse[0],
        }
    }

    /// Unnormalized transform over every line of every axis.
    pub fn transform(&self, data: &mut [Complex<T>], dir: Direction, backend: Backend) {
        let [px, py, pz] = self.dims;
        let mut lines = Vec::new();
        self.pass(data, 0, 0..py, 0..pz, dir, backend, &mut lines);
        self.pass(data, 1, 0..px, 0..pz, dir, backend, &mut lines);
        self.pass(data, 2, 0..px, 0..py, dir, backend, &mut lines);
    }

    /// Transforms the lines along `axis` whose other two coordinates lie in
    /// `a` x `b`. The other coordinates are taken in increasing axis order:
    /// (y, z) for axis 0, (x, z) for axis 1, (x, y) for axis 2.
    #[allow(clippy::too_many_arguments)]
    pub fn pass(
        &self,
        data: &mut [Complex<T>],
        axis: usize,
        a: Range<usize>,
        b: Range<usize>,
        dir: Direction,
        backend: Backend,
        lines: &mut Vec<Complex<T>>,
    ) {
        let len = self.dims[axis];
        self.pass_pruned(data, axis, a, b, len, 0..len, dir, backend, lines);
    }

    /// Like [`Fft3::pass`], for lines known to be zero from position `valid`
    /// on. Those entries are not read. Along x they are overwritten with
    /// zeros before the transform; along y and z only the positions in
    /// `keep` are written back.
    #[allow(clippy::too_many_arguments)]
    pub fn pass_pruned(
        &self,
        data: &mut [Complex<T>],
        axis: usize,
        a: Range<usize>,
        b: Range<usize>,
        valid: usize,
        keep: Range<usize>,
        dir: Direction,
        backend: Backend,
        lines: &mut Vec<Complex<T>>,
    ) {
        assert_eq!(data.len(), self.len());
        let len = self.dims[axis];
        assert!(valid <= len && keep.end <= len);
        let fft = match dir {
            Direction::Forward => &self.forward[axis],
            Direction::Inverse => &self.inverse[axis],
        };
        let scratch_len = fft.get_inplace_scratch_len();
        let zero = Complex::new(T::zero(), T::zero());
        let init = || vec![zero; scratch_len];
        let [px, py, _] = self.dims;

        if axis == 0 {
            // rows along x are contiguous: transform in place
            backend.for_each_chunk_init(data, px, init, |scratch, row, line| {
                let (j, k) = (row % py, row / py);
                if a.contains(&j) && b.contains(&k) {
                    line[valid..].fill(zero);
                    fft.process_with_scratch(line, scratch);
                }
            });
            return;
        }

        let (na, a0) = (a.len(), a.start);
        if na == 0 || b.is_empty() {
            return;
        }
        let zero_tails = |buf: &mut [Complex<T>]| {
            if valid < len {
                for line in buf.chunks_mut(len) {
                    line[valid..].fill(zero);
                }
            }
        };
        let nkeep = keep.len();

        if axis == 1 {
            // each z-plane is independent: transpose the selected columns
            // into contiguous lines, transform, transpose back
            let init = || (init(), vec![zero; na * len]);
            backend.for_each_chunk_init(data, px * py, init, |(scratch, buf), k, plane| {
                if !b.contains(&k) {
                    return;
                }
                transpose(&plane[a0..], px, buf, len, valid, na);
                zero_tails(buf);
                fft.process_with_scratch(buf, scratch);
                transpose(&buf[keep.start..], len, &mut plane[a0 + px * keep.start..], px, na, nkeep);
            });
            return;
        }

        // axis 2: one xz-slab per selected y index
        let nb = b.len();
        let b0 = b.start;
        let slab = na * len;
        lines.clear();
        lines.resize(nb * slab, zero);
        {
            let src: &[Complex<T>] = data;
            let init = || (init(), vec![zero; slab]);
            backend.for_each_chunk_init(lines, slab, init, |(scratch, rows), m, buf| {
                let base = a0 + px * (b0 + m);
                for (k, row) in rows.chunks_mut(na).take(valid).enumerate() {
                    row.copy_from_slice(&src[base + px * py * k..][..na]);
                }
                transpose(rows, na, buf, len, valid, na);
                zero_tails(buf);
                fft.process_with_scratch(buf, scratch);
            });
        }
        match backend {
            Backend::Serial => {
                let mut rows = vec![zero; slab];
                for (m, buf) in lines.chunks(slab).enumerate() {
                    transpose(&buf[keep.start..], len, &mut rows, na, na, nkeep);
                    let base = a0 + px * (b0 + m);
                    for (c, row) in rows.chunks(na).take(nkeep).enumerate() {
                        data[base + px * py * (keep.start + c)..][..na].copy_from_slice(row);
                    }
                }
            }
            Backend::Parallel => {
                let src: &[Complex<T>] = lines;
                backend.for_each_chunk(data, px * py, |k, plane| {
                    if !keep.contains(&k) {
                        return;
                    }
                    for m in 0..nb {
                        let row = &mut plane[a0 + px * (b0 + m)..][..na];
                        for (n, v) in row.iter_mut().enumerate() {
                            *v = src[m * slab + n * len + k];
                        }
                    }
                });
            }
        }
    }
}

/// `dst[c * dst_stride + r] = src[r * src_stride + c]` for `r < rows`,
/// `c < cols`, in square tiles.
fn transpose<T: Copy>(src: &[T], src_stride: usize, dst: &mut [T], dst_stride: usize, rows: usize, cols: usize) {
    const TILE: usize = 16;
    for r0 in (0..rows).step_by(TILE) {
        let r1 = (r0 + TILE).min(rows);
        for c0 in (0..cols).step_by(TILE) {
            let c1 = (c0 + TILE).min(cols);
            for r in r0..r1 {
                let row = &src[r * src_stride..];
                for c in c0..c1 {
                    dst[c * dst_stride + r] = row[c];
                }
            }
        }
    }
}

//! Demagnetization field.
//!
//! The demag tensor is evaluated on the doubled grid from the arctangent
//! (diagonal) and logarithm (off-diagonal) closed forms for the field of a
//! uniformly magnetized cube, transformed once, and then convolved with the
//! zero-padded magnetization every step. [`demag_field_direct`] evaluates
//! the same convolution as an O(N²) double loop and serves as the oracle.

mod fft3;

use std::f64::consts::PI;

use rustfft::num_complex::Complex;

use crate::backend::Backend;
use crate::error::{Error, Result};
use crate::grid::{check_same_shape, Grid, VectorField};
use crate::real::Real;

pub(crate) use fft3::{Direction, Fft3};

/// The six independent tensor components at one cell offset.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TensorEntry {
    pub xx: f64,
    pub xy: f64,
    pub xz: f64,
    pub yy: f64,
    pub yz: f64,
    pub zz: f64,
}

impl TensorEntry {
    pub fn trace(&self) -> f64 {
        self.xx + self.yy + self.zz
    }

    fn as_array(&self) -> [f64; 6] {
        [self.xx, self.xy, self.xz, self.yy, self.yz, self.zz]
    }
}

/// Demag tensor at offset `(di, dj, dk)` (in cells) for cubic cells of edge `delta`.
///
/// Sums the eight corner terms with alternating sign. The zero offset is
/// evaluated by the same expressions and yields the self-demagnetization
/// factors (-1/3 on the diagonal).
pub fn tensor_entry(di: i64, dj: i64, dk: i64, delta: f64) -> TensorEntry {
    let mut s = [0.0f64; 6];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let sign = if (i + j + k) % 2 == 0 { 1.0 } else { -1.0 };
                let x = (di + i) as f64 - 0.5;
                let y = (dj + j) as f64 - 0.5;
                let z = (dk + k) as f64 - 0.5;
                let r = (x * x * delta * delta + y * y * delta * delta + z * z * delta * delta).sqrt();
                // half-integer coordinates keep every denominator and log argument nonzero
                debug_assert!(z * delta + r > 0.0 && y * delta + r > 0.0 && x * delta + r > 0.0);
                s[0] += sign * (z * y * delta / r / x).atan();
                s[1] += sign * (z * delta + r).ln();
                s[2] += sign * (y * delta + r).ln();
                s[3] += sign * (x * z * delta / r / y).atan();
                s[4] += sign * (x * delta + r).ln();
                s[5] += sign * (y * x * delta / r / z).atan();
            }
        }
    }
    let pre = 1.0 / (4.0 * PI);
    TensorEntry {
        xx: s[0] * pre,
        xy: -s[1] * pre,
        xz: -s[2] * pre,
        yy: s[3] * pre,
        yz: -s[4] * pre,
        zz: s[5] * pre,
    }
}

/// Real-space demag tensor on the doubled grid `(2nx, 2ny, 2nz)`.
///
/// Offset `(I, J, K)` with `-n < I < n` per axis is stored at index
/// `I + n - 1`; the last slice along each axis stays zero.
#[derive(Debug, Clone)]
pub struct DemagTensor {
    grid: Grid,
    pub kxx: Vec<f64>,
    pub kxy: Vec<f64>,
    pub kxz: Vec<f64>,
    pub kyy: Vec<f64>,
    pub kyz: Vec<f64>,
    pub kzz: Vec<f64>,
}

impl DemagTensor {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn padded_shape(&self) -> (usize, usize, usize) {
        self.grid.padded_shape()
    }

    pub fn components(&self) -> [&[f64]; 6] {
        [&self.kxx, &self.kxy, &self.kxz, &self.kyy, &self.kyz, &self.kzz]
    }

    /// Stored index of a cell offset, or `None` outside `-n < offset < n`.
    pub fn offset_index(&self, di: i64, dj: i64, dk: i64) -> Option<usize> {
        let (nx, ny, nz) = self.grid.shape();
        let (px, py, _) = self.padded_shape();
        let shift = |d: i64, n: usize| {
            let s = d + n as i64 - 1;
            (s >= 0 && s < 2 * n as i64 - 1).then_some(s as usize)
        };
        Some(shift(di, nx)? + px * (shift(dj, ny)? + py * shift(dk, nz)?))
    }

    pub fn at_offset(&self, di: i64, dj: i64, dk: i64) -> Option<TensorEntry> {
        let n = self.offset_index(di, dj, dk)?;
        Some(TensorEntry {
            xx: self.kxx[n],
            xy: self.kxy[n],
            xz: self.kxz[n],
            yy: self.kyy[n],
            yz: self.kyz[n],
            zz: self.kzz[n],
        })
    }
}

pub(crate) fn try_filled<V: Clone>(len: usize, value: V) -> Result<Vec<V>> {
    let mut v = Vec::new();
    v.try_reserve_exact(len).map_err(|_| Error::Allocation(len))?;
    v.resize(len, value);
    Ok(v)
}

pub fn build_demag_tensor(grid: &Grid) -> Result<DemagTensor> {
    build_demag_tensor_with(grid, Backend::Serial)
}

pub fn build_demag_tensor_with(grid: &Grid, backend: Backend) -> Result<DemagTensor> {
    let (nx, ny, nz) = grid.shape();
    let (px, py, pz) = grid.padded_shape();
    let len = px * py * pz;
    let delta = grid.delta();

    let mut packed = try_filled(len, [0.0f64; 6])?;
    backend.for_each_chunk(&mut packed, px * py, |sk, plane| {
        if sk + 1 >= pz {
            return;
        }
        let dk = sk as i64 - (nz as i64 - 1);
        for sj in 0..py - 1 {
            let dj = sj as i64 - (ny as i64 - 1);
            for si in 0..px - 1 {
                let di = si as i64 - (nx as i64 - 1);
                plane[si + px * sj] = tensor_entry(di, dj, dk, delta).as_array();
            }
        }
    });

    let mut comps: [Vec<f64>; 6] = Default::default();
    for (c, comp) in comps.iter_mut().enumerate() {
        let mut v = try_filled(0, 0.0)?;
        v.try_reserve_exact(len).map_err(|_| Error::Allocation(len))?;
        v.extend(packed.iter().map(|e| e[c]));
        *comp = v;
    }
    let [kxx, kxy, kxz, kyy, kyz, kzz] = comps;
    Ok(DemagTensor {
        grid: *grid,
        kxx,
        kxy,
        kxz,
        kyy,
        kyz,
        kzz,
    })
}

/// Forward transforms of the six tensor components, computed once per grid.
#[derive(Debug, Clone)]
pub struct SpectralTensor<T> {
    grid: Grid,
    pub kxx: Vec<Complex<T>>,
    pub kxy: Vec<Complex<T>>,
    pub kxz: Vec<Complex<T>>,
    pub kyy: Vec<Complex<T>>,
    pub kyz: Vec<Complex<T>>,
    pub kzz: Vec<Complex<T>>,
}

impl<T: Real> SpectralTensor<T> {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> [&[Complex<T>]; 6] {
        [&self.kxx, &self.kxy, &self.kxz, &self.kyy, &self.kyz, &self.kzz]
    }
}

pub fn spectral_prepare<T: Real>(t: &DemagTensor) -> Result<SpectralTensor<T>> {
    spectral_prepare_with(t, Backend::Serial)
}

/// Transforms are done in f64 and rounded to `T` afterwards.
pub fn spectral_prepare_with<T: Real>(t: &DemagTensor, backend: Backend) -> Result<SpectralTensor<T>> {
    let (px, py, pz) = t.padded_shape();
    let fft = Fft3::<f64>::new([px, py, pz]);
    let mut buf = try_filled(px * py * pz, Complex::new(0.0, 0.0))?;
    let mut out: [Vec<Complex<T>>; 6] = Default::default();
    for (dst, src) in out.iter_mut().zip(t.components()) {
        for (b, &v) in buf.iter_mut().zip(src) {
            *b = Complex::new(v, 0.0);
        }
        fft.transform(&mut buf, Direction::Forward, backend);
        let mut v = try_filled(0, Complex::new(T::zero(), T::zero()))?;
        v.try_reserve_exact(buf.len()).map_err(|_| Error::Allocation(buf.len()))?;
        v.extend(buf.iter().map(|c| Complex::new(T::from_double(c.re), T::from_double(c.im))));
        *dst = v;
    }
    let [kxx, kxy, kxz, kyy, kyz, kzz] = out;
    Ok(SpectralTensor {
        grid: *t.grid(),
        kxx,
        kxy,
        kxz,
        kyy,
        kyz,
        kzz,
    })
}

/// Scratch buffers and FFT plans for repeated demag evaluations on one grid.
///
/// Not shareable between concurrent evaluations; create one per thread.
pub struct DemagWorkspace<T: Real> {
    grid: Grid,
    fft: Fft3<T>,
    buf: [Vec<Complex<T>>; 3],
    lines: Vec<Complex<T>>,
    backend: Backend,
    last_residue: f64,
}

impl<T: Real> DemagWorkspace<T> {
    pub fn new(grid: &Grid, backend: Backend) -> Result<Self> {
        let (px, py, pz) = grid.padded_shape();
        let len = px * py * pz;
        let zero = Complex::new(T::zero(), T::zero());
        Ok(DemagWorkspace {
            grid: *grid,
            fft: Fft3::new([px, py, pz]),
            buf: [try_filled(len, zero)?, try_filled(len, zero)?, try_filled(len, zero)?],
            lines: try_filled(len, zero)?,
            backend,
            last_residue: 0.0,
        })
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// Largest discarded imaginary part of the last evaluation.
    pub fn last_residue(&self) -> f64 {
        self.last_residue
    }

    /// Demag field of `m` by zero-padded FFT convolution, written to `out`.
    pub fn compute_into(
        &mut self,
        m: &VectorField<T>,
        st: &SpectralTensor<T>,
        out: &mut VectorField<T>,
    ) -> Result<()> {
        check_same_shape(&self.grid, m.grid())?;
        check_same_shape(&self.grid, st.grid())?;
        check_same_shape(&self.grid, out.grid())?;
        let (nx, ny, nz) = self.grid.shape();
        let (px, py, pz) = self.grid.padded_shape();
        let backend = self.backend;
        let zero = Complex::new(T::zero(), T::zero());

        for (buf, src) in self.buf.iter_mut().zip(m.components()) {
            // only the (nx, ny, nz) corner is written; the passes below treat
            // everything past it as zero without reading it
            backend.for_each_chunk(&mut buf[..px * py * nz], px * py, |k, plane| {
                for j in 0..ny {
                    let row = &src[nx * (j + ny * k)..][..nx];
                    for (p, &v) in plane[px * j..][..nx].iter_mut().zip(row) {
                        *p = Complex::new(v, T::zero());
                    }
                }
            });
            let fft = &self.fft;
            let lines = &mut self.lines;
            fft.pass_pruned(buf, 2, 0..nx, 0..ny, nz, 0..pz, Direction::Forward, backend, lines);
            fft.pass_pruned(buf, 1, 0..nx, 0..pz, ny, 0..py, Direction::Forward, backend, lines);
        }

        // x transforms, spectral product and inverse x transforms, one row at a time
        {
            let forward = self.fft.row_plan(Direction::Forward);
            let inverse = self.fft.row_plan(Direction::Inverse);
            let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
            let [bx, by, bz] = &mut self.buf;
            backend.for_each_chunk3_init(
                bx,
                by,
                bz,
                px,
                || vec![zero; scratch_len],
                |scratch, row, rx, ry, rz| {
                    for r in [&mut *rx, &mut *ry, &mut *rz] {
                        r[nx..].fill(zero);
                        forward.process_with_scratch(r, scratch);
                    }
                    let base = row * px;
                    for i in 0..px {
                        let n = base + i;
                        let (mx, my, mz) = (rx[i], ry[i], rz[i]);
                        rx[i] = st.kxx[n] * mx + st.kxy[n] * my + st.kxz[n] * mz;
                        ry[i] = st.kxy[n] * mx + st.kyy[n] * my + st.kyz[n] * mz;
                        rz[i] = st.kxz[n] * mx + st.kyz[n] * my + st.kzz[n] * mz;
                    }
                    for r in [rx, ry, rz] {
                        inverse.process_with_scratch(r, scratch);
                    }
                },
            );
        }

        let scale = T::from_double(1.0 / (px * py * pz) as f64);
        let mut residue = 0.0f64;
        let outs = [&mut out.x, &mut out.y, &mut out.z];
        for (buf, dst) in self.buf.iter_mut().zip(outs) {
            // only the extraction window [n-1, 2n-1) is read back
            let (wx, wy, wz) = (nx - 1..2 * nx - 1, ny - 1..2 * ny - 1, nz - 1..2 * nz - 1);
            let lines = &mut self.lines;
            self.fft.pass_pruned(buf, 1, wx.clone(), 0..pz, py, wy.clone(), Direction::Inverse, backend, lines);
            self.fft.pass_pruned(buf, 2, wx, wy, pz, wz, Direction::Inverse, backend, lines);
            for k in 0..nz {
                for j in 0..ny {
                    let src = &buf[(nx - 1) + px * ((j + ny - 1) + py * (k + nz - 1))..][..nx];
                    let row = &mut dst[nx * (j + ny * k)..][..nx];
                    for (d, s) in row.iter_mut().zip(src) {
                        *d = s.re * scale;
                        residue = residue.max((s.im * scale).abs().to_double());
                    }
                }
            }
        }

        self.last_residue = residue;
        let tolerance = T::RESIDUE_TOL * m.max_norm();
        if residue > tolerance {
            return Err(Error::ImaginaryResidue { residue, tolerance });
        }
        Ok(())
    }
}

/// Demag field by FFT convolution with a freshly allocated workspace.
pub fn demag_field_fft<T: Real>(m: &VectorField<T>, st: &SpectralTensor<T>, grid: &Grid) -> Result<VectorField<T>> {
    let mut ws = DemagWorkspace::new(grid, Backend::Serial)?;
    let mut out = VectorField::zeros(*grid);
    ws.compute_into(m, st, &mut out)?;
    Ok(out)
}

/// Brute-force `H(c) = Σ_c' K(c - c') M(c')`, accumulated in f64.
///
/// O(N²); intended for small grids and as the oracle for the FFT path.
pub fn demag_field_direct<T: Real>(m: &VectorField<T>, t: &DemagTensor, grid: &Grid) -> Result<VectorField<T>> {
    check_same_shape(grid, m.grid())?;
    check_same_shape(grid, t.grid())?;
    let n = grid.cells();
    let mut out = VectorField::zeros(*grid);
    for c in 0..n {
        let (i, j, k) = grid.coords(c);
        let (mut hx, mut hy, mut hz) = (0.0, 0.0, 0.0);
        for s in 0..n {
            let (si, sj, sk) = grid.coords(s);
            let idx = t
                .offset_index(i as i64 - si as i64, j as i64 - sj as i64, k as i64 - sk as i64)
                .expect("offset within the doubled grid");
            let (mx, my, mz) = (m.x[s].to_double(), m.y[s].to_double(), m.z[s].to_double());
            hx += t.kxx[idx] * mx + t.kxy[idx] * my + t.kxz[idx] * mz;
            hy += t.kxy[idx] * mx + t.kyy[idx] * my + t.kyz[idx] * mz;
            hz += t.kxz[idx] * mx + t.kyz[idx] * my + t.kzz[idx] * mz;
        }
        out.x[c] = T::from_double(hx);
        out.y[c] = T::from_double(hy);
        out.z[c] = T::from_double(hz);
    }
    Ok(out)
}

/// Largest absolute difference between two fields divided by the largest
/// absolute component of `reference`.
pub fn relative_error<T: Real, U: Real>(field: &VectorField<T>, reference: &VectorField<U>) -> f64 {
    let mut diff = 0.0f64;
    for (a, b) in field.components().iter().zip(reference.components()) {
        for (u, v) in a.iter().zip(b.iter()) {
            diff = diff.max((u.to_double() - v.to_double()).abs());
        }
    }
    let scale = reference.max_abs();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

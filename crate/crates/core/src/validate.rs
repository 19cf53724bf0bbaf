//! Self-checks of the demag path against the direct-sum oracle and the
//! analytic properties of the tensor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backend::Backend;
use crate::demag::{
    build_demag_tensor, demag_field_direct, relative_error, spectral_prepare_with, tensor_entry, DemagWorkspace,
    TensorEntry,
};
use crate::error::Result;
use crate::fields::exchange_field;
use crate::grid::{Grid, Vec3, VectorField};
use crate::material::MaterialParams;
use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn push_result(&mut self, name: &str, r: Result<(bool, String)>) {
        match r {
            Ok((ok, detail)) => self.push(name, ok, detail),
            Err(e) => self.push(name, false, format!("error: {e}")),
        }
    }

    pub fn render(&self) -> String {
        self.checks
            .iter()
            .map(|c| format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
            .collect()
    }
}

/// Magnetization with magnitude `ms` and seeded random directions.
pub fn random_magnetization<T: Real>(grid: Grid, ms: f64, seed: u64) -> VectorField<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    VectorField::from_fn(grid, |_, _, _| loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v * (ms / n);
        }
    })
}

/// Relative error of the FFT demag field against the direct sum on a random state.
pub fn fft_vs_direct<T: Real>(grid: Grid, seed: u64, backend: Backend) -> Result<f64> {
    let m64 = random_magnetization::<f64>(grid, 800.0, seed);
    let tensor = build_demag_tensor(&grid)?;
    let reference = demag_field_direct(&m64, &tensor, &grid)?;
    let spectral = spectral_prepare_with::<T>(&tensor, backend)?;
    let mut ws = DemagWorkspace::<T>::new(&grid, backend)?;
    let mut out = VectorField::zeros(grid);
    ws.compute_into(&m64.cast::<T>(), &spectral, &mut out)?;
    Ok(relative_error(&out, &reference))
}

fn max_entry_diff(a: &TensorEntry, b: &TensorEntry) -> f64 {
    [
        a.xx - b.xx,
        a.xy - b.xy,
        a.xz - b.xz,
        a.yy - b.yy,
        a.yz - b.yz,
        a.zz - b.zz,
    ]
    .iter()
    .fold(0.0, |m, d| m.max(d.abs()))
}

/// Largest violation of the trace, parity and permutation identities over
/// `samples` random nonzero offsets, together with the zero-offset errors.
pub fn tensor_invariants(samples: usize, seed: u64) -> TensorInvariants {
    let zero = tensor_entry(0, 0, 0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = TensorInvariants {
        zero_trace_error: (zero.trace() + 1.0).abs(),
        zero_off_diagonal: zero.xy.abs().max(zero.xz.abs()).max(zero.yz.abs()),
        ..TensorInvariants::default()
    };
    let mut taken = 0;
    while taken < samples {
        let (i, j, k) = (rng.gen_range(-12i64..=12), rng.gen_range(-12i64..=12), rng.gen_range(-12i64..=12));
        if (i, j, k) == (0, 0, 0) {
            continue;
        }
        taken += 1;
        let delta = rng.gen_range(0.5..4.0);
        let e = tensor_entry(i, j, k, delta);
        out.max_trace = out.max_trace.max(e.trace().abs());

        // flipping the sign of one offset component flips the off-diagonal
        // terms that contain that axis once
        let fx = tensor_entry(-i, j, k, delta);
        let fy = tensor_entry(i, -j, k, delta);
        let fz = tensor_entry(i, j, -k, delta);
        let want_fx = TensorEntry { xy: -e.xy, xz: -e.xz, ..e };
        let want_fy = TensorEntry { xy: -e.xy, yz: -e.yz, ..e };
        let want_fz = TensorEntry { xz: -e.xz, yz: -e.yz, ..e };
        out.max_parity = out
            .max_parity
            .max(max_entry_diff(&fx, &want_fx))
            .max(max_entry_diff(&fy, &want_fy))
            .max(max_entry_diff(&fz, &want_fz));

        // swapping two offset axes swaps the matching tensor indices
        let sxy = tensor_entry(j, i, k, delta);
        let want_sxy = TensorEntry {
            xx: e.yy,
            yy: e.xx,
            xz: e.yz,
            yz: e.xz,
            ..e
        };
        let syz = tensor_entry(i, k, j, delta);
        let want_syz = TensorEntry {
            yy: e.zz,
            zz: e.yy,
            xy: e.xz,
            xz: e.xy,
            ..e
        };
        let sxz = tensor_entry(k, j, i, delta);
        let want_sxz = TensorEntry {
            xx: e.zz,
            zz: e.xx,
            xy: e.yz,
            yz: e.xy,
            ..e
        };
        let scale = [e.xx, e.xy, e.xz, e.yy, e.yz, e.zz]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        out.max_permutation = out.max_permutation.max(
            max_entry_diff(&sxy, &want_sxy)
                .max(max_entry_diff(&syz, &want_syz))
                .max(max_entry_diff(&sxz, &want_sxz))
                / scale,
        );
        out.samples += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TensorInvariants {
    pub samples: usize,
    /// `|trace + 1|` at zero offset.
    pub zero_trace_error: f64,
    pub zero_off_diagonal: f64,
    /// Max `|trace|` over the sampled nonzero offsets.
    pub max_trace: f64,
    pub max_parity: f64,
    /// Relative to the largest entry at each offset.
    pub max_permutation: f64,
}

/// Mean demag field along M over a uniformly magnetized `n³` cube, in units of ms.
pub fn cube_shape_factor(n: usize) -> Result<f64> {
    let grid = Grid::new(n, n, n, 1.0)?;
    let ms = 1000.0;
    let m = VectorField::<f64>::uniform(grid, Vec3::new(ms, 0.0, 0.0));
    let tensor = build_demag_tensor(&grid)?;
    let spectral = spectral_prepare_with::<f64>(&tensor, Backend::Serial)?;
    let mut ws = DemagWorkspace::new(&grid, Backend::Serial)?;
    let mut h = VectorField::zeros(grid);
    ws.compute_into(&m, &spectral, &mut h)?;
    Ok(h.x.iter().sum::<f64>() / grid.cells() as f64 / ms)
}

/// Central-cell `H_z / ms` of an `n × n × 1` film magnetized along z.
pub fn film_central_field(n: usize) -> Result<f64> {
    let grid = Grid::new(n, n, 1, 1.0)?;
    let ms = 1000.0;
    let m = VectorField::<f64>::uniform(grid, Vec3::new(0.0, 0.0, ms));
    let tensor = build_demag_tensor(&grid)?;
    let spectral = spectral_prepare_with::<f64>(&tensor, Backend::Serial)?;
    let mut ws = DemagWorkspace::new(&grid, Backend::Serial)?;
    let mut h = VectorField::zeros(grid);
    ws.compute_into(&m, &spectral, &mut h)?;
    Ok(h.z[grid.index(n / 2, n / 2, 0)] / ms)
}

/// Runs the oracle suite. `full` adds the larger shape-factor checks.
pub fn run_validation(full: bool) -> ValidationReport {
    let mut report = ValidationReport::default();

    for (n, dims) in [(4, 4, 2), (8, 8, 4), (5, 3, 2)].into_iter().enumerate() {
        let name = format!("fft vs direct {}x{}x{} f64", dims.0, dims.1, dims.2);
        let r = Grid::new(dims.0, dims.1, dims.2, 2.0)
            .and_then(|g| fft_vs_direct::<f64>(g, 11 + n as u64, Backend::Serial))
            .map(|err| (err <= 1e-10, format!("relative error {err:.3e} (limit 1e-10)")));
        report.push_result(&name, r);
    }
    let r = Grid::new(8, 8, 4, 2.0)
        .and_then(|g| fft_vs_direct::<f32>(g, 5, Backend::Serial))
        .map(|err| (err <= 1e-4, format!("relative error {err:.3e} (limit 1e-4)")));
    report.push_result("fft vs direct 8x8x4 f32", r);
    let r = Grid::new(8, 8, 4, 2.0)
        .and_then(|g| fft_vs_direct::<f64>(g, 6, Backend::Parallel))
        .map(|err| (err <= 1e-10, format!("relative error {err:.3e} (limit 1e-10)")));
    report.push_result("fft vs direct 8x8x4 parallel", r);

    let t = tensor_invariants(50, 2024);
    report.push(
        "tensor trace at zero offset",
        t.zero_trace_error <= 1e-12,
        format!("|trace + 1| = {:.3e}", t.zero_trace_error),
    );
    report.push(
        "tensor off-diagonal at zero offset",
        t.zero_off_diagonal <= 1e-12,
        format!("max = {:.3e}", t.zero_off_diagonal),
    );
    report.push(
        "tensor trace at nonzero offsets",
        t.max_trace <= 1e-12,
        format!("max |trace| = {:.3e} over {} offsets", t.max_trace, t.samples),
    );
    report.push(
        "tensor parity",
        t.max_parity <= 1e-12,
        format!("max deviation {:.3e}", t.max_parity),
    );
    report.push(
        "tensor permutation",
        t.max_permutation <= 1e-10,
        format!("max relative deviation {:.3e}", t.max_permutation),
    );

    let r = cube_shape_factor(8).map(|f| {
        let err = ((f + 1.0 / 3.0) / (1.0 / 3.0)).abs();
        (err <= 0.02, format!("mean Hx/ms = {f:.5} (want -1/3 within 2%)"))
    });
    report.push_result("cube shape factor", r);
    let n = if full { 64 } else { 32 };
    let r = film_central_field(n).map(|f| {
        (
            (-1.0..=-0.95).contains(&f),
            format!("central Hz/ms = {f:.5} on {n}x{n}x1 (want [-1, -0.95])"),
        )
    });
    report.push_result("film shape factor", r);

    let r = (|| -> Result<(bool, String)> {
        let g = Grid::new(5, 4, 3, 2.0)?;
        let p = MaterialParams::new(1.3e7, 800.0, 0.0, 0.5)?;
        let uniform = VectorField::<f64>::uniform(g, Vec3::new(300.0, -400.0, 500.0));
        let h = exchange_field(&uniform, &p, &g)?;
        let zero = h.max_abs() == 0.0;
        let m = random_magnetization::<f64>(g, p.ms, 3);
        let h = exchange_field(&m, &p, &g)?;
        let sums = [&h.x, &h.y, &h.z].map(|c| c.iter().sum::<f64>().abs());
        let rel = sums.iter().fold(0.0f64, |a, &b| a.max(b)) / (h.max_abs() * g.cells() as f64);
        Ok((
            zero && rel <= 1e-12,
            format!("uniform max |H| = {}, relative global sum {rel:.3e}", if zero { "0" } else { "nonzero" }),
        ))
    })();
    report.push_result("exchange stencil", r);

    report
}

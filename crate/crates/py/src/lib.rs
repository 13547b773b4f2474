//! Python bindings for the `janowski` crate.
//!
//! Reports are returned as JSON strings in the same format the CLI writes.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use janowski::inequalities::{check_coeff_inequality, check_lemma1, check_lemma2, GridSpec};
use janowski::output::to_json;
use janowski::search::{find_self_stability_violation, SearchGrid, SearchSpec};
use janowski::subordination::{
    check_stable_wrt_base, check_stable_wrt_self, mobius_image_disk, mobius_value, published_disk, CheckOptions,
    DiskSource, GFunction, SampleGrid,
};
use janowski::{CoeffMethod, Complex64, Error, RayOptions};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::BranchFailure { .. } | Error::Pole { .. } | Error::TooManyFailures { .. } => {
            PyArithmeticError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn method(name: &str) -> PyResult<CoeffMethod> {
    match name {
        "convolution" => Ok(CoeffMethod::Convolution),
        "recurrence" => Ok(CoeffMethod::Recurrence),
        _ => Err(PyValueError::new_err(format!("unknown method {name:?}"))),
    }
}

fn disk_source(name: &str) -> PyResult<DiskSource> {
    match name {
        "mobius_image" => Ok(DiskSource::MobiusImage),
        "published_formula" => Ok(DiskSource::PublishedFormula),
        _ => Err(PyValueError::new_err(format!("unknown disk source {name:?}"))),
    }
}

fn sample_grid(radii: Vec<f64>, samples: usize, points: Vec<Complex64>) -> PyResult<SampleGrid> {
    if radii.is_empty() {
        SampleGrid::points_only(points).map_err(to_py)
    } else {
        SampleGrid::new(radii, samples)
            .and_then(|g| g.with_points(points))
            .map_err(to_py)
    }
}

/// Parameters `(A, B, lambda)` with `-1 <= B < A <= 1`, `0 < lambda <= 1`.
#[pyclass(name = "JanowskiParams", frozen)]
pub struct PyParams {
    inner: janowski::JanowskiParams,
}

#[pymethods]
impl PyParams {
    #[new]
    fn new(a: f64, b: f64, lam: f64) -> PyResult<Self> {
        Ok(Self {
            inner: janowski::JanowskiParams::new(a, b, lam).map_err(to_py)?,
        })
    }

    #[getter(A)]
    fn a(&self) -> f64 {
        self.inner.a()
    }

    #[getter(B)]
    fn b(&self) -> f64 {
        self.inner.b()
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda()
    }

    /// `A <= 0`, the range where `v` is stable with respect to `(1 + B z)^-lambda`.
    fn in_base_stability_range(&self) -> bool {
        self.inner.in_base_stability_range()
    }

    #[pyo3(signature = (n_max, method = "recurrence"))]
    fn coefficients(&self, n_max: usize, method: &str) -> PyResult<Vec<f64>> {
        Ok(janowski::janowski::coefficients(&self.inner, n_max, self::method(method)?).into_values())
    }

    /// `G(z) = (1 + B z) s_n(z)^(1/lambda) / (1 + A z)`.
    fn g_value(&self, n: usize, z: Complex64) -> PyResult<Complex64> {
        GFunction::new(&self.inner, n, RayOptions::default()).eval(z).map_err(to_py)
    }

    /// `h(z) = 1 - G(z)`.
    fn h_value(&self, n: usize, z: Complex64) -> PyResult<Complex64> {
        GFunction::new(&self.inner, n, RayOptions::default()).h(z).map_err(to_py)
    }

    /// `H(z) = (1 + B z) / (1 + A z)`.
    fn mobius_value(&self, z: Complex64) -> PyResult<Complex64> {
        mobius_value(&self.inner, z).map_err(to_py)
    }

    /// `(center, radius)` of the image of `|z| <= r` under `H`.
    fn mobius_image_disk(&self, r: f64) -> PyResult<(f64, f64)> {
        let d = mobius_image_disk(&self.inner, r).map_err(to_py)?;
        Ok((d.center.re, d.radius))
    }

    /// `(center, radius)` from the published closed form.
    fn published_disk(&self, r: f64) -> PyResult<(f64, f64)> {
        let d = published_disk(&self.inner, r).map_err(to_py)?;
        Ok((d.center.re, d.radius))
    }

    /// JSON report of `|G(z) - 1| <= |B|` on the sample grid.
    #[pyo3(signature = (n, radii = vec![0.9, 0.99, 0.999], samples = 4096, points = vec![], tol = 1e-6, allow_outside = false))]
    fn check_stable_wrt_base(
        &self,
        n: usize,
        radii: Vec<f64>,
        samples: usize,
        points: Vec<Complex64>,
        tol: f64,
        allow_outside: bool,
    ) -> PyResult<String> {
        let grid = sample_grid(radii, samples, points)?;
        let opts = CheckOptions {
            allow_outside,
            ..CheckOptions::default()
        };
        let rep = check_stable_wrt_base(&self.inner, n, &grid, tol, &opts).map_err(to_py)?;
        Ok(to_json(&rep))
    }

    /// JSON report of `G(|z| <= r)` against the image disk of `H`.
    #[pyo3(signature = (n, r, disk_source = "mobius_image", radii = vec![0.9, 0.99, 0.999], samples = 4096, points = vec![], tol = 1e-6))]
    #[allow(clippy::too_many_arguments)]
    fn check_stable_wrt_self(
        &self,
        n: usize,
        r: f64,
        disk_source: &str,
        radii: Vec<f64>,
        samples: usize,
        points: Vec<Complex64>,
        tol: f64,
    ) -> PyResult<String> {
        let grid = sample_grid(radii, samples, points)?;
        let opts = CheckOptions {
            allow_outside: true,
            ..CheckOptions::default()
        };
        let rep = check_stable_wrt_self(&self.inner, n, r, &grid, self::disk_source(disk_source)?, tol, &opts)
            .map_err(to_py)?;
        Ok(to_json(&rep))
    }

    /// JSON list of positive-margin witnesses, by descending margin.
    #[pyo3(signature = (n_values, r, disk_source = "mobius_image", coarse_radii = 64, coarse_angles = 256, refine_iters = 40))]
    fn find_self_stability_violation(
        &self,
        n_values: Vec<usize>,
        r: f64,
        disk_source: &str,
        coarse_radii: usize,
        coarse_angles: usize,
        refine_iters: usize,
    ) -> PyResult<String> {
        let mut spec = SearchSpec::new(self.inner, n_values, r);
        spec.disk_source = self::disk_source(disk_source)?;
        spec.grid = SearchGrid {
            coarse_radii,
            coarse_angles,
            refine_iters,
        };
        let out = find_self_stability_violation(&spec).map_err(to_py)?;
        Ok(to_json(&out.violations))
    }

    /// Whether `a_n >= 0`, `(n+1) a_(n+1) + B n a_n > 0` and the two-index
    /// inequality hold at this point (tolerances 1e-12, 1e-12, 1e-10).
    #[pyo3(signature = (n_max = 500, m_max = 100))]
    fn verify_coefficient_inequalities(&self, n_max: usize, m_max: usize) -> bool {
        let grid = GridSpec::single(&self.inner, n_max, m_max);
        check_lemma1(&grid, 1e-12).passed()
            && check_coeff_inequality(&grid, 1e-12).passed()
            && check_lemma2(&grid, 1e-10).passed()
    }

    fn __repr__(&self) -> String {
        format!(
            "JanowskiParams(A={}, B={}, lam={})",
            self.inner.a(),
            self.inner.b(),
            self.inner.lambda()
        )
    }
}

#[pymodule]
fn janowski_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    Ok(())
}

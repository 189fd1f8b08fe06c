//! Local truncation error `ζ^j[v] = D3 v(t_j) - v'(t_j)` of the BDF3 quotient.

use crate::bdf3_kernels::{bdf3_apply, check_index, d_raw};
use crate::time_mesh::TimeMesh;
use crate::Result;

/// Minimum Simpson panels per step used by [`truncation_error_integral`].
pub const MIN_PANELS: usize = 64;

/// `ζ^j[v]` from nodal samples of `v` and the exact derivative, `3 <= j <= N`.
pub fn truncation_error_direct(
    v: impl Fn(f64) -> f64,
    dv: impl Fn(f64) -> f64,
    mesh: &TimeMesh,
    j: usize,
) -> Result<f64> {
    check_index(j, 3, mesh.len())?;
    let values: Vec<f64> = mesh.nodes()[..=j].iter().map(|&t| v(t)).collect();
    Ok(bdf3_apply(mesh, &values, j)? - dv(mesh.node(j)))
}

/// `ζ^j[v] = Σ_{i=j-2}^{j} (1/(6τ_i)) ∫_{t_{i-1}}^{t_i} K_{j,j-i}(t) v⁽⁴⁾(t) dt`
/// with the cubic Peano kernels
///
/// ```text
/// K_{j,0} = (d0 - r_j d1)(t_{j-1}-t)³ + r_j (d1 - r_{j-1} d2)(t_{j-2}-t)³ + r_j r_{j-1} d2 (t_{j-3}-t)³
/// K_{j,1} = (d1 - r_{j-1} d2)(t_{j-2}-t)³ + r_{j-1} d2 (t_{j-3}-t)³
/// K_{j,2} = d2 (t_{j-3}-t)³
/// ```
///
/// integrated by composite Simpson with `panels` (at least [`MIN_PANELS`]) per step.
pub fn truncation_error_integral(
    v4: impl Fn(f64) -> f64,
    mesh: &TimeMesh,
    j: usize,
    panels: usize,
) -> Result<f64> {
    check_index(j, 3, mesh.len())?;
    let panels = panels.max(MIN_PANELS).next_multiple_of(2);
    let (rj, rj1) = (mesh.ratio(j), mesh.ratio(j - 1));
    let d = d_raw(rj, rj1);
    let t = |k: usize| mesh.node(k);
    let cube = |a: f64, s: f64| (a - s).powi(3);

    let k0 = |s: f64| {
        (d.d0 - rj * d.d1) * cube(t(j - 1), s)
            + rj * (d.d1 - rj1 * d.d2) * cube(t(j - 2), s)
            + rj * rj1 * d.d2 * cube(t(j - 3), s)
    };
    let k1 = |s: f64| (d.d1 - rj1 * d.d2) * cube(t(j - 2), s) + rj1 * d.d2 * cube(t(j - 3), s);
    let k2 = |s: f64| d.d2 * cube(t(j - 3), s);

    let piece = |i: usize, kernel: &dyn Fn(f64) -> f64| {
        let (a, b) = (t(i - 1), t(i));
        simpson(|s| kernel(s) * v4(s), a, b, panels) / (6.0 * mesh.tau(i))
    };
    Ok(piece(j, &k0) + piece(j - 1, &k1) + piece(j - 2, &k2))
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

use crate::error::{Error, Result};
use crate::grid::{differentiate_uniform, SpatialGrid1D};

use super::density::DensityField;

/// Relative density below which a point leaves the evaluation region.
pub const DEFAULT_DENSITY_FLOOR: f64 = 1e-10;
/// Interior density minima at or below this fraction of the peak are nodes.
pub const DEFAULT_NODE_RATIO: f64 = 1e-3;
/// A node is removable when the inner integral there is at most this
/// fraction of its largest magnitude.
pub const DEFAULT_REMOVABLE_TOL: f64 = 1e-4;

/// Where the nested integrals start.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Reference {
    /// The grid edge with the smaller density.
    #[default]
    Auto,
    LeftEdge,
    RightEdge,
    At(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityOptions {
    pub floor: f64,
    pub node_ratio: f64,
    pub removable_tol: f64,
    pub reference: Reference,
}

impl Default for ContinuityOptions {
    fn default() -> Self {
        Self {
            floor: DEFAULT_DENSITY_FLOOR,
            node_ratio: DEFAULT_NODE_RATIO,
            removable_tol: DEFAULT_REMOVABLE_TOL,
            reference: Reference::Auto,
        }
    }
}

/// A density node found inside the evaluation region whose inner integral
/// vanishes, so the phase gradient stays finite through it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeReport {
    pub position: f64,
    /// `rho(node) / max rho`
    pub density_ratio: f64,
    /// `|I(node)| / max |I|` for the inner integral `I`
    pub integral_ratio: f64,
}

/// Phase on one time slice. Values outside the evaluation region are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    pub phi: Vec<f64>,
    pub region: Vec<bool>,
    /// Position `x*` the integrals start from.
    pub reference: f64,
    /// Grid index where `phi = 0`.
    pub anchor: usize,
    pub nodes: Vec<NodeReport>,
}

impl PhaseProfile {
    /// Spatial gradient on the region.
    pub fn gradient(&self, grid: &SpatialGrid1D<f64>) -> Vec<f64> {
        masked_gradient(&self.phi, grid.spacing())
    }
}

/// Phase from the continuity equation at mesh index `k`:
/// `phi(x) = m int_{x*}^x dx1 [int_{x*}^{x1} d rho/dt] / rho(x1)`.
pub fn phase_from_continuity_1d(
    density: &DensityField,
    k: usize,
    mass: f64,
    options: &ContinuityOptions,
) -> Result<PhaseProfile> {
    if k >= density.mesh().len() {
        return Err(Error::invalid(format!("time index {k} outside the mesh")));
    }
    phase_from_slices(density.grid(), density.density(k), density.rate(k), mass, options)
}

/// Same as [`phase_from_continuity_1d`] on raw slices.
pub fn phase_from_slices(
    grid: &SpatialGrid1D<f64>,
    rho: &[f64],
    rate: &[f64],
    mass: f64,
    options: &ContinuityOptions,
) -> Result<PhaseProfile> {
    let n = grid.len();
    if rho.len() != n || rate.len() != n {
        return Err(Error::invalid("slice length differs from grid"));
    }
    if !(mass > 0.0) {
        return Err(Error::invalid(format!("mass must be positive (got {mass})")));
    }
    if !(options.floor > 0.0 && options.floor < 1.0) || !(options.node_ratio >= options.floor) {
        return Err(Error::invalid("density floor must lie in (0, 1) and not exceed the node ratio"));
    }
    let peak = rho.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::DegenerateState("density vanishes everywhere".into()));
    }
    let dx = grid.spacing();
    let threshold = options.floor * peak;
    let above: Vec<bool> = rho.iter().map(|&r| r > threshold).collect();
    let first = above.iter().position(|&b| b).unwrap();
    let last = above.iter().rposition(|&b| b).unwrap();
    if last < first + 2 {
        return Err(Error::invalid("evaluation region has fewer than three points"));
    }

    let start = match options.reference {
        Reference::LeftEdge => 0,
        Reference::RightEdge => n - 1,
        Reference::Auto => {
            if rho[n - 1] < rho[0] {
                n - 1
            } else {
                0
            }
        }
        Reference::At(x) => {
            if !(x >= grid.x_min() && x <= grid.x_max()) {
                return Err(Error::invalid(format!("reference point {x} outside the grid")));
            }
            grid.nearest_index(x)
        }
    };

    let mut inner = cumulative_from(rate, start, dx);
    let candidates = find_nodes(rho, &above, first, last, peak, options.node_ratio);
    let mut nodes = Vec::with_capacity(candidates.len());
    let mut excluded = vec![false; n];
    if !candidates.is_empty() {
        // Euler-Maclaurin end correction: the classification compares
        // I(node) with zero, so the O(dx^2) trapezoid bias matters here.
        let slope = differentiate_uniform(rate, dx);
        for (i, v) in inner.iter_mut().enumerate() {
            *v -= dx * dx / 12.0 * (slope[i] - slope[start]);
        }
        let scale = (first..=last).map(|i| inner[i].abs()).fold(0.0, f64::max);
        for &j in &candidates {
            let density_ratio = rho[j] / peak;
            let integral_ratio = if scale > 0.0 { inner[j].abs() / scale } else { 0.0 };
            if integral_ratio > options.removable_tol {
                return Err(Error::NodeSingularity {
                    position: grid.point(j),
                    detail: format!(
                        "density ratio {density_ratio:.2e} with inner integral ratio {integral_ratio:.2e}; \
                         the current does not vanish at the node"
                    ),
                });
            }
            nodes.push(NodeReport { position: grid.point(j), density_ratio, integral_ratio });
            let cut = options.removable_tol * peak;
            let mut lo = j;
            while lo > first && rho[lo - 1] < cut {
                lo -= 1;
            }
            let mut hi = j;
            while hi < last && rho[hi + 1] < cut {
                hi += 1;
            }
            for e in excluded.iter_mut().take(hi + 1).skip(lo) {
                *e = true;
            }
        }
    }

    let mut q = vec![f64::NAN; n];
    for i in first..=last {
        if !excluded[i] && above[i] {
            q[i] = inner[i] / rho[i];
        }
    }
    bridge_gaps(&mut q, first, last)?;

    let anchor = start.clamp(first, last);
    let mut phi = vec![f64::NAN; n];
    phi[anchor] = 0.0;
    for i in anchor + 1..=last {
        phi[i] = phi[i - 1] + 0.5 * mass * dx * (q[i - 1] + q[i]);
    }
    for i in (first..anchor).rev() {
        phi[i] = phi[i + 1] - 0.5 * mass * dx * (q[i] + q[i + 1]);
    }
    let region = (0..n).map(|i| i >= first && i <= last).collect();
    Ok(PhaseProfile { phi, region, reference: grid.point(start), anchor, nodes })
}

fn cumulative_from(values: &[f64], start: usize, dx: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    for i in start + 1..n {
        out[i] = out[i - 1] + 0.5 * dx * (values[i - 1] + values[i]);
    }
    for i in (0..start).rev() {
        out[i] = out[i + 1] - 0.5 * dx * (values[i] + values[i + 1]);
    }
    out
}

/// Indices of nodes between `first` and `last`: the minimum of every run
/// below the floor, plus shallow interior minima below `node_ratio`.
fn find_nodes(rho: &[f64], above: &[bool], first: usize, last: usize, peak: f64, node_ratio: f64) -> Vec<usize> {
    let mut nodes = Vec::new();
    let mut i = first + 1;
    while i < last {
        if !above[i] {
            let mut j = i;
            let mut arg = i;
            while j < last && !above[j] {
                if rho[j] < rho[arg] {
                    arg = j;
                }
                j += 1;
            }
            nodes.push(arg);
            i = j;
        } else {
            if rho[i] <= node_ratio * peak && rho[i] <= rho[i - 1] && rho[i] < rho[i + 1] {
                nodes.push(i);
            }
            i += 1;
        }
    }
    nodes
}

/// Linear interpolation across NaN runs strictly inside `[first, last]`.
fn bridge_gaps(q: &mut [f64], first: usize, last: usize) -> Result<()> {
    if q[first].is_nan() || q[last].is_nan() {
        return Err(Error::NodeSingularity {
            position: f64::NAN,
            detail: "node touches the edge of the evaluation region".into(),
        });
    }
    let mut i = first;
    while i <= last {
        if q[i].is_nan() {
            let lo = i - 1;
            let mut hi = i;
            while q[hi].is_nan() {
                hi += 1;
            }
            let span = (hi - lo) as f64;
            for j in lo + 1..hi {
                let w = (j - lo) as f64 / span;
                q[j] = (1.0 - w) * q[lo] + w * q[hi];
            }
            i = hi;
        }
        i += 1;
    }
    Ok(())
}

/// Derivative of samples that are NaN outside a region: central inside,
/// second-order one-sided at region edges, NaN where fewer than three
/// finite neighbours exist.
pub fn masked_gradient(values: &[f64], step: f64) -> Vec<f64> {
    let n = values.len();
    let ok = |i: isize| i >= 0 && (i as usize) < n && values[i as usize].is_finite();
    (0..n as isize)
        .map(|i| {
            if !ok(i) {
                f64::NAN
            } else if ok(i - 1) && ok(i + 1) {
                (values[(i + 1) as usize] - values[(i - 1) as usize]) / (2.0 * step)
            } else if ok(i + 1) && ok(i + 2) {
                let (a, b, c) = (values[i as usize], values[(i + 1) as usize], values[(i + 2) as usize]);
                (-3.0 * a + 4.0 * b - c) / (2.0 * step)
            } else if ok(i - 1) && ok(i - 2) {
                let (a, b, c) = (values[i as usize], values[(i - 1) as usize], values[(i - 2) as usize]);
                (3.0 * a - 4.0 * b + c) / (2.0 * step)
            } else {
                f64::NAN
            }
        })
        .collect()
}

/// Relative L2 norm of `d rho/dt - (1/m) d/dx (rho d phi/dx)` over interior
/// points of the region `rho > floor * max rho`.
pub fn continuity_residual_1d(
    grid: &SpatialGrid1D<f64>,
    rho: &[f64],
    rate: &[f64],
    phi: &[f64],
    mass: f64,
    floor: f64,
) -> Result<f64> {
    let n = grid.len();
    if rho.len() != n || rate.len() != n || phi.len() != n {
        return Err(Error::invalid("field lengths differ from grid"));
    }
    let dx = grid.spacing();
    let peak = rho.iter().cloned().fold(0.0, f64::max);
    let inside = |i: usize| rho[i] > floor * peak && phi[i].is_finite();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut count = 0;
    for i in 1..n - 1 {
        if !(inside(i - 1) && inside(i) && inside(i + 1)) {
            continue;
        }
        let right = 0.5 * (rho[i] + rho[i + 1]) * (phi[i + 1] - phi[i]) / dx;
        let left = 0.5 * (rho[i - 1] + rho[i]) * (phi[i] - phi[i - 1]) / dx;
        let r = rate[i] - (right - left) / (dx * mass);
        num += r * r;
        den += rate[i] * rate[i];
        count += 1;
    }
    if count == 0 {
        return Err(Error::invalid("no interior points in the evaluation region"));
    }
    if den == 0.0 {
        return Ok(num.sqrt());
    }
    Ok((num / den).sqrt())
}

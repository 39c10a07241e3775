use crate::error::{Error, Result};
use crate::grid::{SpatialGrid1D, TimeMesh};

use super::continuity::{masked_gradient, phase_from_continuity_1d, ContinuityOptions, NodeReport};
use super::density::DensityField;

/// Whether a driver is tied to one eigenstate or works for every bound
/// state of the family (up to a time-dependent energy shift).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateDependence {
    StateSpecific,
    StateIndependentUpToShift,
}

/// Phase `phi(x, t)` and potential `V(x, t)` of a unitary deformation on a
/// grid and mesh. NaN marks points outside the evaluation region.
#[derive(Debug, Clone)]
pub struct DeformationField {
    pub grid: SpatialGrid1D<f64>,
    pub mesh: TimeMesh<f64>,
    pub phase: Vec<Vec<f64>>,
    pub potential: Vec<Vec<f64>>,
    /// Reference point `x*` used at each mesh time.
    pub reference: Vec<f64>,
    pub floor: f64,
    pub dependence: StateDependence,
    /// Removable nodes passed through, with their mesh index.
    pub nodes: Vec<(usize, NodeReport)>,
}

impl DeformationField {
    /// `V(., t_k)` minus its mean over the finite samples.
    pub fn centered_potential(&self, k: usize) -> Vec<f64> {
        mean_subtracted(&self.potential[k], None)
    }
}

/// `V = d phi/dt - (d phi/dx)^2 / 2m` with central differences in time and
/// space. `phases[k]` is the phase at mesh time `k`.
pub fn potential_from_phase_1d(
    grid: &SpatialGrid1D<f64>,
    mesh: &TimeMesh<f64>,
    phases: &[Vec<f64>],
    mass: f64,
) -> Result<Vec<Vec<f64>>> {
    if phases.len() < 3 {
        return Err(Error::invalid(format!(
            "need at least three time samples of the phase (got {})",
            phases.len()
        )));
    }
    if phases.len() != mesh.len() {
        return Err(Error::invalid("need one phase slice per mesh time"));
    }
    if phases.iter().any(|p| p.len() != grid.len()) {
        return Err(Error::invalid("phase slice length differs from grid"));
    }
    let mut rates = vec![vec![0.0; grid.len()]; mesh.len()];
    let mut column = vec![0.0; mesh.len()];
    for i in 0..grid.len() {
        for (k, c) in column.iter_mut().enumerate() {
            *c = phases[k][i];
        }
        for (k, d) in masked_gradient(&column, mesh.dt()).into_iter().enumerate() {
            rates[k][i] = d;
        }
    }
    phases
        .iter()
        .zip(&rates)
        .map(|(p, r)| potential_from_phase_analytic(grid, p, r, mass))
        .collect()
}

/// Single-slice potential when `d phi/dt` is known.
pub fn potential_from_phase_analytic(
    grid: &SpatialGrid1D<f64>,
    phase: &[f64],
    phase_rate: &[f64],
    mass: f64,
) -> Result<Vec<f64>> {
    if phase.len() != grid.len() || phase_rate.len() != grid.len() {
        return Err(Error::invalid("phase length differs from grid"));
    }
    if !(mass > 0.0) {
        return Err(Error::invalid(format!("mass must be positive (got {mass})")));
    }
    let grad = masked_gradient(phase, grid.spacing());
    Ok(grad
        .iter()
        .zip(phase_rate)
        .map(|(g, r)| r - g * g / (2.0 * mass))
        .collect())
}

/// Subtracts the mean over finite entries (restricted to `mask` if given).
pub fn mean_subtracted(values: &[f64], mask: Option<&[bool]>) -> Vec<f64> {
    let keep = |i: usize| values[i].is_finite() && mask.map_or(true, |m| m[i]);
    let (sum, count) = (0..values.len())
        .filter(|&i| keep(i))
        .fold((0.0, 0usize), |(s, c), i| (s + values[i], c + 1));
    let mean = if count > 0 { sum / count as f64 } else { 0.0 };
    (0..values.len())
        .map(|i| if keep(i) { values[i] - mean } else { f64::NAN })
        .collect()
}

/// Runs the continuity route at every mesh time and derives the potential.
pub fn deformation_from_density(
    density: &DensityField,
    mass: f64,
    options: &ContinuityOptions,
) -> Result<DeformationField> {
    let mesh = *density.mesh();
    let mut phase = Vec::with_capacity(mesh.len());
    let mut reference = Vec::with_capacity(mesh.len());
    let mut nodes = Vec::new();
    for k in 0..mesh.len() {
        let p = phase_from_continuity_1d(density, k, mass, options)?;
        reference.push(p.reference);
        nodes.extend(p.nodes.iter().map(|n| (k, *n)));
        phase.push(p.phi);
    }
    let potential = potential_from_phase_1d(density.grid(), &mesh, &phase, mass)?;
    Ok(DeformationField {
        grid: *density.grid(),
        mesh,
        phase,
        potential,
        reference,
        floor: options.floor,
        dependence: StateDependence::StateSpecific,
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deform1d::density::Profile;
    use crate::schedule::{Schedule, Smoothstep};

    #[test]
    fn zero_phase_zero_potential() {
        let grid = SpatialGrid1D::<f64>::new(-1.0, 1.0, 21).unwrap();
        let mesh = TimeMesh::<f64>::new(0.0, 1.0, 4).unwrap();
        let v = potential_from_phase_1d(&grid, &mesh, &vec![vec![0.0; 21]; 5], 1.0).unwrap();
        assert!(v.iter().flatten().all(|x| *x == 0.0));
        assert!(potential_from_phase_1d(&grid, &mesh, &vec![vec![0.0; 21]; 2], 1.0).is_err());
    }

    #[test]
    fn linear_phase_gives_force_term() {
        // phi = -m x0_dot (x - x0) -> V = -m x0_ddot (x - x0) + m x0_dot^2 / 2
        let grid = SpatialGrid1D::<f64>::new(-3.0, 3.0, 61).unwrap();
        let mesh = TimeMesh::<f64>::new(0.0, 1.0, 1000).unwrap();
        let x0 = Smoothstep::<f64>::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let m = 2.0;
        let phases: Vec<Vec<f64>> = mesh
            .times()
            .iter()
            .map(|&t| {
                let (c, v, _) = x0.jet(t);
                grid.points().iter().map(|&x| -m * v * (x - c)).collect()
            })
            .collect();
        let pot = potential_from_phase_1d(&grid, &mesh, &phases, m).unwrap();
        for k in [100, 333, 700] {
            let (c, v, a) = x0.jet(mesh.time(k));
            for (i, x) in grid.points().into_iter().enumerate() {
                let expected = -m * a * (x - c) + 0.5 * m * v * v;
                assert!((pot[k][i] - expected).abs() < 1e-4 * expected.abs().max(1.0), "k {k} x {x} got {} want {expected}", pot[k][i]);
            }
        }
    }

    #[test]
    fn constant_gauge_shift_only_moves_mean() {
        let grid = SpatialGrid1D::<f64>::new(-3.0, 3.0, 61).unwrap();
        let mesh = TimeMesh::<f64>::new(0.0, 1.0, 50).unwrap();
        let base: Vec<Vec<f64>> = mesh
            .times()
            .iter()
            .map(|&t: &f64| grid.points().iter().map(|&x| (t * x).sin() + x * x * t).collect())
            .collect();
        let shifted: Vec<Vec<f64>> = base
            .iter()
            .zip(mesh.times())
            .map(|(p, t)| p.iter().map(|v| v + 3.0 * t * t + 1.0).collect())
            .collect();
        let a = potential_from_phase_1d(&grid, &mesh, &base, 1.0).unwrap();
        let b = potential_from_phase_1d(&grid, &mesh, &shifted, 1.0).unwrap();
        for k in 0..mesh.len() {
            let ca = mean_subtracted(&a[k], None);
            let cb = mean_subtracted(&b[k], None);
            for (x, y) in ca.iter().zip(&cb) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn continuity_route_reproduces_transport_force() {
        let grid = SpatialGrid1D::<f64>::new(-10.0, 10.0, 2001).unwrap();
        let mesh = TimeMesh::<f64>::new(0.0, 2.0, 200).unwrap();
        let x0 = Smoothstep::<f64>::new(0.0, 1.0, 0.0, 2.0).unwrap();
        let d = DensityField::transport(grid, mesh, Profile::Gaussian, &x0).unwrap();
        let f = deformation_from_density(&d, 1.0, &ContinuityOptions::default()).unwrap();
        let peak = 1.0 / std::f64::consts::PI.sqrt();
        for k in [30, 100, 170] {
            let (_, _, a) = x0.jet(mesh.time(k));
            let mask: Vec<bool> = d.density(k).iter().map(|r| *r > 1e-6 * peak).collect();
            let got = mean_subtracted(&f.potential[k], Some(&mask));
            let exact: Vec<f64> = grid.points().iter().map(|&x| -a * x).collect();
            let exact = mean_subtracted(&exact, Some(&mask));
            for i in (0..grid.len()).filter(|&i| mask[i]) {
                assert!((got[i] - exact[i]).abs() < 1e-3, "k {k} x {}", grid.point(i));
            }
        }
    }
}

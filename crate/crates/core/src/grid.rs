//! Discretization substrate: uniform node-centered grids, real/complex
//! fields, trapezoid quadrature, boundary derivative stencils and the
//! support-guard machinery for boxes standing in for unbounded domains.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform node-centered 1-D grid on `[x_min, x_max]`.
///
/// `dx = (x_max - x_min) / (n_points - 1)`; both endpoints are nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::invalid("grid bounds must be finite"));
        }
        if x_min >= x_max {
            return Err(Error::invalid(format!(
                "grid requires x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < 8 {
            return Err(Error::invalid(format!(
                "grid requires at least 8 points, got {n_points}"
            )));
        }
        Ok(Grid1D {
            x_min,
            x_max,
            n_points,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.x(i))
    }

    /// Index of the node sitting at `x`, if there is one (to 1e-9·dx).
    pub fn node_at(&self, x: f64) -> Option<usize> {
        let t = (x - self.x_min) / self.dx();
        let i = t.round();
        if i < 0.0 || i >= self.n_points as f64 {
            return None;
        }
        if (t - i).abs() <= 1e-9 {
            Some(i as usize)
        } else {
            None
        }
    }
}

/// Marker for sample types a field can carry.
pub trait Sample: Copy + Default + std::ops::Add<Output = Self> + std::ops::Mul<f64, Output = Self> {
    fn zero() -> Self;
    /// |value|^2, the pointwise probability weight.
    fn abs_sq(self) -> f64;
}

impl Sample for f64 {
    fn zero() -> Self {
        0.0
    }
    fn abs_sq(self) -> f64 {
        self * self
    }
}

impl Sample for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn abs_sq(self) -> f64 {
        self.norm_sqr()
    }
}

/// Samples of a density or wave function on a [`Grid1D`].
///
/// Fields are values: every operation returns a fresh field and never
/// mutates its input through shared state.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid1D,
    values: Vec<T>,
}

pub type RealField = Field<f64>;
pub type ComplexField = Field<Complex64>;

impl<T: Sample> Field<T> {
    pub fn new(grid: Grid1D, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::invalid(format!(
                "field length {} does not match grid ({} points)",
                values.len(),
                grid.n_points()
            )));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Field {
            grid,
            values: vec![T::zero(); grid.n_points()],
        }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> T) -> Self {
        let values = grid.xs().map(f).collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }
}

/// Where a domain wall comes from: a genuine measured-region boundary or
/// an artificial truncation of an unbounded domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WallKind {
    /// Boundary of the unmeasured region D; Dirichlet data is physical here.
    Physical,
    /// Far wall of the finite box standing in for an unbounded side;
    /// subject to the support guard.
    Artificial,
}

/// One boundary point of D with its outward normal sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub x: f64,
    pub node: usize,
    /// Outer normal direction: -1 at the left wall, +1 at the right wall.
    pub outward: f64,
    pub kind: WallKind,
}

/// The unmeasured region D = [a, b] embedded in a grid whose extent is the
/// truncation box. Boundary points sit exactly on nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    lo: usize,
    hi: usize,
    left_kind: WallKind,
    right_kind: WallKind,
}

impl DomainSpec {
    /// D = [a, b] with both walls physical. `a`, `b` must lie on nodes.
    pub fn interval(grid: Grid1D, a: f64, b: f64) -> Result<Self> {
        Self::with_walls(grid, a, b, WallKind::Physical, WallKind::Physical)
    }

    /// D covering the whole grid box with no measured complement
    /// (both walls artificial).
    pub fn whole_box(grid: Grid1D) -> Self {
        DomainSpec {
            lo: 0,
            hi: grid.n_points() - 1,
            left_kind: WallKind::Artificial,
            right_kind: WallKind::Artificial,
        }
    }

    /// Half-line D = (-inf, b] truncated at the grid's left edge, which is
    /// flagged artificial and guarded.
    pub fn half_line_left(grid: Grid1D, b: f64) -> Result<Self> {
        Self::with_walls(
            grid,
            grid.x_min(),
            b,
            WallKind::Artificial,
            WallKind::Physical,
        )
    }

    pub fn with_walls(
        grid: Grid1D,
        a: f64,
        b: f64,
        left_kind: WallKind,
        right_kind: WallKind,
    ) -> Result<Self> {
        if a >= b {
            return Err(Error::domain(format!("empty interior: [{a}, {b}]")));
        }
        let lo = grid
            .node_at(a)
            .ok_or_else(|| Error::domain(format!("boundary {a} is not on a grid node")))?;
        let hi = grid
            .node_at(b)
            .ok_or_else(|| Error::domain(format!("boundary {b} is not on a grid node")))?;
        if hi <= lo + 1 {
            return Err(Error::domain("domain must contain interior nodes".into()));
        }
        Ok(DomainSpec {
            lo,
            hi,
            left_kind,
            right_kind,
        })
    }

    pub fn lo_node(&self) -> usize {
        self.lo
    }

    pub fn hi_node(&self) -> usize {
        self.hi
    }

    pub fn a(&self, grid: &Grid1D) -> f64 {
        grid.x(self.lo)
    }

    pub fn b(&self, grid: &Grid1D) -> f64 {
        grid.x(self.hi)
    }

    /// True when the measured complement is empty (D fills the box).
    pub fn omega_empty(&self, grid: &Grid1D) -> bool {
        self.lo == 0 && self.hi == grid.n_points() - 1
    }

    /// Physical boundary points with outward normals. Artificial walls are
    /// not boundaries of D and carry no flux.
    pub fn boundary_points(&self, grid: &Grid1D) -> Vec<BoundaryPoint> {
        let mut pts = Vec::with_capacity(2);
        if self.left_kind == WallKind::Physical {
            pts.push(BoundaryPoint {
                x: grid.x(self.lo),
                node: self.lo,
                outward: -1.0,
                kind: WallKind::Physical,
            });
        }
        if self.right_kind == WallKind::Physical {
            pts.push(BoundaryPoint {
                x: grid.x(self.hi),
                node: self.hi,
                outward: 1.0,
                kind: WallKind::Physical,
            });
        }
        pts
    }

    pub fn left_kind(&self) -> WallKind {
        self.left_kind
    }

    pub fn right_kind(&self) -> WallKind {
        self.right_kind
    }

    fn check_grid(&self, grid: &Grid1D) -> Result<()> {
        if self.hi >= grid.n_points() {
            return Err(Error::domain(format!(
                "domain nodes {}..{} outside grid with {} points",
                self.lo,
                self.hi,
                grid.n_points()
            )));
        }
        Ok(())
    }
}

/// Inter-observation lattice: observations at `dt, 2 dt, ..., n_steps * dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationSchedule {
    pub dt: f64,
    pub n_steps: usize,
    pub renormalize: bool,
}

impl ObservationSchedule {
    pub fn new(dt: f64, n_steps: usize, renormalize: bool) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        if n_steps < 1 {
            return Err(Error::invalid("schedule needs at least one step"));
        }
        Ok(ObservationSchedule {
            dt,
            n_steps,
            renormalize,
        })
    }

    pub fn total_time(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }
}

/// Composite trapezoid quadrature of `field` over `region`.
pub fn integrate<T: Sample>(field: &Field<T>, region: &DomainSpec) -> Result<T> {
    region.check_grid(&field.grid())?;
    let v = field.values();
    let (lo, hi) = (region.lo_node(), region.hi_node());
    let mut acc = v[lo] * 0.5 + v[hi] * 0.5;
    for &x in &v[lo + 1..hi] {
        acc = acc + x;
    }
    Ok(acc * field.grid().dx())
}

/// Trapezoid quadrature of |field|^2 over `region` — the probability mass
/// for wave functions, the plain second moment of values for densities.
pub fn probability_mass<T: Sample>(field: &Field<T>, region: &DomainSpec) -> Result<f64> {
    region.check_grid(&field.grid())?;
    let v = field.values();
    let (lo, hi) = (region.lo_node(), region.hi_node());
    let mut acc = 0.5 * (v[lo].abs_sq() + v[hi].abs_sq());
    for &x in &v[lo + 1..hi] {
        acc += x.abs_sq();
    }
    Ok(acc * field.grid().dx())
}

/// Trapezoid mass over the whole box.
pub fn total_mass(field: &RealField) -> f64 {
    let v = field.values();
    let n = v.len();
    let inner: f64 = v[1..n - 1].iter().sum();
    (inner + 0.5 * (v[0] + v[n - 1])) * field.grid().dx()
}

/// L2 norm of a complex field over the whole box.
pub fn l2_norm(field: &ComplexField) -> f64 {
    let v = field.values();
    let n = v.len();
    let inner: f64 = v[1..n - 1].iter().map(|z| z.norm_sqr()).sum();
    ((inner + 0.5 * (v[0].norm_sqr() + v[n - 1].norm_sqr())) * field.grid().dx()).sqrt()
}

/// One-sided three-point (second order) normal derivative at each physical
/// boundary point, taken in the outward direction.
pub fn boundary_normal_derivative<T: Sample>(
    field: &Field<T>,
    domain: &DomainSpec,
) -> Result<Vec<(BoundaryPoint, T)>> {
    domain.check_grid(&field.grid())?;
    let v = field.values();
    let dx = field.grid().dx();
    let mut out = Vec::new();
    for bp in domain.boundary_points(&field.grid()) {
        let i = bp.node;
        let d = if bp.outward < 0.0 {
            // left wall: forward stencil for f'(x_i), outward is -x
            (v[i] * -3.0 + v[i + 1] * 4.0 + v[i + 2] * -1.0) * (-1.0 / (2.0 * dx))
        } else {
            (v[i] * 3.0 + v[i - 1] * -4.0 + v[i - 2] * 1.0) * (1.0 / (2.0 * dx))
        };
        out.push((bp, d));
    }
    Ok(out)
}

/// Assert that the mass within `margin` of each artificial wall stays below
/// `threshold`. Detects fields reaching the truncation box edge.
pub fn support_guard<T: Sample>(
    field: &Field<T>,
    domain: &DomainSpec,
    margin: f64,
    threshold: f64,
    context: &'static str,
) -> Result<()> {
    let grid = field.grid();
    let dx = grid.dx();
    let m = (margin / dx).round() as usize;
    let v = field.values();
    let mut guard_mass = 0.0;
    if domain.left_kind() == WallKind::Artificial {
        let end = m.min(v.len());
        guard_mass += v[..end].iter().map(|x| x.abs_sq()).sum::<f64>() * dx;
    }
    if domain.right_kind() == WallKind::Artificial {
        let start = v.len().saturating_sub(m);
        guard_mass += v[start..].iter().map(|x| x.abs_sq()).sum::<f64>() * dx;
    }
    if guard_mass > threshold {
        return Err(Error::SupportGuard {
            context,
            mass: guard_mass,
            threshold,
        });
    }
    Ok(())
}

/// Multiply by the indicator of D. Nodes strictly inside Omega are zeroed;
/// a node sitting exactly on the boundary keeps half its value (midpoint
/// convention for the sampled step function).
pub fn truncate_to_domain<T: Sample>(field: &Field<T>, domain: &DomainSpec) -> Field<T> {
    let grid = field.grid();
    let mut values = field.values().to_vec();
    if domain.left_kind() == WallKind::Physical {
        for v in &mut values[..domain.lo_node()] {
            *v = T::zero();
        }
        values[domain.lo_node()] = values[domain.lo_node()] * 0.5;
    }
    if domain.right_kind() == WallKind::Physical {
        for v in &mut values[domain.hi_node() + 1..] {
            *v = T::zero();
        }
        values[domain.hi_node()] = values[domain.hi_node()] * 0.5;
    }
    Field { grid, values }
}

/// Default support-guard threshold on mass at the artificial walls.
pub const GUARD_THRESHOLD: f64 = 1e-8;

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_basics() {
        let g = Grid1D::new(0.0, 1.0, 101).unwrap();
        assert!((g.dx() - 0.01).abs() < 1e-15);
        assert_eq!(g.node_at(0.5), Some(50));
        assert_eq!(g.node_at(0.505), None);
        assert!(Grid1D::new(1.0, 0.0, 50).is_err());
        assert!(Grid1D::new(0.0, 1.0, 4).is_err());
    }

    #[test]
    fn integrate_constant_is_exact() {
        let g = Grid1D::new(0.0, 1.0, 101).unwrap();
        let f = RealField::from_fn(g, |_| 1.0);
        let d = DomainSpec::whole_box(g);
        assert!((integrate(&f, &d).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn integrate_sine_second_order() {
        // analytic: int_0^pi sin = 2
        let mut errs = Vec::new();
        for n in [129usize, 257, 513] {
            let g = Grid1D::new(0.0, PI, n).unwrap();
            let f = RealField::from_fn(g, f64::sin);
            let d = DomainSpec::whole_box(g);
            errs.push((integrate(&f, &d).unwrap() - 2.0).abs());
        }
        assert!(errs[0] < 2.0 * (PI / 128.0_f64).powi(2));
        // halving dx quarters the error
        assert!(errs[0] / errs[1] > 3.5);
        assert!(errs[1] / errs[2] > 3.5);
    }

    #[test]
    fn integrate_zero_field() {
        let g = Grid1D::new(0.0, 1.0, 33).unwrap();
        let f = RealField::zeros(g);
        let d = DomainSpec::whole_box(g);
        assert_eq!(integrate(&f, &d).unwrap(), 0.0);
    }

    #[test]
    fn integrate_subregion() {
        let g = Grid1D::new(0.0, 2.0, 201).unwrap();
        let f = RealField::from_fn(g, |_| 3.0);
        let d = DomainSpec::interval(g, 0.0, 1.0).unwrap();
        assert!((integrate(&f, &d).unwrap() - 3.0).abs() < 1e-13);
    }

    #[test]
    fn domain_off_node_rejected() {
        let g = Grid1D::new(0.0, PI, 513).unwrap();
        assert!(DomainSpec::interval(g, 0.1234, 2.0).is_err());
        assert!(DomainSpec::interval(g, 0.0, PI).is_ok());
    }

    #[test]
    fn boundary_derivative_sine() {
        // f = sin(x)/2 on [0, pi]: f' = cos(x)/2, outward derivative -1/2
        // at both walls.
        let g = Grid1D::new(0.0, PI, 513).unwrap();
        let f = RealField::from_fn(g, |x| 0.5 * x.sin());
        let d = DomainSpec::interval(g, 0.0, PI).unwrap();
        let ds = boundary_normal_derivative(&f, &d).unwrap();
        assert_eq!(ds.len(), 2);
        let tol = 2.0 * g.dx() * g.dx();
        for (_, v) in ds {
            assert!((v - (-0.5)).abs() < tol, "got {v}");
        }
    }

    #[test]
    fn boundary_derivative_zero_and_hump() {
        let g = Grid1D::new(0.0, PI, 257).unwrap();
        let d = DomainSpec::interval(g, 0.0, PI).unwrap();
        let z = RealField::zeros(g);
        for (_, v) in boundary_normal_derivative(&z, &d).unwrap() {
            assert_eq!(v, 0.0);
        }
        // compactly supported hump away from the walls
        let h = RealField::from_fn(g, |x| {
            let t = (x - PI / 2.0) / 0.3;
            if t.abs() < 1.0 {
                (1.0 - t * t).powi(4)
            } else {
                0.0
            }
        });
        for (_, v) in boundary_normal_derivative(&h, &d).unwrap() {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_derivative_convergence_rate() {
        let mut errs = Vec::new();
        for n in [65usize, 129, 257] {
            let g = Grid1D::new(0.0, PI, n).unwrap();
            let f = RealField::from_fn(g, |x| (1.3 * x).sin());
            let d = DomainSpec::interval(g, 0.0, PI).unwrap();
            let ds = boundary_normal_derivative(&f, &d).unwrap();
            // left wall: outward = -1, f'(0) = 1.3 => normal derivative -1.3
            let (_, v) = ds[0];
            errs.push((v + 1.3).abs());
        }
        assert!(errs[0] / errs[1] > 3.5);
        assert!(errs[1] / errs[2] > 3.5);
    }

    #[test]
    fn truncation_midpoint_convention() {
        let g = Grid1D::new(-1.0, 1.0, 201).unwrap();
        let d = DomainSpec::interval(g, -0.5, 0.5).unwrap();
        let f = RealField::from_fn(g, |_| 2.0);
        let t = truncate_to_domain(&f, &d);
        let i_lo = d.lo_node();
        assert_eq!(t.values()[i_lo - 1], 0.0);
        assert_eq!(t.values()[i_lo], 1.0);
        assert_eq!(t.values()[i_lo + 1], 2.0);
    }

    #[test]
    fn support_guard_trips() {
        let g = Grid1D::new(-10.0, 0.0, 1001).unwrap();
        let d = DomainSpec::half_line_left(g, 0.0).unwrap();
        let ok = RealField::from_fn(g, |x| (-(x + 1.0) * (x + 1.0) / 0.02).exp());
        assert!(support_guard(&ok, &d, 1.0, GUARD_THRESHOLD, "test").is_ok());
        let bad = RealField::from_fn(g, |_| 0.1);
        let res = support_guard(&bad, &d, 1.0, GUARD_THRESHOLD, "test");
        assert!(matches!(res, Err(Error::SupportGuard { .. })));
    }

    #[test]
    fn schedule_validation() {
        assert!(ObservationSchedule::new(0.0, 5, true).is_err());
        assert!(ObservationSchedule::new(0.1, 0, true).is_err());
        let s = ObservationSchedule::new(0.1, 5, true).unwrap();
        assert!((s.total_time() - 0.5).abs() < 1e-15);
    }
}

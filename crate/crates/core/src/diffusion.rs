//! Intermittent observation of a Brownian particle: the truncation and
//! renormalization recursion on the observation lattice, the absorbing
//! Fokker-Planck solve whose renormalization it converges to, the nonlinear
//! conditioned equation coupling diffusion to the boundary flux, and the
//! intermittent-killing mass-balance experiment.

use crate::error::{Error, Result};
use crate::grid::{
    boundary_normal_derivative, integrate, support_guard, total_mass, truncate_to_domain,
    DomainSpec, Grid1D, ObservationSchedule, RealField, WallKind, GUARD_THRESHOLD,
};
use crate::kernels::gaussian_step;
use crate::linalg::{apply_tridiag, ConstTridiag};

/// Which solver states to keep.
#[derive(Debug, Clone)]
pub enum SnapshotSpec {
    /// Initial and final states only.
    Final,
    /// Every k-th step plus the initial and final states.
    Every(usize),
    /// States at the given times, rounded to the nearest step.
    Times(Vec<f64>),
}

impl SnapshotSpec {
    fn wants(&self, step: usize, n_steps: usize, dt: f64) -> bool {
        if step == 0 || step == n_steps {
            return true;
        }
        match self {
            SnapshotSpec::Final => false,
            SnapshotSpec::Every(k) => *k > 0 && step % k == 0,
            SnapshotSpec::Times(ts) => {
                let t = step as f64 * dt;
                ts.iter().any(|&want| (t - want).abs() < 0.5 * dt)
            }
        }
    }
}

/// Boundary flux time series J(t).
#[derive(Debug, Clone, Default)]
pub struct FluxSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// Output of the intermittent observation recursion: renormalized
/// conditional densities on the observation lattice.
#[derive(Debug, Clone)]
pub struct ConditionedDensityRun {
    pub schedule: ObservationSchedule,
    pub domain: DomainSpec,
    pub snapshots: Vec<(f64, RealField)>,
    pub flux: FluxSeries,
    /// Mass found in D before renormalization at each observation.
    pub survival: Vec<f64>,
}

/// Output of a linear or nonlinear PDE solve.
#[derive(Debug, Clone)]
pub struct DensityTrajectory {
    pub snapshots: Vec<(f64, RealField)>,
    /// Trapezoid mass over D after every step.
    pub mass_history: Vec<(f64, f64)>,
}

impl DensityTrajectory {
    pub fn final_field(&self) -> &RealField {
        &self.snapshots.last().expect("trajectory has snapshots").1
    }

    pub fn final_mass(&self) -> f64 {
        self.mass_history.last().expect("trajectory has history").1
    }
}

const DEGENERATE_MASS: f64 = 1e-12;

fn validate_density_input(p0: &RealField, domain: &DomainSpec) -> Result<f64> {
    let mass = integrate(p0, domain)?;
    if mass <= DEGENERATE_MASS {
        return Err(Error::DegenerateConditioning {
            at_time: 0.0,
            mass,
        });
    }
    Ok(mass)
}

fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    if !(t_final >= 0.0) {
        return Err(Error::invalid(format!("t_final must be >= 0, got {t_final}")));
    }
    let n = (t_final / dt).round() as usize;
    if (n as f64 * dt - t_final).abs() > 1e-9 * dt.max(t_final) {
        return Err(Error::invalid(format!(
            "t_final = {t_final} is not an integer number of steps of dt = {dt}"
        )));
    }
    Ok(n)
}

/// Divide by the mass on D, producing the conditional (unit-mass) density.
pub fn renormalized_density(p: &RealField, domain: &DomainSpec) -> Result<RealField> {
    let mass = integrate(p, domain)?;
    if mass <= DEGENERATE_MASS {
        return Err(Error::DegenerateConditioning {
            at_time: f64::NAN,
            mass,
        });
    }
    Ok(p.scaled(1.0 / mass))
}

/// Total absorption flux J = 1/2 sum over the physical boundary of the
/// outward normal derivative. Negative for absorbing Dirichlet data:
/// -J is the conditional absorption rate.
pub fn conditioned_flux(pi: &RealField, domain: &DomainSpec) -> Result<f64> {
    let ds = boundary_normal_derivative(pi, domain)?;
    Ok(0.5 * ds.iter().map(|(_, d)| d).sum::<f64>())
}

/// Crank-Nicolson solve of p_t = 1/2 p_xx on D with p = 0 on the walls.
///
/// Mass over D is non-increasing; artificial walls are guarded.
pub fn fp_dirichlet_solve(
    p0: &RealField,
    domain: &DomainSpec,
    t_final: f64,
    dt_solver: f64,
    snapshots: SnapshotSpec,
) -> Result<DensityTrajectory> {
    validate_density_input(p0, domain)?;
    let n_steps = step_count(t_final, dt_solver)?;
    let grid = p0.grid();
    let dx = grid.dx();
    let (lo, hi) = (domain.lo_node(), domain.hi_node());
    let n_int = hi - lo - 1;

    let mu = dt_solver / (4.0 * dx * dx);
    let solver = ConstTridiag::new(1.0 + 2.0 * mu, -mu, n_int);

    let mut field = truncate_to_domain(p0, domain);
    field.values_mut()[lo] = 0.0;
    field.values_mut()[hi] = 0.0;

    let mut out = DensityTrajectory {
        snapshots: Vec::new(),
        mass_history: Vec::new(),
    };
    out.mass_history.push((0.0, integrate(&field, domain)?));
    if snapshots.wants(0, n_steps, dt_solver) {
        out.snapshots.push((0.0, field.clone()));
    }

    let mut rhs = vec![0.0; n_int];
    for step in 1..=n_steps {
        apply_tridiag(
            1.0 - 2.0 * mu,
            mu,
            &field.values()[lo + 1..hi],
            &mut rhs,
        );
        solver.solve_in_place(&mut rhs);
        field.values_mut()[lo + 1..hi].copy_from_slice(&rhs);
        let t = step as f64 * dt_solver;
        out.mass_history.push((t, integrate(&field, domain)?));
        if snapshots.wants(step, n_steps, dt_solver) {
            out.snapshots.push((t, field.clone()));
        }
    }
    support_guard(&field, domain, guard_margin(&grid), GUARD_THRESHOLD, "fp_dirichlet_solve")?;
    Ok(out)
}

fn guard_margin(grid: &Grid1D) -> f64 {
    // outermost 5% of the box on each side, at least a few nodes
    0.05 * (grid.x_max() - grid.x_min())
}

/// Direct integration of the nonlinear conditioned equation
/// pi_t = 1/2 pi_xx - J(t) pi with J recomputed from the current iterate.
///
/// Diffusion is Crank-Nicolson; the scalar reaction is applied explicitly
/// as an integrating factor with a trapezoid (predictor-corrector) estimate
/// of J across the step. The reaction commutes with the linear solve, so
/// the scheme stays tridiagonal.
pub fn nonlinear_conditioned_solve(
    p0: &RealField,
    domain: &DomainSpec,
    t_final: f64,
    dt_solver: f64,
    snapshots: SnapshotSpec,
) -> Result<DensityTrajectory> {
    let mass0 = validate_density_input(p0, domain)?;
    let n_steps = step_count(t_final, dt_solver)?;
    let grid = p0.grid();
    let dx = grid.dx();
    let (lo, hi) = (domain.lo_node(), domain.hi_node());
    let n_int = hi - lo - 1;

    let mu = dt_solver / (4.0 * dx * dx);
    let solver = ConstTridiag::new(1.0 + 2.0 * mu, -mu, n_int);

    let mut field = truncate_to_domain(p0, domain);
    field.values_mut()[lo] = 0.0;
    field.values_mut()[hi] = 0.0;
    // start from exactly unit discrete mass so the conditioned equation's
    // unstable mass manifold is entered on-center
    let m = integrate(&field, domain)?;
    field = field.scaled(1.0 / m);
    let _ = mass0;

    let mut out = DensityTrajectory {
        snapshots: Vec::new(),
        mass_history: Vec::new(),
    };
    out.mass_history.push((0.0, 1.0));
    if snapshots.wants(0, n_steps, dt_solver) {
        out.snapshots.push((0.0, field.clone()));
    }

    // mass drift beyond this limit signals dt_solver too large; the floor
    // accounts for the O(dx^2) flux-stencil vs discrete-mass mismatch that
    // any consistent discretization carries at finite resolution
    let drift_limit = |t: f64| (1e-6 + dx * dx) * t.max(1.0);

    let mut rhs = vec![0.0; n_int];
    for step in 1..=n_steps {
        let j0 = conditioned_flux(&field, domain)?;
        apply_tridiag(
            1.0 - 2.0 * mu,
            mu,
            &field.values()[lo + 1..hi],
            &mut rhs,
        );
        solver.solve_in_place(&mut rhs);
        field.values_mut()[lo + 1..hi].copy_from_slice(&rhs);
        // predictor-corrector on the reaction scalar
        let j_pred = conditioned_flux(&field, domain)? * (-dt_solver * j0).exp();
        let factor = (-dt_solver * 0.5 * (j0 + j_pred)).exp();
        for v in field.values_mut()[lo..=hi].iter_mut() {
            *v *= factor;
        }
        let t = step as f64 * dt_solver;
        let mass = integrate(&field, domain)?;
        out.mass_history.push((t, mass));
        let drift = (mass - 1.0).abs();
        if drift > drift_limit(t) {
            return Err(Error::SchemeConsistency {
                drift,
                limit: drift_limit(t),
            });
        }
        if snapshots.wants(step, n_steps, dt_solver) {
            out.snapshots.push((t, field.clone()));
        }
    }
    Ok(out)
}

/// Intermittent observation recursion on the lattice t = j dt: diffuse
/// freely, truncate to D, renormalize on D when the schedule asks for it.
pub fn observation_recursion(
    p0: &RealField,
    domain: &DomainSpec,
    schedule: &ObservationSchedule,
) -> Result<ConditionedDensityRun> {
    validate_density_input(p0, domain)?;
    let grid = p0.grid();
    let omega_empty = domain.omega_empty(&grid);

    let mut field = truncate_to_domain(p0, domain);
    let m0 = integrate(&field, domain)?;
    field = field.scaled(1.0 / m0);

    let mut run = ConditionedDensityRun {
        schedule: *schedule,
        domain: *domain,
        snapshots: vec![(0.0, field.clone())],
        flux: FluxSeries::default(),
        survival: Vec::with_capacity(schedule.n_steps),
    };
    run.flux.times.push(0.0);
    run.flux.values.push(conditioned_flux(&field, domain)?);

    for step in 1..=schedule.n_steps {
        let t = step as f64 * schedule.dt;
        let diffused = gaussian_step(&field, schedule.dt)?;
        if domain.left_kind() == WallKind::Artificial
            || domain.right_kind() == WallKind::Artificial
        {
            support_guard(
                &diffused,
                domain,
                guard_margin(&grid),
                GUARD_THRESHOLD,
                "observation_recursion",
            )?;
        }
        field = if omega_empty {
            diffused
        } else {
            truncate_to_domain(&diffused, domain)
        };
        let surviving = integrate(&field, domain)?;
        run.survival.push(surviving);
        if surviving <= DEGENERATE_MASS {
            return Err(Error::DegenerateConditioning {
                at_time: t,
                mass: surviving,
            });
        }
        if schedule.renormalize && !omega_empty {
            field = field.scaled(1.0 / surviving);
        }
        run.flux.times.push(t);
        run.flux.values.push(conditioned_flux(&field, domain)?);
        run.snapshots.push((t, field.clone()));
    }
    Ok(run)
}

/// Output of the intermittent-killing experiment.
#[derive(Debug, Clone)]
pub struct KillingRun {
    /// (t, total mass) after each diffusion interval and kill.
    pub mass_history: Vec<(f64, f64)>,
    /// Mass removed by the k-th observation.
    pub removed_per_observation: Vec<f64>,
    /// Worst violation of 1 - mass(t) = sum of removed masses.
    pub max_balance_residual: f64,
    pub final_field: RealField,
}

impl KillingRun {
    pub fn total_removed(&self) -> f64 {
        self.removed_per_observation.iter().sum()
    }
}

/// Intermittent instantaneous killing on the measured side: at each
/// t = k dt the field is zeroed outside D without renormalization and the
/// removed mass is recorded. The ledger satisfies
/// 1 - mass(t) = sum_{k <= t/dt} m_k to bookkeeping accuracy.
pub fn intermittent_killing_run(
    p0: &RealField,
    domain: &DomainSpec,
    dt: f64,
    t_final: f64,
) -> Result<KillingRun> {
    validate_density_input(p0, domain)?;
    let n_obs = step_count(t_final, dt)?;
    let grid = p0.grid();

    // the box must catch everything that diffuses past the kill boundary
    // within one interval, otherwise mass escapes the ledger
    let reach = 8.5 * dt.sqrt();
    if grid.x_max() - domain.b(&grid) < reach {
        return Err(Error::invalid(format!(
            "box extends only {:.3} past the kill boundary; one interval needs {:.3}",
            grid.x_max() - domain.b(&grid),
            reach
        )));
    }

    let mut field = truncate_to_domain(p0, domain);
    let m0 = integrate(&field, domain)?;
    field = field.scaled(1.0 / m0);

    let mut run = KillingRun {
        mass_history: vec![(0.0, total_mass(&field))],
        removed_per_observation: Vec::with_capacity(n_obs),
        max_balance_residual: 0.0,
        final_field: field.clone(),
    };

    let mut removed_total = 0.0;
    for k in 1..=n_obs {
        let t = k as f64 * dt;
        let diffused = gaussian_step(&field, dt)?;
        support_guard(
            &diffused,
            domain,
            guard_margin(&grid),
            GUARD_THRESHOLD,
            "intermittent_killing_run",
        )?;
        let before = total_mass(&diffused);
        field = truncate_to_domain(&diffused, domain);
        let after = total_mass(&field);
        let removed = before - after;
        removed_total += removed;
        run.removed_per_observation.push(removed);
        run.mass_history.push((t, after));
        let residual = ((1.0 - after) - removed_total).abs();
        run.max_balance_residual = run.max_balance_residual.max(residual);
    }
    run.final_field = field;
    Ok(run)
}

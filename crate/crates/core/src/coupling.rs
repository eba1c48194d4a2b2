//! Scale coupling: interface laws backed by the micro contact solver.
//!
//! Three strategies turn the corrected micro curve into pressure and tangent
//! for the macro Newton loop:
//!
//! * `QnLaw` solves the corrected micro problem at gₙ and at a perturbed
//!   gap every call and differences the two (two micro solves per call);
//! * `CqnLaw` solves once per call and takes the secant against the last
//!   converged load step (one micro solve per call);
//! * `SanLaw` evaluates a power law fitted offline to the corrected curve
//!   (no micro solves during the macro loop).

use std::sync::Arc;
use std::time::Instant;

use crate::bem::correction::{
    corrected_pressure, subtract_elastic_curve, CorrectedCurve, MAX_CORRECTION_ITERATIONS,
    TOL_CORRECTION,
};
use crate::bem::influence::InfluenceOperator;
use crate::bem::solver::MicroSolver;
use crate::elastic::CompositeElastic;
use crate::error::{tag_gauss_point, Error, Result};
use crate::fem::model::{ConstitutiveResponse, InterfaceLaw};
use crate::fit::{fit_power_law, PowerLawFit};
use crate::surface::{surface_stats, RoughSurface};

/// Coupling strategy selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Quasi-Newton with a finite-difference tangent.
    Qn,
    /// Cheap quasi-Newton with a step-to-step secant tangent.
    Cqn,
    /// Semi-analytical power-law response fitted offline.
    San,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Qn => "qn",
            Strategy::Cqn => "cqn",
            Strategy::San => "san",
        })
    }
}

/// Relative finite-difference step of the QN tangent.
const FD_RELATIVE: f64 = 0.01;
/// Absolute finite-difference floor, as a fraction of the RMS roughness.
const FD_FLOOR_RELATIVE: f64 = 1e-4;
/// Gap increments below this reuse the previous secant tangent (µm).
const SECANT_MIN_INCREMENT: f64 = 1e-12;

fn build_solvers(
    surface: &Arc<RoughSurface>,
    elastic: &CompositeElastic,
    count: usize,
) -> Result<Vec<MicroSolver>> {
    let operator = Arc::new(InfluenceOperator::new(
        surface.grid(),
        surface.cell_size(),
        elastic.e,
    )?);
    Ok((0..count)
        .map(|_| MicroSolver::with_operator(surface.clone(), operator.clone()))
        .collect())
}

/// Finite-difference tangent shared by QN and the first CQN step.
fn fd_tangent(
    solver: &mut MicroSolver,
    alpha: f64,
    g_n: f64,
    pressure: f64,
    fd_floor: f64,
    tol: f64,
    max_iterations: usize,
) -> Result<f64> {
    let dg = (FD_RELATIVE * g_n).max(fd_floor);
    let ahead = corrected_pressure(solver, alpha, g_n + dg, tol, max_iterations)?;
    Ok(((ahead.pressure - pressure) / dg).max(0.0))
}

/// Full quasi-Newton law: two corrected micro solves per constitutive call.
pub struct QnLaw {
    solvers: Vec<MicroSolver>,
    alpha: f64,
    tol: f64,
    max_iterations: usize,
    fd_floor: f64,
    micro_solves: usize,
}

impl QnLaw {
    pub fn new(
        surface: Arc<RoughSurface>,
        elastic: &CompositeElastic,
        alpha: f64,
        gauss_points: usize,
        tol: f64,
    ) -> Result<Self> {
        let fd_floor = FD_FLOOR_RELATIVE * surface_stats(&surface).rms;
        Ok(Self {
            solvers: build_solvers(&surface, elastic, gauss_points)?,
            alpha,
            tol,
            max_iterations: MAX_CORRECTION_ITERATIONS,
            fd_floor,
            micro_solves: 0,
        })
    }

    /// Corrected micro solves triggered so far.
    pub fn micro_solves(&self) -> usize {
        self.micro_solves
    }
}

impl InterfaceLaw for QnLaw {
    fn response(&mut self, gp: usize, _step: usize, g_n: f64) -> Result<ConstitutiveResponse> {
        if g_n <= 0.0 {
            return Ok(ConstitutiveResponse { pressure: 0.0, tangent: 0.0 });
        }
        let solver = self
            .solvers
            .get_mut(gp)
            .ok_or_else(|| Error::Parameter(format!("gauss point {gp} out of range")))?;
        let res = corrected_pressure(solver, self.alpha, g_n, self.tol, self.max_iterations)
            .map_err(|e| tag_gauss_point(e, gp))?;
        let tangent = fd_tangent(
            solver,
            self.alpha,
            g_n,
            res.pressure,
            self.fd_floor,
            self.tol,
            self.max_iterations,
        )
        .map_err(|e| tag_gauss_point(e, gp))?;
        self.micro_solves += 2;
        Ok(ConstitutiveResponse { pressure: res.pressure, tangent })
    }

    fn name(&self) -> &'static str {
        "qn"
    }
}

/// Cheap quasi-Newton law: one corrected micro solve per call, tangent from
/// the secant against the previous converged step.
pub struct CqnLaw {
    solvers: Vec<MicroSolver>,
    alpha: f64,
    tol: f64,
    max_iterations: usize,
    fd_floor: f64,
    /// (gₙ, p) of the last response per Gauss point.
    current: Vec<(f64, f64)>,
    /// (gₙ, p) at the last converged step.
    committed: Vec<Option<(f64, f64)>>,
    /// Last non-degenerate tangent per Gauss point.
    last_tangent: Vec<f64>,
    micro_solves: usize,
}

impl CqnLaw {
    pub fn new(
        surface: Arc<RoughSurface>,
        elastic: &CompositeElastic,
        alpha: f64,
        gauss_points: usize,
        tol: f64,
    ) -> Result<Self> {
        let fd_floor = FD_FLOOR_RELATIVE * surface_stats(&surface).rms;
        Ok(Self {
            solvers: build_solvers(&surface, elastic, gauss_points)?,
            alpha,
            tol,
            max_iterations: MAX_CORRECTION_ITERATIONS,
            fd_floor,
            current: vec![(0.0, 0.0); gauss_points],
            committed: vec![None; gauss_points],
            last_tangent: vec![0.0; gauss_points],
            micro_solves: 0,
        })
    }

    pub fn micro_solves(&self) -> usize {
        self.micro_solves
    }
}

impl InterfaceLaw for CqnLaw {
    fn response(&mut self, gp: usize, _step: usize, g_n: f64) -> Result<ConstitutiveResponse> {
        if gp >= self.solvers.len() {
            return Err(Error::Parameter(format!("gauss point {gp} out of range")));
        }
        if g_n <= 0.0 {
            self.current[gp] = (g_n, 0.0);
            return Ok(ConstitutiveResponse { pressure: 0.0, tangent: 0.0 });
        }

        let solver = &mut self.solvers[gp];
        let res = corrected_pressure(solver, self.alpha, g_n, self.tol, self.max_iterations)
            .map_err(|e| tag_gauss_point(e, gp))?;
        self.micro_solves += 1;

        let tangent = match self.committed[gp] {
            None => {
                // No converged history yet: fall back to the QN difference.
                self.micro_solves += 1;
                fd_tangent(
                    solver,
                    self.alpha,
                    g_n,
                    res.pressure,
                    self.fd_floor,
                    self.tol,
                    self.max_iterations,
                )
                .map_err(|e| tag_gauss_point(e, gp))?
            }
            Some((g_prev, p_prev)) => {
                let dg = g_n - g_prev;
                if dg.abs() <= SECANT_MIN_INCREMENT {
                    self.last_tangent[gp]
                } else {
                    let secant = (res.pressure - p_prev) / dg;
                    if secant.is_finite() && secant > 0.0 {
                        secant
                    } else {
                        self.last_tangent[gp]
                    }
                }
            }
        };

        if tangent > 0.0 {
            self.last_tangent[gp] = tangent;
        }
        self.current[gp] = (g_n, res.pressure);
        Ok(ConstitutiveResponse { pressure: res.pressure, tangent })
    }

    fn commit(&mut self, _step: usize) {
        for gp in 0..self.current.len() {
            self.committed[gp] = Some(self.current[gp]);
        }
    }

    fn name(&self) -> &'static str {
        "cqn"
    }
}

/// Semi-analytical law p = a·gᵇ with exact tangent a·b·gᵇ⁻¹.
pub struct SanLaw {
    pub a: f64,
    pub b: f64,
}

impl SanLaw {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
            return Err(Error::Parameter(format!(
                "power law needs positive finite coefficients, got a = {a}, b = {b}"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn from_fit(fit: &PowerLawFit) -> Result<Self> {
        Self::new(fit.a, fit.b)
    }
}

impl InterfaceLaw for SanLaw {
    fn response(&mut self, _gp: usize, _step: usize, g_n: f64) -> Result<ConstitutiveResponse> {
        if g_n <= 0.0 {
            return Ok(ConstitutiveResponse { pressure: 0.0, tangent: 0.0 });
        }
        Ok(ConstitutiveResponse {
            pressure: self.a * g_n.powf(self.b),
            tangent: self.a * self.b * g_n.powf(self.b - 1.0),
        })
    }

    fn name(&self) -> &'static str {
        "san"
    }
}

/// Offline-sampled corrected curve and its power-law fit.
pub struct OfflineCurve {
    /// (δ, p̄) at uniformly spaced imposed approaches.
    pub raw: Vec<(f64, f64)>,
    /// Subtract-route corrected samples (gₙ, p̄).
    pub corrected: CorrectedCurve,
    pub fit: PowerLawFit,
    /// Wall-clock cost of the sweep and fit (s).
    pub wall_seconds: f64,
}

/// Sweeps the raw curve at `steps` uniformly spaced imposed approaches in
/// (0, delta_max], shifts it by the first-order elastic term, and fits the
/// power law. The sweep reuses one warm-started solver from small to large
/// approach.
pub fn build_offline_curve(
    surface: Arc<RoughSurface>,
    elastic: &CompositeElastic,
    alpha: f64,
    delta_max: f64,
    steps: usize,
) -> Result<OfflineCurve> {
    if delta_max <= 0.0 {
        return Err(Error::Parameter(format!(
            "offline sweep needs a positive maximum approach, got {delta_max}"
        )));
    }
    if steps < 3 {
        return Err(Error::Parameter(format!(
            "offline sweep needs at least 3 steps, got {steps}"
        )));
    }

    let start = Instant::now();
    let l = surface.lateral_size();
    let e = elastic.e;
    let mut solver = MicroSolver::new(surface, elastic)?;
    let mut raw = Vec::with_capacity(steps);
    for k in 1..=steps {
        let delta = delta_max * k as f64 / steps as f64;
        let sol = solver.solve(delta)?;
        raw.push((delta, sol.mean_pressure));
    }
    let corrected = subtract_elastic_curve(&raw, alpha, l, e);
    let fit = fit_power_law(&corrected.samples)?;
    Ok(OfflineCurve {
        raw,
        corrected,
        fit,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Default correction tolerance re-exported for call sites configuring laws.
pub const DEFAULT_CORRECTION_TOL: f64 = TOL_CORRECTION;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bem::correction::flat_punch_alpha;
    use crate::elastic::composite_moduli;
    use crate::fem::model::MacroModel;
    use crate::fem::newton::{newton_solve, TOL_NEWTON};
    use crate::surface::generate_rmd;
    use approx::assert_relative_eq;

    fn setup(n: u32, seed: u64) -> (Arc<RoughSurface>, CompositeElastic, f64) {
        let surface = Arc::new(generate_rmd(n, 0.8, seed, 20.0).unwrap());
        let elastic = composite_moduli(1.0, 0.3, 1.0, 0.3).unwrap();
        let alpha = flat_punch_alpha(n).unwrap();
        (surface, elastic, alpha)
    }

    #[test]
    fn san_law_is_the_power_law() {
        let mut law = SanLaw::new(2.0, 3.0).unwrap();
        let r = law.response(0, 1, 1.5).unwrap();
        assert_relative_eq!(r.pressure, 2.0 * 1.5f64.powi(3), epsilon = 1e-12);
        assert_relative_eq!(r.tangent, 6.0 * 1.5f64.powi(2), epsilon = 1e-12);

        let closed = law.response(0, 1, -0.1).unwrap();
        assert_eq!(closed.pressure, 0.0);
        assert_eq!(closed.tangent, 0.0);

        assert!(SanLaw::new(-1.0, 2.0).is_err());
        assert!(SanLaw::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn qn_matches_direct_corrected_solve() {
        let (surface, elastic, alpha) = setup(3, 21);
        let g = 0.8 * surface_stats(&surface).rms;

        let mut law = QnLaw::new(surface.clone(), &elastic, alpha, 1, TOL_CORRECTION).unwrap();
        let r = law.response(0, 1, g).unwrap();

        let mut direct = MicroSolver::new(surface, &elastic).unwrap();
        let want = corrected_pressure(&mut direct, alpha, g, TOL_CORRECTION, 50).unwrap();
        assert_relative_eq!(r.pressure, want.pressure, max_relative = 1e-10);
        assert!(r.tangent > 0.0);
        assert_eq!(law.micro_solves(), 2);
    }

    #[test]
    fn cqn_first_step_falls_back_to_fd() {
        let (surface, elastic, alpha) = setup(3, 21);
        let g = 0.8 * surface_stats(&surface).rms;

        let mut qn = QnLaw::new(surface.clone(), &elastic, alpha, 1, TOL_CORRECTION).unwrap();
        let mut cqn = CqnLaw::new(surface, &elastic, alpha, 1, TOL_CORRECTION).unwrap();
        let a = qn.response(0, 1, g).unwrap();
        let b = cqn.response(0, 1, g).unwrap();
        assert_relative_eq!(a.pressure, b.pressure, max_relative = 1e-12);
        assert_relative_eq!(a.tangent, b.tangent, max_relative = 1e-12);
        assert_eq!(cqn.micro_solves(), 2);
    }

    #[test]
    fn cqn_secant_after_commit() {
        let (surface, elastic, alpha) = setup(3, 33);
        let s = surface_stats(&surface).rms;
        let mut cqn = CqnLaw::new(surface, &elastic, alpha, 1, TOL_CORRECTION).unwrap();

        let g1 = 0.5 * s;
        let r1 = cqn.response(0, 1, g1).unwrap();
        cqn.commit(1);

        let g2 = 0.9 * s;
        let r2 = cqn.response(0, 2, g2).unwrap();
        assert_relative_eq!(
            r2.tangent,
            (r2.pressure - r1.pressure) / (g2 - g1),
            max_relative = 1e-12
        );
        // One solve for the first call's pressure, one for its FD partner,
        // one for the second call.
        assert_eq!(cqn.micro_solves(), 3);
    }

    #[test]
    fn cqn_degenerate_increment_reuses_tangent() {
        let (surface, elastic, alpha) = setup(3, 33);
        let s = surface_stats(&surface).rms;
        let mut cqn = CqnLaw::new(surface, &elastic, alpha, 1, TOL_CORRECTION).unwrap();

        let g = 0.7 * s;
        let r1 = cqn.response(0, 1, g).unwrap();
        cqn.commit(1);
        let r2 = cqn.response(0, 2, g).unwrap();
        assert_eq!(r2.tangent, r1.tangent);
        assert_relative_eq!(r2.pressure, r1.pressure, max_relative = 1e-12);
    }

    #[test]
    fn offline_curve_is_shifted_left_and_fits() {
        let (surface, elastic, alpha) = setup(4, 9);
        let s = surface_stats(&surface).rms;
        let curve =
            build_offline_curve(surface, &elastic, alpha, 2.0 * s, 40).unwrap();

        assert_eq!(curve.raw.len(), 40);
        for w in curve.raw.windows(2) {
            assert!(w[1].1 >= w[0].1, "raw pressure must not decrease");
        }
        for (k, &(g, p)) in curve.corrected.samples.iter().enumerate() {
            let (delta, p_raw) = curve.raw[k];
            assert_eq!(p, p_raw);
            assert!(g < delta || p == 0.0);
        }
        assert!(curve.fit.a.is_finite() && curve.fit.b > 1.0 && curve.fit.b < 8.0);
        assert!(curve.fit.r2 > 0.9);
        assert!(curve.wall_seconds >= 0.0);
    }

    #[test]
    fn offline_rejects_bad_parameters() {
        let (surface, elastic, alpha) = setup(3, 9);
        assert!(build_offline_curve(surface.clone(), &elastic, alpha, 0.0, 10).is_err());
        assert!(build_offline_curve(surface, &elastic, alpha, 1.0, 2).is_err());
    }

    #[test]
    fn strategies_drive_the_macro_model_consistently() {
        let (surface, elastic, alpha) = setup(3, 5);
        let s = surface_stats(&surface).rms;
        let model = MacroModel::benchmark(1.0e4, 1.0, 0.3, 1.0, 0.3);
        let deltas: Vec<f64> = (1..=4).map(|k| 0.5 * s * k as f64).collect();

        let mut qn = QnLaw::new(surface.clone(), &elastic, alpha, 2, TOL_CORRECTION).unwrap();
        let qn_hist = newton_solve(&model, &mut qn, &deltas, TOL_NEWTON, 30).unwrap();

        let mut cqn = CqnLaw::new(surface.clone(), &elastic, alpha, 2, TOL_CORRECTION).unwrap();
        let cqn_hist = newton_solve(&model, &mut cqn, &deltas, TOL_NEWTON, 30).unwrap();

        let offline =
            build_offline_curve(surface, &elastic, alpha, 2.0 * s, 60).unwrap();
        let mut san = SanLaw::from_fit(&offline.fit).unwrap();
        let san_hist = newton_solve(&model, &mut san, &deltas, TOL_NEWTON, 30).unwrap();

        for k in 0..deltas.len() {
            let p_qn = qn_hist.steps[k].reaction;
            let p_cqn = cqn_hist.steps[k].reaction;
            assert!(p_qn > 0.0);
            assert_relative_eq!(p_cqn, p_qn, max_relative = 0.01);
            // The fitted law sees the same curve through a smoothing filter.
            let p_san = san_hist.steps[k].reaction;
            assert_relative_eq!(p_san, p_qn, max_relative = 0.35);
        }
    }
}

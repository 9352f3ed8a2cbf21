//! Continuous-variable key rates with a restricted eavesdropper.
//!
//! Alice sends one arm of a two-mode squeezed vacuum (variance `V`). Eve
//! collects a fraction `eta_ae` of the beam and attacks it with an
//! entangling cloner (`eta_e`, `V_E`). The remainder travels through a
//! bypass channel (`eta_s`) that Eve cannot touch, and both paths meet at
//! Bob's telescope, modelled as a beam splitter (`eta_t`). The legitimate
//! parties observe only the end-to-end transmissivity `T_eq` and the excess
//! noise `xi`, so the key rate is minimised over the unknown `(eta_s, eta_t)`.
//!
//! Mode order in the covariance matrix is `A, B, E, E'`.

use argmin::core::{CostFunction, Error as ArgminError, Executor, State};
use argmin::solver::neldermead::NelderMead;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gaussian::{
    condition_on_homodyne, condition_with_noise, g, von_neumann_entropy, CovarianceMatrix,
    GaussianError, Quadrature,
};
use crate::par;

/// Largest Eve variance the worst-case search trusts.
///
/// `V_E` diverges as `(1 - eta_e) eta_t -> 0`; beyond this value the f64
/// round-off in the entropies (growing like `eps * V_E^2`) reaches 1e-5 bits,
/// so such points are skipped by the optimiser.
pub const MAX_EVE_VARIANCE: f64 = 1e5;

/// Relative slack for the square-root argument in [`solve_attack`].
const ROOT_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CvError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    Invalid {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("no entangling-cloner attack reproduces the observation at this point")]
    Infeasible,
    #[error("empty feasible set: {0}")]
    EmptyFeasibleSet(String),
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
    #[error("local refinement failed: {0}")]
    Optimizer(String),
}

fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), CvError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(CvError::Invalid { name, value, reason })
    }
}

/// What the legitimate users measure on the channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelObservation {
    /// End-to-end transmissivity, detector included.
    pub t_eq: f64,
    /// Excess noise referred to the transmitter, in SNU.
    pub xi: f64,
    /// Trusted detector efficiency.
    pub eta_d: f64,
    /// Trusted electronic noise, in SNU.
    pub nu_el: f64,
}

impl Default for ChannelObservation {
    fn default() -> Self {
        Self {
            t_eq: 1e-3,
            xi: 0.1,
            eta_d: 1.0,
            nu_el: 0.0,
        }
    }
}

impl ChannelObservation {
    pub fn validate(&self) -> Result<(), CvError> {
        check("eta_d", self.eta_d, self.eta_d > 0.0 && self.eta_d <= 1.0, "must lie in (0, 1]")?;
        check(
            "t_eq",
            self.t_eq,
            self.t_eq > 0.0 && self.t_eq <= self.eta_d,
            "must lie in (0, eta_d]",
        )?;
        check("xi", self.xi, self.xi >= 0.0, "must be non-negative")?;
        check("nu_el", self.nu_el, self.nu_el >= 0.0, "must be non-negative")
    }

    /// Channel transmissivity with the trusted detector removed.
    pub fn eta_ch(&self) -> f64 {
        self.t_eq / self.eta_d
    }

    /// Trusted detector noise referred to the detector input.
    pub fn chi_hom(&self) -> f64 {
        (1.0 - self.eta_d) / self.eta_d + self.nu_el / self.eta_d
    }
}

/// Restriction bound and the uncharacterised channel parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CvScenario {
    pub eta_ae: f64,
    pub eta_s: f64,
    pub eta_t: f64,
    /// Modulation variance of Alice's TMSV, in SNU.
    pub v: f64,
    /// Reconciliation efficiency.
    pub beta: f64,
    /// Thermal variance injected into the bypass; 1 means pure loss.
    pub v_s: f64,
}

impl Default for CvScenario {
    fn default() -> Self {
        Self {
            eta_ae: 0.5,
            eta_s: 0.0,
            eta_t: 1.0,
            v: 300.0,
            beta: 1.0,
            v_s: 1.0,
        }
    }
}

impl CvScenario {
    pub fn validate(&self) -> Result<(), CvError> {
        check("eta_ae", self.eta_ae, self.eta_ae > 0.0 && self.eta_ae <= 1.0, "must lie in (0, 1]")?;
        check("eta_s", self.eta_s, (0.0..=1.0).contains(&self.eta_s), "must lie in [0, 1]")?;
        check("eta_t", self.eta_t, (0.0..=1.0).contains(&self.eta_t), "must lie in [0, 1]")?;
        check("v", self.v, self.v > 1.0, "must exceed 1")?;
        check("beta", self.beta, self.beta > 0.0 && self.beta <= 1.0, "must lie in (0, 1]")?;
        check("v_s", self.v_s, self.v_s >= 1.0, "must be at least 1")
    }

    pub fn with_channel(mut self, eta_s: f64, eta_t: f64) -> Self {
        self.eta_s = eta_s;
        self.eta_t = eta_t;
        self
    }
}

/// Entangling-cloner parameters consistent with an observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSolution {
    pub eta_e: f64,
    pub v_e: f64,
    pub feasible: bool,
}

impl AttackSolution {
    const INFEASIBLE: Self = Self {
        eta_e: f64::NAN,
        v_e: f64::NAN,
        feasible: false,
    };
}

/// Which Holevo bound is subtracted from the mutual information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Reverse reconciliation.
    Rr,
    /// Direct reconciliation, cloner covariance matrix conditioned on Alice.
    DrM1,
    /// Direct reconciliation, attack-independent bound.
    DrM2,
}

/// Cloner transmissivity and noise that reproduce `(T_eq, xi)`.
///
/// Infeasibility is returned as a value: the bypass alone may deliver more
/// light than observed, or the required cloner may be non-physical.
pub fn solve_attack(scn: &CvScenario, obs: &ChannelObservation) -> AttackSolution {
    let t = obs.eta_ch();
    let bypass = (1.0 - scn.eta_ae) * scn.eta_s * (1.0 - scn.eta_t);
    let mut r = t.sqrt() - bypass.sqrt();
    if r < 0.0 {
        if r > -ROOT_SLACK * t.sqrt() {
            r = 0.0;
        } else {
            return AttackSolution::INFEASIBLE;
        }
    }
    let through_eve = scn.eta_ae * scn.eta_t;
    let eta_e = if through_eve > 0.0 {
        r * r / through_eve
    } else if r == 0.0 {
        0.0
    } else {
        return AttackSolution::INFEASIBLE;
    };
    if eta_e > 1.0 + ROOT_SLACK {
        return AttackSolution::INFEASIBLE;
    }
    let eta_e = eta_e.min(1.0);
    let leak = (1.0 - eta_e) * scn.eta_t;
    let noise = t * obs.xi;
    let v_e = if leak > 0.0 {
        1.0 + noise / leak
    } else if noise == 0.0 {
        1.0
    } else {
        return AttackSolution::INFEASIBLE;
    };
    AttackSolution {
        eta_e,
        v_e,
        feasible: true,
    }
}

/// Channel transmissivity implied by a scenario and cloner.
pub fn implied_transmissivity(scn: &CvScenario, eta_e: f64) -> f64 {
    let a = (scn.eta_ae * eta_e * scn.eta_t).sqrt();
    let b = ((1.0 - scn.eta_ae) * scn.eta_s * (1.0 - scn.eta_t)).sqrt();
    (a + b) * (a + b)
}

/// Covariance matrix of `A, B, E, E'` after the attack.
pub fn build_cm(scn: &CvScenario, att: &AttackSolution) -> Result<CovarianceMatrix, CvError> {
    if !att.feasible {
        return Err(CvError::Infeasible);
    }
    let (v, eae, es, et) = (scn.v, scn.eta_ae, scn.eta_s, scn.eta_t);
    let (ee, ve) = (att.eta_e, att.v_e);
    let t = implied_transmissivity(scn, ee);
    let c = (v * v - 1.0).sqrt();
    let ce = (ve * ve - 1.0).max(0.0).sqrt();
    let to_eve = eae * (v - 1.0) + 1.0;

    let c_ab = t.sqrt() * c;
    let c_ae2 = -(eae * (1.0 - ee)).sqrt() * c;
    let v_b = t * (v - 1.0)
        + 1.0
        + (1.0 - ee) * et * (ve - 1.0)
        + (1.0 - es) * (1.0 - et) * (scn.v_s - 1.0);
    let c_be = ((1.0 - ee) * et).sqrt() * ce;
    let c_be2 = (ee * (1.0 - ee) * et).sqrt() * (ve - to_eve)
        - (eae * (1.0 - eae) * (1.0 - ee) * es * (1.0 - et)).sqrt() * (v - 1.0);
    let c_ee2 = ee.sqrt() * ce;
    let v_e2 = (1.0 - ee) * to_eve + ee * ve;

    // 2x2 blocks: 'I' = identity times value, 'Z' = diag(1, -1) times value.
    #[rustfmt::skip]
    let blocks = [
        [(v, 'I'),      (c_ab, 'Z'),  (0.0, 'I'),  (c_ae2, 'Z')],
        [(c_ab, 'Z'),   (v_b, 'I'),   (c_be, 'Z'), (c_be2, 'I')],
        [(0.0, 'I'),    (c_be, 'Z'),  (ve, 'I'),   (c_ee2, 'Z')],
        [(c_ae2, 'Z'),  (c_be2, 'I'), (c_ee2, 'Z'), (v_e2, 'I')],
    ];
    let mut m = DMatrix::zeros(8, 8);
    for (i, row) in blocks.iter().enumerate() {
        for (j, &(val, kind)) in row.iter().enumerate() {
            m[(2 * i, 2 * j)] = val;
            m[(2 * i + 1, 2 * j + 1)] = if kind == 'Z' { -val } else { val };
        }
    }
    Ok(CovarianceMatrix::new(m)?)
}

/// Mutual information between Alice and Bob for homodyne detection.
pub fn mutual_info(obs: &ChannelObservation, v: f64) -> Result<f64, CvError> {
    let eta_ch = obs.eta_ch();
    check("eta_ch", eta_ch, eta_ch > 0.0, "must be positive")?;
    check("v", v, v > 1.0, "must exceed 1")?;
    let chi_line = (1.0 - eta_ch) / eta_ch + obs.xi;
    let chi_tot = chi_line + obs.chi_hom() / eta_ch;
    Ok(0.5 * ((v + chi_tot) / (1.0 + chi_tot)).log2())
}

/// Eve's information on Bob's homodyne outcome, `H(EE') - H(EE'|B)`.
///
/// `chi_hom` is the trusted detector noise added to Bob's measured
/// quadrature; zero gives the ideal-detector bound.
pub fn holevo_rr(cm: &CovarianceMatrix, chi_hom: f64) -> Result<f64, CvError> {
    let bee = cm.reduce(&[1, 2, 3])?;
    let ee = bee.reduce(&[1, 2])?;
    let cond = condition_with_noise(&bee, 0, Quadrature::X, chi_hom)?;
    Ok(von_neumann_entropy(&ee)? - von_neumann_entropy(&cond)?)
}

/// Covariance matrix of `A_x, E, E'` where `A_x` is one output of Alice's
/// heterodyne beam splitter.
pub fn heterodyne_arm(cm: &CovarianceMatrix) -> Result<CovarianceMatrix, CvError> {
    let m = cm.matrix();
    let v = m[(0, 0)];
    let k = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = DMatrix::zeros(6, 6);
    let src = [0usize, 4, 6];
    for (i, &si) in src.iter().enumerate() {
        for (j, &sj) in src.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    let mut val = m[(si + a, sj + b)];
                    if (i == 0) != (j == 0) {
                        val *= k;
                    }
                    out[(2 * i + a, 2 * j + b)] = val;
                }
            }
        }
    }
    out[(0, 0)] = 0.5 * (v + 1.0);
    out[(1, 1)] = 0.5 * (v + 1.0);
    out[(0, 1)] = 0.0;
    out[(1, 0)] = 0.0;
    Ok(CovarianceMatrix::new(out)?)
}

/// Eve's information on Alice's data, `H(EE') - H(EE'|A_x)`, from the
/// `A_x, E, E'` matrix returned by [`heterodyne_arm`].
pub fn holevo_dr_m1(cm_axee: &CovarianceMatrix) -> Result<f64, CvError> {
    let ee = cm_axee.reduce(&[1, 2])?;
    let cond = condition_on_homodyne(cm_axee, 0, Quadrature::X)?;
    Ok(von_neumann_entropy(&ee)? - von_neumann_entropy(&cond)?)
}

/// Attack-independent bound on Eve's information when she collects at most
/// `eta_ae` of Alice's beam: `g(V_B') - g(sqrt(V_B'))`.
pub fn holevo_dr_m2_bound(eta_ae: f64, v: f64) -> Result<f64, CvError> {
    check("eta_ae", eta_ae, (0.0..=1.0).contains(&eta_ae), "must lie in [0, 1]")?;
    check("v", v, v >= 1.0, "must be at least 1")?;
    let vb = eta_ae * v + 1.0 - eta_ae;
    Ok(g(vb)? - g(vb.sqrt())?)
}

/// One evaluated operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    /// Signed key rate in bits per channel use.
    pub rate: f64,
    /// Holevo bound that was subtracted.
    pub chi: f64,
    pub i_ab: f64,
    /// Cloner solution; absent for the attack-independent bound.
    pub attack: Option<AttackSolution>,
}

/// Key rate `beta I_AB - chi` at fixed `(eta_s, eta_t)`.
pub fn key_rate_point(
    scn: &CvScenario,
    obs: &ChannelObservation,
    method: Method,
) -> Result<RatePoint, CvError> {
    scn.validate()?;
    obs.validate()?;
    let i_ab = mutual_info(obs, scn.v)?;
    if method == Method::DrM2 {
        let chi = holevo_dr_m2_bound(scn.eta_ae, scn.v)?;
        return Ok(RatePoint {
            rate: scn.beta * i_ab - chi,
            chi,
            i_ab,
            attack: None,
        });
    }
    let att = solve_attack(scn, obs);
    let cm = build_cm(scn, &att)?;
    let chi = match method {
        Method::Rr => holevo_rr(&cm, obs.chi_hom())?,
        _ => holevo_dr_m1(&heterodyne_arm(&cm)?)?,
    };
    Ok(RatePoint {
        rate: scn.beta * i_ab - chi,
        chi,
        i_ab,
        attack: Some(att),
    })
}

/// Resolution of the worst-case search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// Grid points along `eta_s`, endpoints included.
    pub n_s: usize,
    /// Grid points along `eta_t`, endpoints included.
    pub n_t: usize,
    /// Extra points on the `eta_e = 0` edge of the feasible set.
    pub n_edge: usize,
    /// Number of best grid points refined by Nelder-Mead.
    pub starts: usize,
    /// Iteration cap per refinement.
    pub max_iters: u64,
    /// Simplex standard-deviation tolerance for the refinement.
    pub tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_s: 101,
            n_t: 101,
            n_edge: 101,
            starts: 5,
            max_iters: 300,
            tol: 1e-12,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), CvError> {
        check("n_s", self.n_s as f64, self.n_s >= 2, "need at least 2 points")?;
        check("n_t", self.n_t as f64, self.n_t >= 2, "need at least 2 points")?;
        check("tol", self.tol, self.tol > 0.0, "must be positive")
    }
}

/// Outcome of the minimisation over the uncharacterised channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstCase {
    /// Minimum over all feasible `(eta_s, eta_t)`.
    pub rate_a: f64,
    /// Location of the minimum; `None` when the bound does not depend on it.
    pub argmin: Option<(f64, f64)>,
    /// Rate without a bypass channel, `(eta_s, eta_t) = (0, 1)`, when that
    /// point is feasible and its `V_E` is within [`MAX_EVE_VARIANCE`].
    pub rate_b: Option<f64>,
    /// Number of feasible points visited by the grid stage.
    pub feasible_points: usize,
}

fn linspace(n: usize, i: usize) -> f64 {
    i as f64 / (n - 1) as f64
}

struct Landscape<'a> {
    scn: CvScenario,
    obs: &'a ChannelObservation,
    method: Method,
}

impl Landscape<'_> {
    /// Rate at `(eta_s, eta_t)`, or `None` outside the trusted feasible set.
    fn eval(&self, es: f64, et: f64) -> Option<f64> {
        if !(0.0..=1.0).contains(&es) || !(0.0..=1.0).contains(&et) {
            return None;
        }
        let scn = self.scn.with_channel(es, et);
        let att = solve_attack(&scn, self.obs);
        if !att.feasible || att.v_e > MAX_EVE_VARIANCE {
            return None;
        }
        key_rate_point(&scn, self.obs, self.method).ok().map(|p| p.rate)
    }
}

impl CostFunction for Landscape<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> Result<f64, ArgminError> {
        Ok(self.eval(p[0], p[1]).unwrap_or(f64::INFINITY))
    }
}

/// Minimises the key rate over the feasible `(eta_s, eta_t)` square.
///
/// Stage one evaluates a regular grid plus points along the `eta_e = 0`
/// edge, where the bypass carries all of Bob's signal and the minimum often
/// sits. Stage two runs Nelder-Mead from the best few points. Infeasible
/// points are skipped. The grid always contains `(0, 1)`, so `rate_a` never
/// exceeds `rate_b` when the latter is feasible.
pub fn worst_case_rate(
    base: &CvScenario,
    obs: &ChannelObservation,
    method: Method,
    grid: &GridSpec,
) -> Result<WorstCase, CvError> {
    base.validate()?;
    obs.validate()?;
    grid.validate()?;
    if method == Method::DrM2 {
        let r = key_rate_point(&base.with_channel(0.0, 1.0), obs, method)?.rate;
        return Ok(WorstCase {
            rate_a: r,
            argmin: None,
            rate_b: Some(r),
            feasible_points: 1,
        });
    }

    let land = Landscape {
        scn: *base,
        obs,
        method,
    };
    // Same trust rule as the grid, so the ordering below holds exactly.
    let rate_b = land.eval(0.0, 1.0);
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(grid.n_s * grid.n_t + grid.n_edge);
    for i in 0..grid.n_s {
        for j in 0..grid.n_t {
            pts.push((linspace(grid.n_s, i), linspace(grid.n_t, j)));
        }
    }
    let t = obs.eta_ch();
    let open = 1.0 - base.eta_ae;
    if grid.n_edge > 0 && open > 0.0 && t <= open {
        let et_min = 1.0 - t / open;
        for k in 0..grid.n_edge {
            let et = et_min + (1.0 - et_min) * k as f64 / grid.n_edge as f64;
            let es = (t / (open * (1.0 - et))).min(1.0);
            pts.push((es, et));
        }
    }
    let vals = par::map_indexed(pts.len(), |k| land.eval(pts[k].0, pts[k].1));
    let mut feas: Vec<(f64, (f64, f64))> = vals
        .iter()
        .zip(&pts)
        .filter_map(|(v, &p)| v.map(|r| (r, p)))
        .collect();
    if feas.is_empty() {
        return Err(CvError::EmptyFeasibleSet(format!(
            "eta_ae = {}, t_eq = {}, xi = {}: no grid point admits a physical cloner",
            base.eta_ae, obs.t_eq, obs.xi
        )));
    }
    let feasible_points = feas.len();
    feas.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1 .0.total_cmp(&b.1 .0)).then(a.1 .1.total_cmp(&b.1 .1)));
    let mut best = feas[0];

    let step_s = 0.5 / (grid.n_s - 1) as f64;
    let step_t = 0.5 / (grid.n_t - 1) as f64;
    let starts: Vec<(f64, f64)> = feas.iter().take(grid.starts).map(|f| f.1).collect();
    let refined = par::map_indexed(starts.len(), |k| {
        refine(&land, starts[k], step_s, step_t, grid)
    });
    for r in refined {
        let r = r?;
        if r.0 < best.0 {
            best = r;
        }
    }
    Ok(WorstCase {
        rate_a: best.0,
        argmin: Some(best.1),
        rate_b,
        feasible_points,
    })
}

fn refine(
    land: &Landscape<'_>,
    start: (f64, f64),
    step_s: f64,
    step_t: f64,
    grid: &GridSpec,
) -> Result<(f64, (f64, f64)), CvError> {
    let f0 = land.eval(start.0, start.1).unwrap_or(f64::INFINITY);
    // Point the simplex into the unit square so that edge starts stay useful.
    let ds = if start.0 + step_s <= 1.0 { step_s } else { -step_s };
    let dt = if start.1 + step_t <= 1.0 { step_t } else { -step_t };
    let simplex = vec![
        vec![start.0, start.1],
        vec![start.0 + ds, start.1],
        vec![start.0, start.1 + dt],
    ];
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(grid.tol)
        .map_err(|e| CvError::Optimizer(e.to_string()))?;
    let res = Executor::new(
        Landscape {
            scn: land.scn,
            obs: land.obs,
            method: land.method,
        },
        solver,
    )
    .configure(|s| s.max_iters(grid.max_iters))
    .run()
    .map_err(|e| CvError::Optimizer(e.to_string()))?;
    let state = res.state();
    let cost = state.get_best_cost();
    match state.get_best_param() {
        Some(p) if cost < f0 => Ok((cost, (p[0], p[1]))),
        _ => Ok((f0, start)),
    }
}

/// Largest bypass transmissivity compatible with the observation at the
/// scenario's `eta_t`: there the cloner is fully opaque (`eta_e = 0`).
pub fn eta_s_limit(base: &CvScenario, obs: &ChannelObservation) -> Option<f64> {
    let open = (1.0 - base.eta_ae) * (1.0 - base.eta_t);
    if open <= 0.0 {
        return None;
    }
    Some(obs.eta_ch() / open)
}

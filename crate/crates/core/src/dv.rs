//! BB84 key rates when Eve collects only part of Alice's beam.
//!
//! The rate bound credits two kinds of detection events to the users:
//! rounds where no photon reached Eve (`S0`) and rounds with one photon
//! that Eve did receive (`S11`), whose phase error is bounded by `eps11`.
//! Everything else is assumed fully known to Eve.

use argmin::core::{CostFunction, Error as ArgminError, Executor, State};
use argmin::solver::goldensectionsearch::GoldenSectionSearch;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DvError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    Invalid {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("mu search failed: {0}")]
    Optimizer(String),
}

fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), DvError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(DvError::Invalid { name, value, reason })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// Ideal single-photon source.
    Sps,
    /// Weak coherent pulses with Poisson photon number.
    #[default]
    Wcp,
}

/// Source, channel and detector parameters of a BB84 link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DvParams {
    /// Picked by the caller rather than read from configuration.
    #[serde(skip)]
    pub source: Source,
    /// Mean photon number per pulse (ignored for the single-photon source).
    pub mu: f64,
    pub eta_ch: f64,
    pub eta_d: f64,
    /// Dark or background click probability per detector per pulse.
    pub p_dc: f64,
    /// Misalignment error probability.
    pub e_d: f64,
    /// Error-correction inefficiency.
    pub f: f64,
    /// Basis-sifting factor.
    pub q: f64,
    pub eta_ae: f64,
}

impl Default for DvParams {
    /// Nominal link: 30 dB channel and the detector figures used throughout.
    fn default() -> Self {
        Self {
            source: Source::Wcp,
            mu: 0.5,
            eta_ch: 1e-3,
            eta_d: 0.9,
            p_dc: 1e-7,
            e_d: 0.01,
            f: 1.16,
            q: 1.0,
            eta_ae: 1.0,
        }
    }
}

impl DvParams {
    pub fn validate(&self) -> Result<(), DvError> {
        check("mu", self.mu, self.mu > 0.0, "must be positive")?;
        check("eta_ch", self.eta_ch, self.eta_ch > 0.0 && self.eta_ch <= 1.0, "must lie in (0, 1]")?;
        check("eta_d", self.eta_d, self.eta_d > 0.0 && self.eta_d <= 1.0, "must lie in (0, 1]")?;
        check("p_dc", self.p_dc, (0.0..1.0).contains(&self.p_dc), "must lie in [0, 1)")?;
        check("e_d", self.e_d, (0.0..=0.5).contains(&self.e_d), "must lie in [0, 0.5]")?;
        check("f", self.f, self.f >= 1.0, "must be at least 1")?;
        check("q", self.q, self.q > 0.0 && self.q <= 1.0, "must lie in (0, 1]")?;
        check("eta_ae", self.eta_ae, self.eta_ae > 0.0 && self.eta_ae <= 1.0, "must lie in (0, 1]")
    }

    /// Overall photon detection probability.
    pub fn eta(&self) -> f64 {
        self.eta_ch * self.eta_d
    }
}

/// Gain and error rate seen by the users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DvObservables {
    pub gain: f64,
    pub qber: f64,
}

/// Probabilities of the two photon-number events credited by the bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonBounds {
    /// Eve's aperture receives no photon.
    pub p0_eve: f64,
    /// One photon emitted and it enters Eve's aperture.
    pub p11: f64,
}

/// Terms of the restricted rate bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTerms {
    pub s0: f64,
    pub s11: f64,
    pub eps11: f64,
    pub rate: f64,
}

/// Binary entropy in bits.
pub fn binary_entropy(x: f64) -> Result<f64, DvError> {
    check("x", x, (0.0..=1.0).contains(&x), "must lie in [0, 1]")?;
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

fn h(x: f64) -> f64 {
    binary_entropy(x.clamp(0.0, 1.0)).unwrap_or(0.0)
}

/// Gain and QBER of the honest channel.
///
/// A click from signal light is wrong with probability `e_d`; a click from
/// dark counts alone is wrong half of the time.
pub fn channel_observables(p: &DvParams) -> DvObservables {
    let signal = match p.source {
        Source::Wcp => -(-p.eta() * p.mu).exp_m1(),
        Source::Sps => p.eta(),
    };
    let quiet = (1.0 - p.p_dc) * (1.0 - p.p_dc);
    let gain = 1.0 - quiet * (1.0 - signal);
    let errors = p.e_d * signal + 0.5 * (gain - signal);
    DvObservables {
        gain,
        qber: if gain > 0.0 { errors / gain } else { 0.5 },
    }
}

pub fn photon_number_bounds(p: &DvParams) -> PhotonBounds {
    match p.source {
        Source::Sps => PhotonBounds {
            p0_eve: 1.0 - p.eta_ae,
            p11: p.eta_ae,
        },
        Source::Wcp => PhotonBounds {
            p0_eve: (-p.mu * p.eta_ae).exp(),
            p11: p.mu * p.eta_ae * (-p.mu).exp(),
        },
    }
}

/// Restricted-eavesdropper bound with its intermediate terms.
///
/// `qQ[-f h(E) + (S11/Q)(1 - h(eps11)) + S0/Q]`. For the single-photon
/// source the best of three valid bounds is returned: this one, the
/// variant that credits every click as a single photon with phase error
/// `eps11`, and the unrestricted single-photon bound with error `E`.
pub fn restricted_rate_terms(p: &DvParams, obs: &DvObservables) -> RateTerms {
    let b = photon_number_bounds(p);
    let (gain, qber) = (obs.gain, obs.qber);
    let s0 = (gain - (1.0 - b.p0_eve)).max(0.0);
    let s11 = (gain - (1.0 - b.p11)).max(0.0);
    let eps11 = if s11 > 0.0 {
        (qber * gain / s11).min(0.5)
    } else {
        0.5
    };
    let leak = -p.f * h(qber);
    let mut rate = p.q * (gain * leak + s11 * (1.0 - h(eps11)) + s0);
    if p.source == Source::Sps {
        let all_single = p.q * gain * (leak + 1.0 - h(eps11));
        let unrestricted = p.q * gain * (leak + 1.0 - h(qber));
        rate = rate.max(all_single).max(unrestricted);
    }
    RateTerms {
        s0,
        s11,
        eps11,
        rate,
    }
}

/// Signed key rate in bits per pulse.
pub fn restricted_rate(p: &DvParams, obs: &DvObservables) -> f64 {
    restricted_rate_terms(p, obs).rate
}

/// Key rate of the honest channel at the parameters in `p`.
pub fn rate_at(p: &DvParams) -> f64 {
    restricted_rate(p, &channel_observables(p))
}

/// Search settings for [`optimize_mu`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MuSearch {
    pub mu_min: f64,
    pub mu_max: f64,
    /// Log-spaced points in the coarse scan.
    pub scan_points: usize,
    /// Golden-section tolerance in natural-log units of `mu`.
    pub tol: f64,
}

impl Default for MuSearch {
    fn default() -> Self {
        Self {
            mu_min: 1e-4,
            mu_max: 1e3,
            scan_points: 200,
            tol: 1e-6,
        }
    }
}

impl MuSearch {
    pub fn validate(&self) -> Result<(), DvError> {
        check("mu_min", self.mu_min, self.mu_min > 0.0, "must be positive")?;
        check("mu_max", self.mu_max, self.mu_max > self.mu_min, "must exceed mu_min")?;
        check("scan_points", self.scan_points as f64, self.scan_points >= 3, "need at least 3 points")?;
        check("tol", self.tol, self.tol > 0.0, "must be positive")
    }
}

/// Optimal intensity and the rate it achieves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuOptimum {
    pub mu_opt: f64,
    pub rate: f64,
}

struct NegRate(DvParams);

impl CostFunction for NegRate {
    type Param = f64;
    type Output = f64;

    fn cost(&self, log_mu: &f64) -> Result<f64, ArgminError> {
        let p = DvParams {
            mu: log_mu.exp(),
            ..self.0
        };
        Ok(-rate_at(&p))
    }
}

/// Maximises the rate over `mu`: coarse log scan, then golden-section
/// search in `ln mu` between the neighbours of the best scan point.
///
/// When no intensity gives a positive rate the result is a zero rate at
/// the scan maximum.
pub fn optimize_mu(p: &DvParams, search: &MuSearch) -> Result<MuOptimum, DvError> {
    p.validate()?;
    search.validate()?;
    let (lo, hi) = (search.mu_min.ln(), search.mu_max.ln());
    let n = search.scan_points;
    let grid: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let rates = par::map_indexed_seq(n, |i| rate_at(&DvParams { mu: grid[i].exp(), ..*p }));
    let best = (0..n)
        .max_by(|&a, &b| rates[a].total_cmp(&rates[b]).then(b.cmp(&a)))
        .unwrap_or(0);
    let scan = MuOptimum {
        mu_opt: grid[best].exp(),
        rate: rates[best],
    };
    if scan.rate <= 0.0 {
        return Ok(MuOptimum { rate: 0.0, ..scan });
    }
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(n - 1)];
    let solver = GoldenSectionSearch::new(a, b)
        .and_then(|s| s.with_tolerance(search.tol))
        .map_err(|e| DvError::Optimizer(e.to_string()))?;
    let res = Executor::new(NegRate(*p), solver)
        .configure(|s| s.param(grid[best]).max_iters(500))
        .run()
        .map_err(|e| DvError::Optimizer(e.to_string()))?;
    let state = res.state();
    let refined = -state.get_best_cost();
    match state.get_best_param() {
        Some(&x) if refined > scan.rate => Ok(MuOptimum {
            mu_opt: x.exp(),
            rate: refined,
        }),
        _ => Ok(scan),
    }
}

/// Row of an `eta_ae` sweep comparing the two sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceComparison {
    pub eta_ae: f64,
    pub wcp: MuOptimum,
    pub sps_rate: f64,
}

/// Optimised weak-coherent rate and single-photon rate at each `eta_ae`.
pub fn compare_sources(
    base: &DvParams,
    eta_ae: &[f64],
    search: &MuSearch,
) -> Result<Vec<SourceComparison>, DvError> {
    par::map_indexed(eta_ae.len(), |i| {
        let wcp = DvParams {
            source: Source::Wcp,
            eta_ae: eta_ae[i],
            ..*base
        };
        let sps = DvParams {
            source: Source::Sps,
            ..wcp
        };
        sps.validate()?;
        Ok(SourceComparison {
            eta_ae: eta_ae[i],
            wcp: optimize_mu(&wcp, search)?,
            sps_rate: rate_at(&sps),
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_endpoints() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(binary_entropy(1.5).is_err());
    }

    #[test]
    fn dark_counts_only() {
        let p = DvParams {
            eta_ch: 1e-300,
            ..DvParams::default()
        };
        let o = channel_observables(&p);
        assert!((o.gain - (1.0 - (1.0 - 1e-7f64).powi(2))).abs() < 1e-20);
        assert!((o.qber - 0.5).abs() < 1e-6);
    }

    #[test]
    fn bright_signal_limit() {
        let p = DvParams {
            p_dc: 0.0,
            mu: 1e9,
            ..DvParams::default()
        };
        let o = channel_observables(&p);
        assert!((o.gain - 1.0).abs() < 1e-12);
        assert!((o.qber - p.e_d).abs() < 1e-12);
    }

    #[test]
    fn photon_bounds_examples() {
        let sps = DvParams {
            source: Source::Sps,
            eta_ae: 0.3,
            ..DvParams::default()
        };
        let b = photon_number_bounds(&sps);
        assert!((b.p0_eve - 0.7).abs() < 1e-15 && (b.p11 - 0.3).abs() < 1e-15);
    }

    #[test]
    fn unrestricted_wcp_has_no_key() {
        let p = DvParams::default();
        let o = optimize_mu(&p, &MuSearch::default()).unwrap();
        assert_eq!(o.rate, 0.0);
    }
}

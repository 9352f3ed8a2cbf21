//! Gaussian-beam link budget and the monitoring bounds on how large an
//! undetected eavesdropper can be.
//!
//! Alice sits at `z = 0` on the satellite, Bob at `z = L` on the ground.
//! A LIDAR on either end fails to see an object of radius `r_E` at range
//! `z` only if the echo stays below its noise floor, which caps `r_E(z)`.
//! From that cap follow `eta_AE(z)` (Eve's share of Alice's beam) and
//! `eta_EB(z)` (how much of a focused beam from Eve lands in Bob's
//! telescope).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Mean Earth radius used for slant ranges, m.
pub const EARTH_RADIUS: f64 = 6.371e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LidarError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    Invalid {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("position z = {z} is not short of the link length {l}")]
    BeyondReceiver { z: f64, l: f64 },
    #[error("zenith angle {0} rad must lie in [0, pi/2)")]
    Angle(f64),
}

fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), LidarError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(LidarError::Invalid { name, value, reason })
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), LidarError> {
    check(name, value, value > 0.0, "must be positive")
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Gaussian beam launched from a transmitter of radius `w0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamParams {
    pub w0: f64,
    pub lambda: f64,
    /// Beam-quality factor; 1 for an ideal Gaussian beam.
    pub m2: f64,
}

impl BeamParams {
    pub fn validate(&self) -> Result<(), LidarError> {
        positive("w0", self.w0)?;
        positive("lambda", self.lambda)?;
        check("m2", self.m2, self.m2 >= 1.0, "must be at least 1")
    }

    pub fn rayleigh_range(&self) -> f64 {
        PI * self.w0 * self.w0 / self.lambda
    }

    /// Far-field width `lambda z M^2 / (pi w0)`, the large-`z` limit of
    /// [`beam_width`].
    pub fn far_field_width(&self, z: f64) -> f64 {
        self.lambda * z * self.m2 / (PI * self.w0)
    }
}

/// Beam radius after propagating a distance `z`.
pub fn beam_width(z: f64, beam: &BeamParams) -> f64 {
    beam.w0 * (z * beam.m2 / beam.rayleigh_range()).hypot(1.0)
}

/// Fraction of a centred Gaussian beam of radius `w` passing an aperture of
/// radius `rho`. An infinite aperture collects everything; an infinitely
/// wide beam delivers nothing.
pub fn aperture_transmittance(rho: f64, w: f64) -> f64 {
    if rho.is_infinite() || w == 0.0 {
        return 1.0;
    }
    -(-2.0 * rho * rho / (w * w)).exp_m1()
}

/// Alice–Bob link: range, telescope radii and the optics of the signal beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub l: f64,
    pub r_a: f64,
    pub r_b: f64,
    pub lambda: f64,
    pub m2: f64,
}

impl LinkGeometry {
    pub fn validate(&self) -> Result<(), LidarError> {
        positive("l", self.l)?;
        positive("r_a", self.r_a)?;
        positive("r_b", self.r_b)?;
        self.signal_beam().validate()
    }

    /// Alice's beam, with its waist equal to her telescope radius.
    pub fn signal_beam(&self) -> BeamParams {
        BeamParams {
            w0: self.r_a,
            lambda: self.lambda,
            m2: self.m2,
        }
    }

    /// Diffraction-limited Alice–Bob transmittance.
    pub fn eta_ab(&self) -> f64 {
        aperture_transmittance(self.r_b, beam_width(self.l, &self.signal_beam()))
    }
}

/// Width at Bob of a beam that Eve, at `z` with radius `r_e`, focuses onto
/// him with ideal optics.
pub fn focused_beam_width(z: f64, r_e: f64, geom: &LinkGeometry, lambda: f64) -> Result<f64, LidarError> {
    if z >= geom.l {
        return Err(LidarError::BeyondReceiver { z, l: geom.l });
    }
    check("z", z, z >= 0.0, "must be non-negative")?;
    check("r_e", r_e, r_e > 0.0 || r_e.is_infinite(), "must be positive")?;
    Ok(lambda * (geom.l - z) / (PI * r_e))
}

/// Microwave radar on the ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadarParams {
    pub p_t: f64,
    pub r_ant: f64,
    pub lambda: f64,
    /// Antenna aperture efficiency.
    pub efficiency: f64,
    pub noise_figure_db: f64,
    /// Effective noise bandwidth, Hz.
    pub bandwidth: f64,
    /// Receiver noise temperature, K.
    pub temperature: f64,
    pub kappa_db: f64,
}

impl Default for RadarParams {
    /// Airport-class dish beside the optical ground station.
    fn default() -> Self {
        Self {
            p_t: 1e5,
            r_ant: 2.0,
            lambda: 0.04,
            efficiency: 0.6,
            noise_figure_db: 8.0,
            bandwidth: 2.5e6,
            temperature: 290.0,
            kappa_db: 7.0,
        }
    }
}

impl RadarParams {
    pub fn validate(&self) -> Result<(), LidarError> {
        positive("p_t", self.p_t)?;
        positive("r_ant", self.r_ant)?;
        positive("lambda", self.lambda)?;
        check("efficiency", self.efficiency, self.efficiency > 0.0 && self.efficiency <= 1.0, "must lie in (0, 1]")?;
        check("noise_figure_db", self.noise_figure_db, true, "")?;
        positive("bandwidth", self.bandwidth)?;
        positive("temperature", self.temperature)?;
        check("kappa_db", self.kappa_db, true, "")
    }

    pub fn gain(&self) -> f64 {
        4.0 * PI * self.efficiency * PI * self.r_ant * self.r_ant / (self.lambda * self.lambda)
    }

    /// Thermal noise floor `k_B T F_n B`.
    pub fn p_min(&self) -> f64 {
        BOLTZMANN * self.temperature * db_to_linear(self.noise_figure_db) * self.bandwidth
    }

    pub fn kappa(&self) -> f64 {
        db_to_linear(self.kappa_db)
    }
}

/// Largest radar cross section that stays below the noise floor at
/// `distance`.
pub fn radar_cross_section_bound(distance: f64, radar: &RadarParams) -> f64 {
    radar_cross_section(distance, radar.p_t, radar.gain(), radar.lambda, radar.p_min(), radar.kappa())
}

fn radar_cross_section(d: f64, p_t: f64, gain: f64, lambda: f64, p_min: f64, kappa: f64) -> f64 {
    p_min * (4.0 * PI).powi(3) * kappa * d.powi(4) / (p_t * gain * gain * lambda * lambda)
}

/// Radius of the sphere whose cross section is `sigma`.
pub fn sphere_radius(sigma: f64) -> f64 {
    (sigma / PI).sqrt()
}

/// Optical LIDAR on one end of the link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidarConfig {
    pub p_t: f64,
    pub kappa: f64,
    /// Reflectivity assumed for Eve's surfaces.
    pub alpha: f64,
    pub p_min: f64,
    pub beam: BeamParams,
}

impl LidarConfig {
    pub fn validate(&self) -> Result<(), LidarError> {
        positive("p_t", self.p_t)?;
        check("kappa", self.kappa, self.kappa > 0.0 && self.kappa <= 1.0, "must lie in (0, 1]")?;
        check("alpha", self.alpha, self.alpha > 0.0 && self.alpha <= 1.0, "must lie in (0, 1]")?;
        positive("p_min", self.p_min)?;
        self.beam.validate()
    }

    /// The same instrument treated with the radar equation, using an
    /// ideal optical antenna of the transmitter's radius.
    pub fn radar_equivalent_radius(&self, distance: f64) -> f64 {
        let b = &self.beam;
        let gain = 4.0 * PI * PI * b.w0 * b.w0 / (b.lambda * b.lambda);
        sphere_radius(radar_cross_section(distance, self.p_t, gain, b.lambda, self.p_min, self.kappa))
    }
}

/// Upper bound on the radius of an object that escapes detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SizeBound {
    Finite(f64),
    /// Echoes from any object at this range sit below the noise floor.
    Unbounded,
}

impl SizeBound {
    /// Radius in meters, infinite when unbounded.
    pub fn radius(self) -> f64 {
        match self {
            SizeBound::Finite(r) => r,
            SizeBound::Unbounded => f64::INFINITY,
        }
    }

    pub fn min(self, other: SizeBound) -> SizeBound {
        match (self, other) {
            (SizeBound::Finite(a), SizeBound::Finite(b)) => SizeBound::Finite(a.min(b)),
            (SizeBound::Unbounded, b) => b,
            (a, SizeBound::Unbounded) => a,
        }
    }
}

/// Log argument of the size bound, `2 P_min kappa z^2 / (alpha P_T W0^2)`.
fn echo_ratio(z: f64, cfg: &LidarConfig) -> f64 {
    alpha_min(z, cfg) / cfg.alpha
}

/// Largest undetected radius at range `z` from the LIDAR.
pub fn lidar_size_bound(z: f64, cfg: &LidarConfig) -> SizeBound {
    let a = echo_ratio(z, cfg);
    if a >= 1.0 {
        return SizeBound::Unbounded;
    }
    SizeBound::Finite((-(-a).ln_1p()).sqrt() * cfg.beam.far_field_width(z))
}

/// Reflectivity below which the bound at range `z` is lost.
pub fn alpha_min(z: f64, cfg: &LidarConfig) -> f64 {
    2.0 * cfg.p_min * cfg.kappa * z * z / (cfg.p_t * cfg.beam.w0 * cfg.beam.w0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Night-time Earthshine from the Moon seen by the satellite.
    Satellite,
    /// Sky background seen by the ground station.
    Ground,
}

/// Background-light constants. None of these are fixed by the link model
/// itself; the defaults are typical night-time figures at 800 nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Background {
    pub albedo_earth: f64,
    pub albedo_moon: f64,
    pub moon_radius: f64,
    pub earth_moon_distance: f64,
    /// Solar spectral irradiance, W m^-2 nm^-1.
    pub h_sun: f64,
    /// Night-sky spectral radiance, W m^-2 sr^-1 nm^-1.
    pub h_sky: f64,
    /// Receiver field of view, sr.
    pub fov: f64,
    /// Filter bandwidth, nm.
    pub filter: f64,
}

impl Default for Background {
    fn default() -> Self {
        Self {
            albedo_earth: 0.3,
            albedo_moon: 0.12,
            moon_radius: 1.7374e6,
            earth_moon_distance: 3.844e8,
            h_sun: 1.1,
            h_sky: 1.5e-6,
            fov: PI * 0.25e-3 * 0.25e-3,
            filter: 1.0,
        }
    }
}

impl Background {
    pub fn validate(&self) -> Result<(), LidarError> {
        check("albedo_earth", self.albedo_earth, (0.0..=1.0).contains(&self.albedo_earth), "must lie in [0, 1]")?;
        check("albedo_moon", self.albedo_moon, (0.0..=1.0).contains(&self.albedo_moon), "must lie in [0, 1]")?;
        positive("moon_radius", self.moon_radius)?;
        positive("earth_moon_distance", self.earth_moon_distance)?;
        check("h_sun", self.h_sun, self.h_sun >= 0.0, "must be non-negative")?;
        check("h_sky", self.h_sky, self.h_sky >= 0.0, "must be non-negative")?;
        check("fov", self.fov, self.fov >= 0.0, "must be non-negative")?;
        check("filter", self.filter, self.filter >= 0.0, "must be non-negative")
    }
}

/// Background power collected by a telescope of radius `aperture`.
pub fn background_power(side: Side, bg: &Background, aperture: f64) -> f64 {
    match side {
        Side::Satellite => {
            bg.albedo_earth
                * bg.albedo_moon
                * bg.moon_radius.powi(2)
                * aperture.powi(2)
                * (bg.fov / bg.earth_moon_distance.powi(2))
                * bg.h_sun
                * bg.filter
        }
        Side::Ground => bg.h_sky * bg.fov * PI * aperture * aperture * bg.filter,
    }
}

/// One position along the link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub z: f64,
    pub r_e_sat: f64,
    pub r_e_ground: f64,
    /// Tighter of the two bounds.
    pub r_e: f64,
    pub eta_ae: f64,
    pub eta_eb: f64,
    /// Alice's beam width at `z`.
    pub w: f64,
    /// Width at Bob of Eve's focused beam.
    pub w_e: f64,
    /// Bound from the ground LIDAR treated with the radar equation.
    pub r_e_radar: f64,
    /// Reflectivity needed for at least one finite bound at `z`.
    pub alpha_min: f64,
}

fn profile_point(z: f64, r_e: SizeBound, geom: &LinkGeometry, sat: &LidarConfig, ground: &LidarConfig) -> ProfilePoint {
    let (from_sat, from_ground) = (z, geom.l - z);
    let r_e_sat = lidar_size_bound(from_sat, sat).radius();
    let r_e_ground = lidar_size_bound(from_ground, ground).radius();
    let r = r_e.radius();
    let w = beam_width(z, &geom.signal_beam());
    let w_e = if r == 0.0 {
        f64::INFINITY
    } else {
        geom.lambda * from_ground / (PI * r)
    };
    ProfilePoint {
        z,
        r_e_sat,
        r_e_ground,
        r_e: r,
        eta_ae: aperture_transmittance(r, w),
        eta_eb: if r == 0.0 { 0.0 } else { aperture_transmittance(geom.r_b, w_e) },
        w,
        w_e,
        r_e_radar: ground.radar_equivalent_radius(from_ground),
        alpha_min: alpha_min(from_sat, sat).min(alpha_min(from_ground, ground)),
    }
}

/// `eta_AE(z)` and `eta_EB(z)` on `n_points` evenly spaced positions from
/// Alice to Bob, with both LIDARs watching.
pub fn eve_efficiency_profile(
    geom: &LinkGeometry,
    sat: &LidarConfig,
    ground: &LidarConfig,
    n_points: usize,
) -> Result<Vec<ProfilePoint>, LidarError> {
    eve_profile_with(geom, sat, ground, n_points, |z| {
        lidar_size_bound(z, sat).min(lidar_size_bound(geom.l - z, ground))
    })
}

/// Profile for a caller-supplied radius bound.
pub fn eve_profile_with<F>(
    geom: &LinkGeometry,
    sat: &LidarConfig,
    ground: &LidarConfig,
    n_points: usize,
    r_e: F,
) -> Result<Vec<ProfilePoint>, LidarError>
where
    F: Fn(f64) -> SizeBound + Sync,
{
    geom.validate()?;
    sat.validate()?;
    ground.validate()?;
    check("n_points", n_points as f64, n_points >= 2, "need at least 2 points")?;
    let step = geom.l / (n_points - 1) as f64;
    Ok(par::map_indexed(n_points, |i| {
        let z = if i == n_points - 1 { geom.l } else { step * i as f64 };
        profile_point(z, r_e(z), geom, sat, ground)
    }))
}

/// Maxima over a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileMaxima {
    pub eta_ae: f64,
    pub eta_eb: f64,
    pub r_e: f64,
    /// Reflectivity needed for a finite bound everywhere on the link.
    pub alpha_min: f64,
}

pub fn profile_maxima(profile: &[ProfilePoint]) -> ProfileMaxima {
    profile.iter().fold(
        ProfileMaxima {
            eta_ae: 0.0,
            eta_eb: 0.0,
            r_e: 0.0,
            alpha_min: 0.0,
        },
        |m, p| ProfileMaxima {
            eta_ae: m.eta_ae.max(p.eta_ae),
            eta_eb: m.eta_eb.max(p.eta_eb),
            r_e: m.r_e.max(p.r_e),
            alpha_min: m.alpha_min.max(p.alpha_min),
        },
    )
}

/// Distance from a ground station to a satellite at `altitude` seen at
/// zenith angle `theta`, over a spherical Earth.
pub fn slant_range(altitude: f64, theta: f64) -> Result<f64, LidarError> {
    if !(0.0..PI / 2.0).contains(&theta) {
        return Err(LidarError::Angle(theta));
    }
    positive("altitude", altitude)?;
    let (r, (s, c)) = (EARTH_RADIUS, theta.sin_cos());
    Ok(((r + altitude).powi(2) - (r * s).powi(2)).sqrt() - r * c)
}

/// Losses on top of diffraction for the Alice–Bob budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkLosses {
    /// Zenith extinction coefficient; transmission is `exp(-beta sec theta)`.
    pub beta: f64,
    pub detection: f64,
    pub optics: f64,
}

impl Default for LinkLosses {
    fn default() -> Self {
        Self {
            beta: 0.7,
            detection: 0.5,
            optics: 0.8,
        }
    }
}

impl LinkLosses {
    pub fn validate(&self) -> Result<(), LidarError> {
        check("beta", self.beta, self.beta >= 0.0, "must be non-negative")?;
        check("detection", self.detection, self.detection > 0.0 && self.detection <= 1.0, "must lie in (0, 1]")?;
        check("optics", self.optics, self.optics > 0.0 && self.optics <= 1.0, "must lie in (0, 1]")
    }

    pub fn transmission(&self, theta: f64) -> f64 {
        (-self.beta / theta.cos()).exp() * self.detection * self.optics
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElevationRow {
    pub theta: f64,
    pub d: f64,
    pub max_eta_ae: f64,
    pub max_eta_eb: f64,
    pub eta_ab_diffraction: f64,
    pub eta_ab_total: f64,
    pub alpha_min: f64,
}

/// Profile maxima as the satellite moves away from zenith.
pub fn elevation_sweep(
    setup: &MonitorSetup,
    thetas: &[f64],
    n_points: usize,
) -> Result<Vec<ElevationRow>, LidarError> {
    setup.validate()?;
    let rows = par::map_indexed(thetas.len(), |i| {
        let theta = thetas[i];
        let d = slant_range(setup.l, theta)?;
        let geom = LinkGeometry { l: d, ..setup.geometry() };
        let m = profile_maxima(&eve_efficiency_profile(&geom, &setup.satellite(), &setup.ground(), n_points)?);
        let eta_ab = geom.eta_ab();
        Ok(ElevationRow {
            theta,
            d,
            max_eta_ae: m.eta_ae,
            max_eta_eb: m.eta_eb,
            eta_ab_diffraction: eta_ab,
            eta_ab_total: eta_ab * setup.losses.transmission(theta),
            alpha_min: m.alpha_min,
        })
    });
    rows.into_iter().collect()
}

/// Everything needed to monitor one pass: link optics, both LIDARs,
/// background and extra losses. The default is the nominal low-orbit
/// configuration with 1 W on each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonitorSetup {
    /// Link length at zenith (orbit altitude), m.
    pub l: f64,
    pub r_a: f64,
    pub r_b: f64,
    pub lambda: f64,
    pub m2: f64,
    pub p_t_sat: f64,
    pub p_t_ground: f64,
    pub kappa: f64,
    pub alpha: f64,
    /// Fixed noise floors; when absent they follow from `background`.
    pub p_min_sat: Option<f64>,
    pub p_min_ground: Option<f64>,
    pub background: Background,
    pub losses: LinkLosses,
}

impl Default for MonitorSetup {
    fn default() -> Self {
        Self {
            l: 5e5,
            r_a: 0.15,
            r_b: 0.5,
            lambda: 800e-9,
            m2: 3.0,
            p_t_sat: 1.0,
            p_t_ground: 1.0,
            kappa: 0.25,
            alpha: 0.1,
            p_min_sat: None,
            p_min_ground: None,
            background: Background::default(),
            losses: LinkLosses::default(),
        }
    }
}

impl MonitorSetup {
    pub fn validate(&self) -> Result<(), LidarError> {
        self.geometry().validate()?;
        self.background.validate()?;
        self.losses.validate()?;
        self.satellite().validate()?;
        self.ground().validate()
    }

    pub fn with_power(self, p_t: f64) -> Self {
        Self {
            p_t_sat: p_t,
            p_t_ground: p_t,
            ..self
        }
    }

    pub fn geometry(&self) -> LinkGeometry {
        LinkGeometry {
            l: self.l,
            r_a: self.r_a,
            r_b: self.r_b,
            lambda: self.lambda,
            m2: self.m2,
        }
    }

    fn lidar(&self, p_t: f64, p_min: f64, w0: f64) -> LidarConfig {
        LidarConfig {
            p_t,
            kappa: self.kappa,
            alpha: self.alpha,
            p_min,
            beam: BeamParams {
                w0,
                lambda: self.lambda,
                m2: self.m2,
            },
        }
    }

    /// LIDAR on the satellite, sharing Alice's telescope.
    pub fn satellite(&self) -> LidarConfig {
        let p_min = self
            .p_min_sat
            .unwrap_or_else(|| background_power(Side::Satellite, &self.background, self.r_a));
        self.lidar(self.p_t_sat, p_min, self.r_a)
    }

    /// LIDAR at the ground station, sharing Bob's telescope.
    pub fn ground(&self) -> LidarConfig {
        let p_min = self
            .p_min_ground
            .unwrap_or_else(|| background_power(Side::Ground, &self.background, self.r_b));
        self.lidar(self.p_t_ground, p_min, self.r_b)
    }

    pub fn profile(&self, n_points: usize) -> Result<Vec<ProfilePoint>, LidarError> {
        self.validate()?;
        eve_efficiency_profile(&self.geometry(), &self.satellite(), &self.ground(), n_points)
    }

    /// Dual-LIDAR profile at a single position `0 <= z <= l`.
    pub fn point(&self, z: f64) -> Result<ProfilePoint, LidarError> {
        self.validate()?;
        check("z", z, (0.0..=self.l).contains(&z), "must lie on the link")?;
        let (sat, ground) = (self.satellite(), self.ground());
        let r_e = lidar_size_bound(z, &sat).min(lidar_size_bound(self.l - z, &ground));
        Ok(profile_point(z, r_e, &self.geometry(), &sat, &ground))
    }
}

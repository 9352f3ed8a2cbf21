//! Scenario runner behind the `satqkd` binary.
//!
//! A scenario file picks a mode, a sweep axis and the fixed engine
//! parameters; [`run_scenario`] turns it into a [`ResultTable`].
//! Points are evaluated through [`satqkd_core::par::map_indexed`] and
//! reassembled in sweep order, so the table never depends on the number
//! of worker threads.

pub mod scenario;
pub mod table;

use std::path::Path;

use thiserror::Error;

use satqkd_core::cv::{self, CvError};
use satqkd_core::dv::{self, DvParams};
use satqkd_core::lidar;
use satqkd_core::par;

pub use scenario::{Mode, Scale, Scenario, Series, Sweep};
pub use table::{Format, ResultTable};

use scenario::Target;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error("run failed: {0}")]
    Runtime(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status: 1 for bad input, 2 for failures while running,
    /// 3 for file-system trouble.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    Scenario::parse(&text).map_err(|e| match e {
        CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_output(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

/// One fully configured evaluation.
#[derive(Debug, Clone)]
pub struct Point {
    pub series: Option<f64>,
    pub x: f64,
    pub scenario: Scenario,
}

fn invalid(at: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{at}: {e}"))
}

/// Expands the sweep (and series) into points and checks every engine
/// invariant before anything is computed.
pub fn expand(s: &Scenario) -> Result<Vec<Point>, CliError> {
    s.validate_structure()?;
    let sweep_target = s.resolve(&s.sweep.variable)?;
    let series: Vec<(Option<f64>, Scenario)> = match &s.series {
        None => vec![(None, s.clone())],
        Some(ser) => {
            let t = s.resolve(&ser.variable)?;
            ser.values
                .iter()
                .map(|&v| Ok((Some(v), s.set(&t, v).ok_or_else(|| invalid(&ser.variable, "cannot be set"))?)))
                .collect::<Result<_, CliError>>()?
        }
    };
    let xs = s.sweep.values();
    let mut points = Vec::with_capacity(series.len() * xs.len());
    for (sv, base) in &series {
        for &x in &xs {
            let scenario = base
                .set(&sweep_target, x)
                .ok_or_else(|| invalid(&s.sweep.variable, "cannot be set"))?;
            let at = match sv {
                Some(v) => format!("{} = {v:e}, {} = {x:e}", s.series.as_ref().map_or("", |r| &r.variable), s.sweep.variable),
                None => format!("{} = {x:e}", s.sweep.variable),
            };
            check_point(&scenario, &sweep_target, x).map_err(|e| invalid(&at, e))?;
            points.push(Point {
                series: *sv,
                x,
                scenario,
            });
        }
    }
    Ok(points)
}

fn check_point(s: &Scenario, target: &Target, x: f64) -> Result<(), String> {
    let mode = s.mode;
    if mode.cv_method().is_some() {
        s.cv.validate().map_err(|e| e.to_string())?;
        s.channel.validate().map_err(|e| e.to_string())?;
    } else if let Some(source) = mode.dv_source() {
        DvParams { source, ..s.dv }.validate().map_err(|e| e.to_string())?;
    } else {
        s.lidar.validate().map_err(|e| e.to_string())?;
        if mode == Mode::LidarProfile {
            s.radar.validate().map_err(|e| e.to_string())?;
        }
        if *target == Target::Axis {
            match mode {
                Mode::LidarProfile if !(0.0..=s.lidar.l).contains(&x) => {
                    return Err(format!("z must lie in [0, {}]", s.lidar.l));
                }
                Mode::LidarElevation if !(0.0..std::f64::consts::FRAC_PI_2).contains(&x) => {
                    return Err("theta must lie in [0, pi/2)".into());
                }
                _ => {}
            }
        }
    }
    Ok(())
}

/// Whether a CV sweep fixes the bypass channel or searches over it.
fn fixed_channel(s: &Scenario) -> bool {
    matches!(s.sweep.variable.as_str(), "eta_s" | "eta_t")
        || s.series.as_ref().is_some_and(|r| matches!(r.variable.as_str(), "eta_s" | "eta_t"))
}

pub fn columns(s: &Scenario) -> Vec<String> {
    let mut cols: Vec<&str> = Vec::new();
    let names: &[&str] = match s.mode {
        Mode::CvRr | Mode::CvDrM1 | Mode::CvDrM2 if fixed_channel(s) => {
            &["feasible", "K", "K_clamped", "chi", "I_AB", "eta_e", "v_e"]
        }
        Mode::CvRr | Mode::CvDrM1 | Mode::CvDrM2 => &[
            "feasible",
            "K_a",
            "K_a_clamped",
            "K_b",
            "K_b_clamped",
            "argmin_eta_s",
            "argmin_eta_t",
        ],
        Mode::DvWcp => &["R_wcp", "R_wcp_clamped", "mu_opt", "R_sps", "R_sps_clamped"],
        Mode::DvSps => &["Q", "E", "S0", "S11", "eps11", "R_sps", "R_sps_clamped"],
        Mode::LidarProfile => &[
            "r_e_sat",
            "r_e_ground",
            "r_e",
            "eta_ae",
            "eta_eb",
            "w",
            "w_e",
            "r_e_lidar_radar_eq",
            "r_e_radar",
            "alpha_min",
        ],
        Mode::LidarElevation => &[
            "d",
            "max_eta_ae",
            "max_eta_eb",
            "eta_ab_diffraction",
            "eta_ab_total",
            "alpha_min",
        ],
    };
    if let Some(ser) = &s.series {
        cols.push(&ser.variable);
    }
    cols.push(&s.sweep.variable);
    cols.extend_from_slice(names);
    cols.into_iter().map(str::to_string).collect()
}

type Row = Vec<Option<f64>>;

fn clamp(x: f64) -> f64 {
    x.max(0.0)
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn cv_row(s: &Scenario, fixed: bool) -> Result<Row, CliError> {
    let method = s.mode.cv_method().expect("cv mode");
    if fixed {
        return match cv::key_rate_point(&s.cv, &s.channel, method) {
            Ok(p) => Ok(vec![
                Some(1.0),
                Some(p.rate),
                Some(clamp(p.rate)),
                Some(p.chi),
                Some(p.i_ab),
                p.attack.map(|a| a.eta_e),
                p.attack.map(|a| a.v_e),
            ]),
            Err(CvError::Infeasible) => Ok(vec![Some(0.0), None, None, None, None, None, None]),
            Err(e) => Err(runtime(e)),
        };
    }
    match cv::worst_case_rate(&s.cv, &s.channel, method, &s.grid) {
        Ok(w) => Ok(vec![
            Some(1.0),
            Some(w.rate_a),
            Some(clamp(w.rate_a)),
            w.rate_b,
            w.rate_b.map(clamp),
            w.argmin.map(|a| a.0),
            w.argmin.map(|a| a.1),
        ]),
        Err(CvError::EmptyFeasibleSet(_) | CvError::Infeasible) => {
            Ok(vec![Some(0.0), None, None, None, None, None, None])
        }
        Err(e) => Err(runtime(e)),
    }
}

fn dv_row(s: &Scenario) -> Result<Row, CliError> {
    let wcp = DvParams {
        source: dv::Source::Wcp,
        ..s.dv
    };
    let sps = DvParams {
        source: dv::Source::Sps,
        ..s.dv
    };
    let sps_rate = dv::rate_at(&sps);
    match s.mode {
        Mode::DvWcp => {
            let best = dv::optimize_mu(&wcp, &s.mu_search).map_err(runtime)?;
            let signed = dv::rate_at(&DvParams { mu: best.mu_opt, ..wcp });
            Ok(vec![
                Some(signed),
                Some(best.rate),
                Some(best.mu_opt),
                Some(sps_rate),
                Some(clamp(sps_rate)),
            ])
        }
        _ => {
            let obs = dv::channel_observables(&sps);
            let t = dv::restricted_rate_terms(&sps, &obs);
            Ok(vec![
                Some(obs.gain),
                Some(obs.qber),
                Some(t.s0),
                Some(t.s11),
                Some(t.eps11),
                Some(t.rate),
                Some(clamp(t.rate)),
            ])
        }
    }
}

fn lidar_row(s: &Scenario, x: f64) -> Result<Row, CliError> {
    match s.mode {
        Mode::LidarProfile => {
            let p = s.lidar.point(x).map_err(runtime)?;
            let radar = lidar::sphere_radius(lidar::radar_cross_section_bound(s.lidar.l - x, &s.radar));
            Ok(vec![
                Some(p.r_e_sat),
                Some(p.r_e_ground),
                Some(p.r_e),
                Some(p.eta_ae),
                Some(p.eta_eb),
                Some(p.w),
                Some(p.w_e),
                Some(p.r_e_radar),
                Some(radar),
                Some(p.alpha_min),
            ])
        }
        _ => {
            let rows = lidar::elevation_sweep(&s.lidar, &[x], s.elevation.profile_points).map_err(runtime)?;
            let r = rows[0];
            Ok(vec![
                Some(r.d),
                Some(r.max_eta_ae),
                Some(r.max_eta_eb),
                Some(r.eta_ab_diffraction),
                Some(r.eta_ab_total),
                Some(r.alpha_min),
            ])
        }
    }
}

fn metadata(s: &Scenario) -> Vec<String> {
    let mut meta = vec![
        format!("satqkd {}", env!("CARGO_PKG_VERSION")),
        format!("mode: {}", s.mode.name()),
    ];
    if let Some(t) = &s.title {
        meta.push(format!("title: {t}"));
    }
    meta.push("resolved scenario:".into());
    meta.extend(s.to_toml().lines().map(|l| format!("  {l}")));
    meta
}

/// Evaluates every point of the scenario.
pub fn run_scenario(s: &Scenario) -> Result<ResultTable, CliError> {
    let points = expand(s)?;
    let fixed = fixed_channel(s);
    let evaluated = par::map_indexed(points.len(), |i| {
        let p = &points[i];
        let body = if s.mode.cv_method().is_some() {
            cv_row(&p.scenario, fixed)
        } else if s.mode.dv_source().is_some() {
            dv_row(&p.scenario)
        } else {
            lidar_row(&p.scenario, p.x)
        }?;
        let mut row: Row = p.series.into_iter().map(Some).collect();
        row.push(Some(p.x));
        row.extend(body);
        Ok(row)
    });
    let rows = evaluated.into_iter().collect::<Result<Vec<_>, CliError>>()?;
    if s.mode.cv_method().is_some() {
        let k = usize::from(s.series.is_some()) + 1;
        if rows.iter().all(|r| r[k] == Some(0.0)) {
            return Err(CliError::Runtime(
                "no point of the sweep admits a physical attack consistent with the observation".into(),
            ));
        }
    }
    Ok(ResultTable {
        meta: metadata(s),
        columns: columns(s),
        rows,
    })
}

/// A scenario file shipped with the crate.
pub struct Shipped {
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! shipped {
    ($($name:literal),* $(,)?) => {
        &[$(Shipped { name: $name, text: include_str!(concat!("../../../scenarios/", $name, ".toml")) }),*]
    };
}

/// Figure reproductions under `scenarios/`.
pub const SHIPPED: &[Shipped] = shipped![
    "fig03a_rr_eta_s",
    "fig03b_rr_eta_t",
    "fig04a_rr_worst_case",
    "fig04b_rr_beta095",
    "fig05a_dr_m1_worst_case",
    "fig05b_dr_m2",
    "fig06_dv_sources",
    "fig06_dv_sps_terms",
    "fig09_radar",
    "fig10_lidar_size",
    "fig11_beam_widths",
    "fig12_eta_1w",
    "fig13_eta_4w",
    "fig14_elevation_1w",
    "fig15_elevation_4w",
    "fig16_alpha_min",
];

impl Shipped {
    /// First comment line of the file.
    pub fn summary(&self) -> &'static str {
        self.text
            .lines()
            .find_map(|l| l.strip_prefix('#').map(str::trim))
            .unwrap_or("")
    }
}

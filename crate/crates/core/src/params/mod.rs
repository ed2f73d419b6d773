//! Physical and link parameters, config ingestion and validation.
//!
//! All optical and spin rates are angular frequencies in rad/s, all times are
//! in seconds and all lengths in meters. A [`ParameterSet`] is immutable once
//! it has been loaded and validated.

mod units;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::Serialize;

pub use units::{format_quantity, parse_quantity, Dimension};

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Nuclear gyromagnetic ratio of the stored arsenic species, rad/s per tesla.
pub const ARSENIC_GYROMAGNETIC: f64 = TWO_PI * 7.22e6;

/// Converts a Gaussian full width at half maximum to its standard deviation.
pub fn fwhm_to_sigma(fwhm: f64) -> Result<f64> {
    if !(fwhm >= 0.0) {
        return Err(crate::error::invalid_arg(format!(
            "FWHM must be non-negative, got {fwhm}"
        )));
    }
    Ok(fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhysicalParams {
    /// Radiative decay rate of the cavity-coupled transition.
    pub gamma_r: f64,
    pub gamma_nr: f64,
    /// Optical pure dephasing rate.
    pub gamma_star: f64,
    /// Zero-phonon-line FWHM without the cavity, `gamma_r + gamma_nr + 2 gamma_star`.
    pub zpl_fwhm: f64,
    pub kappa: f64,
    pub g_cav: f64,
    /// Resonant Purcell factor; also the gate cooperativity.
    pub f_res: f64,
    /// Dot-cavity detuning during entanglement generation.
    pub detuning: f64,
    /// Spectral-diffusion standard deviation of each dot.
    pub sigma_sd: f64,
    /// Spectral-diffusion standard deviation entering the gate fidelity.
    pub sigma_p: f64,
    /// Spectral standard deviation of the scattered photon.
    pub delta_p: f64,
    pub delta_eps1: f64,
    pub delta_eps2: f64,
    pub t2_electron: f64,
    pub b_x: f64,
    pub g_e: f64,
    pub g_h: f64,
    pub omega_z_nuclear: f64,
    /// Quadrupolar-shift standard deviation in s⁻¹ (no 2π).
    pub sigma_q: f64,
    pub nuclear_polarization: f64,
    /// Maximum Overhauser shift, Hz.
    pub delta_oh_max: f64,
    pub omega_readout: f64,
    /// Detector dark-count rate, Hz.
    pub d_dark: f64,
    pub t_readout: f64,
    pub f_e_init: f64,
    /// Duration of a full write-read transfer cycle.
    pub t_trans: f64,
    pub delta_m: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkParams {
    pub l_total: f64,
    pub n_nest: u32,
    pub l_att: f64,
    pub c_fiber: f64,
    pub tau_init: f64,
    pub zeta: f64,
    pub p_emit: f64,
    pub eta_c: f64,
    pub eta_d: f64,
    pub eta_cav: f64,
    /// Gate photon source efficiency; tracks `p_emit` when unset.
    pub eta_s: Option<f64>,
    pub eta_m: f64,
    pub eta_fc: f64,
    /// Photon-pair source efficiency of the 2+2 comparison scheme.
    pub eta_s_pair: f64,
    /// Single-photon source rate for direct transmission, Hz.
    pub source_rate: f64,
}

impl LinkParams {
    pub fn elementary_length(&self) -> f64 {
        self.l_total / 2f64.powi(self.n_nest as i32)
    }

    pub fn links(&self) -> u64 {
        1u64 << self.n_nest
    }

    pub fn gate_source_efficiency(&self) -> f64 {
        self.eta_s.unwrap_or(self.p_emit)
    }

    /// Time cost of one elementary attempt: signalling plus reinitialization.
    pub fn slot_time(&self) -> f64 {
        self.elementary_length() / self.c_fiber + self.tau_init
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSet {
    pub physical: PhysicalParams,
    pub link: LinkParams,
    pub provenance: BTreeMap<String, String>,
}

struct KeySpec {
    key: &'static str,
    dim: Dimension,
    default_note: &'static str,
}

macro_rules! keys {
    ($($key:literal => $dim:ident, $note:literal;)*) => {
        const KEYS: &[KeySpec] = &[
            $(KeySpec { key: $key, dim: Dimension::$dim, default_note: $note },)*
        ];
    };
}

keys! {
    "gamma_r" => Angular, "2pi*0.59 GHz, GaAs/AlGaAs dot radiative rate";
    "gamma_nr" => Angular, "0, negligible non-radiative decay";
    "gamma_star" => Angular, "derived from Gamma: (Gamma - gamma_r - gamma_nr)/2";
    "Gamma" => Angular, "2pi*0.64 GHz zero-phonon-line width (angular reading)";
    "kappa" => Angular, "2pi*100 GHz photonic-crystal cavity linewidth";
    "g_cav" => Angular, "g/kappa = 0.1";
    "F_res" => Dimensionless, "500, resonant Purcell factor (= cooperativity)";
    "detuning" => Angular, "2pi*275 GHz dot-cavity detuning during generation";
    "sigma_sd" => Angular, "from spectral-diffusion FWHM 2pi*500 MHz";
    "spectral_diffusion_fwhm" => Angular, "input alias, converted to sigma_sd";
    "sigma_p" => Angular, "2pi*500 MHz, used directly as a standard deviation in the gate";
    "delta_p" => Angular, "2pi*2.4 GHz photon bandwidth (T_gate = 2 ns)";
    "delta_eps1" => Angular, "0, dots tuned to the cavity";
    "delta_eps2" => Angular, "0, dots tuned to the cavity";
    "T2_electron" => Time, "50 us electron coherence";
    "B_x" => Field, "6.6 T Voigt field";
    "g_e" => Dimensionless, "-0.076 electron g-factor";
    "g_h" => Dimensionless, "1.309 hole g-factor";
    "omega_Z_nuclear" => Angular, "2pi*7.22 MHz/T * B_x (arsenic)";
    "sigma_Q" => Rate, "50 kHz read as s^-1 without 2pi";
    "nuclear_polarization" => Dimensionless, "0.95";
    "Delta_OH_max" => Rate, "31 GHz maximum Overhauser shift in GaAs";
    "Omega_readout" => Angular, "2pi*1 GHz, inverted from the quoted readout fidelity";
    "D_dark" => Rate, "500 Hz dark counts";
    "T_readout" => Time, "600 ns readout window";
    "F_e_init" => Dimensionless, "0.99996 optical-pumping initialization";
    "t_trans" => Time, "330 ns full write-read cycle (2 x 165 ns)";
    "delta_m" => Integer, "2, spin-wave mode";
    "L_total" => Length, "1000 km";
    "n_nest" => Integer, "3 nesting levels";
    "L_att" => Length, "25 km (0.17 dB/km)";
    "c_fiber" => Speed, "2e8 m/s";
    "tau_init" => Time, "0.2 us reinitialization";
    "zeta" => Dimensionless, "0.94 branching ratio at F_p = 16";
    "p_emit" => Dimensionless, "0.8 (p * eta_c = 0.72)";
    "eta_c" => Dimensionless, "0.9 collection efficiency";
    "eta_d" => Dimensionless, "0.9 detector efficiency";
    "eta_cav" => Dimensionless, "0.9 cavity efficiency";
    "eta_s" => Dimensionless, "unset: follows p_emit";
    "eta_m" => Dimensionless, "0.9 external memory efficiency (2+2)";
    "eta_fc" => Dimensionless, "1, ideal frequency conversion";
    "eta_s_pair" => Dimensionless, "0.65 photon-pair source efficiency (2+2)";
    "source_rate" => Rate, "10 GHz single-photon source";
}

fn key_spec(key: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.key == key)
}

/// All accepted config keys.
pub fn known_keys() -> impl Iterator<Item = &'static str> {
    KEYS.iter().map(|k| k.key)
}

impl Default for PhysicalParams {
    fn default() -> Self {
        let gamma_r = TWO_PI * 0.59e9;
        let zpl_fwhm = TWO_PI * 0.64e9;
        let kappa = TWO_PI * 100e9;
        let b_x = 6.6;
        Self {
            gamma_r,
            gamma_nr: 0.0,
            gamma_star: (zpl_fwhm - gamma_r) / 2.0,
            zpl_fwhm,
            kappa,
            g_cav: 0.1 * kappa,
            f_res: 500.0,
            detuning: TWO_PI * 275e9,
            sigma_sd: fwhm_to_sigma(TWO_PI * 500e6).unwrap(),
            sigma_p: TWO_PI * 500e6,
            delta_p: TWO_PI * 2.4e9,
            delta_eps1: 0.0,
            delta_eps2: 0.0,
            t2_electron: 50e-6,
            b_x,
            g_e: -0.076,
            g_h: 1.309,
            omega_z_nuclear: ARSENIC_GYROMAGNETIC * b_x,
            sigma_q: 5.0e4,
            nuclear_polarization: 0.95,
            delta_oh_max: 31e9,
            omega_readout: TWO_PI * 1e9,
            d_dark: 500.0,
            t_readout: 600e-9,
            f_e_init: 0.99996,
            t_trans: 330e-9,
            delta_m: 2,
        }
    }
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            l_total: 1000e3,
            n_nest: 3,
            l_att: 25e3,
            c_fiber: 2e8,
            tau_init: 0.2e-6,
            zeta: 0.94,
            p_emit: 0.8,
            eta_c: 0.9,
            eta_d: 0.9,
            eta_cav: 0.9,
            eta_s: None,
            eta_m: 0.9,
            eta_fc: 1.0,
            eta_s_pair: 0.65,
            source_rate: 10e9,
        }
    }
}

impl Default for ParameterSet {
    fn default() -> Self {
        let provenance = KEYS
            .iter()
            .map(|k| (k.key.to_string(), format!("default: {}", k.default_note)))
            .collect();
        Self {
            physical: PhysicalParams::default(),
            link: LinkParams::default(),
            provenance,
        }
    }
}

/// A single config value before unit interpretation.
#[derive(Debug, Clone)]
pub enum RawValue {
    Number(f64),
    Integer(i64),
    Text(String),
}

impl RawValue {
    fn from_toml(key: &str, v: &toml::Value) -> Result<Self> {
        match v {
            toml::Value::Float(x) => Ok(RawValue::Number(*x)),
            toml::Value::Integer(i) => Ok(RawValue::Integer(*i)),
            toml::Value::String(s) => Ok(RawValue::Text(s.clone())),
            other => Err(Error::Parse(format!(
                "`{key}` must be a number or a quoted quantity, found {}",
                other.type_str()
            ))),
        }
    }

    /// Interprets an override value written as `key=value` on the command line.
    pub fn from_override(text: &str) -> Self {
        let t = text.trim();
        if let Ok(i) = t.parse::<i64>() {
            return RawValue::Integer(i);
        }
        if let Ok(x) = t.parse::<f64>() {
            return RawValue::Number(x);
        }
        let unquoted = t
            .strip_prefix('"')
            .and_then(|s| s.strip_suffix('"'))
            .unwrap_or(t);
        RawValue::Text(unquoted.to_string())
    }
}

/// Tracks which of the coupled keys were set explicitly while loading.
#[derive(Default)]
struct Explicit {
    gamma_star: bool,
    zpl_fwhm: bool,
    omega_z: bool,
}

impl ParameterSet {
    /// Reads a flat `key = value` file. Missing keys keep their defaults;
    /// the resulting set must validate.
    pub fn load_config(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let origin = format!("config {}", path.display());
        Self::from_config_str_with_origin(&text, &origin)
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        Self::from_config_str_with_origin(text, "config")
    }

    fn from_config_str_with_origin(text: &str, origin: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            Error::Parse(e.message().to_string())
        })?;
        let mut entries = Vec::with_capacity(table.len());
        for (key, value) in &table {
            entries.push((key.clone(), RawValue::from_toml(key, value)?));
        }
        let set = Self::default().with_values(entries, origin)?;
        set.ensure_valid()?;
        Ok(set)
    }

    /// Applies `key=value` overrides on top of an existing set and
    /// revalidates.
    pub fn with_overrides<'a>(&self, overrides: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut entries = Vec::new();
        for item in overrides {
            let (k, v) = item.split_once('=').ok_or_else(|| {
                Error::Parse(format!("override `{item}` is not of the form key=value"))
            })?;
            entries.push((k.trim().to_string(), RawValue::from_override(v)));
        }
        let set = self.clone().with_values(entries, "--param override")?;
        set.ensure_valid()?;
        Ok(set)
    }

    fn with_values(mut self, entries: Vec<(String, RawValue)>, origin: &str) -> Result<Self> {
        let mut explicit = Explicit::default();
        let mut fwhm = None;
        for (key, raw) in entries {
            let spec = key_spec(&key).ok_or_else(|| Error::UnknownKey(key.clone()))?;
            if spec.key == "eta_s" {
                if let RawValue::Text(t) = &raw {
                    if t.trim() == "p_emit" {
                        self.link.eta_s = None;
                        self.provenance.insert(key, origin.to_string());
                        continue;
                    }
                }
            }
            let value = interpret(spec, &raw)?;
            match spec.key {
                "gamma_star" => explicit.gamma_star = true,
                "Gamma" => explicit.zpl_fwhm = true,
                "omega_Z_nuclear" => explicit.omega_z = true,
                "spectral_diffusion_fwhm" => fwhm = Some(value),
                _ => {}
            }
            self.set(spec.key, value);
            self.provenance.insert(key, origin.to_string());
        }

        if let Some(f) = fwhm {
            self.physical.sigma_sd = fwhm_to_sigma(f)?;
            self.provenance
                .insert("sigma_sd".into(), format!("{origin} (from FWHM)"));
        }
        let p = &mut self.physical;
        match (explicit.gamma_star, explicit.zpl_fwhm) {
            (true, false) => p.zpl_fwhm = p.gamma_r + p.gamma_nr + 2.0 * p.gamma_star,
            (false, _) => p.gamma_star = (p.zpl_fwhm - p.gamma_r - p.gamma_nr) / 2.0,
            (true, true) => {}
        }
        if !explicit.omega_z && self.provenance.get("omega_Z_nuclear").is_some_and(|s| s.starts_with("default")) {
            p.omega_z_nuclear = ARSENIC_GYROMAGNETIC * p.b_x;
        }
        Ok(self)
    }

    fn set(&mut self, key: &str, v: f64) {
        let p = &mut self.physical;
        let l = &mut self.link;
        match key {
            "gamma_r" => p.gamma_r = v,
            "gamma_nr" => p.gamma_nr = v,
            "gamma_star" => p.gamma_star = v,
            "Gamma" => p.zpl_fwhm = v,
            "kappa" => p.kappa = v,
            "g_cav" => p.g_cav = v,
            "F_res" => p.f_res = v,
            "detuning" => p.detuning = v,
            "sigma_sd" => p.sigma_sd = v,
            "spectral_diffusion_fwhm" => {}
            "sigma_p" => p.sigma_p = v,
            "delta_p" => p.delta_p = v,
            "delta_eps1" => p.delta_eps1 = v,
            "delta_eps2" => p.delta_eps2 = v,
            "T2_electron" => p.t2_electron = v,
            "B_x" => p.b_x = v,
            "g_e" => p.g_e = v,
            "g_h" => p.g_h = v,
            "omega_Z_nuclear" => p.omega_z_nuclear = v,
            "sigma_Q" => p.sigma_q = v,
            "nuclear_polarization" => p.nuclear_polarization = v,
            "Delta_OH_max" => p.delta_oh_max = v,
            "Omega_readout" => p.omega_readout = v,
            "D_dark" => p.d_dark = v,
            "T_readout" => p.t_readout = v,
            "F_e_init" => p.f_e_init = v,
            "t_trans" => p.t_trans = v,
            "delta_m" => p.delta_m = v as u32,
            "L_total" => l.l_total = v,
            "n_nest" => l.n_nest = v as u32,
            "L_att" => l.l_att = v,
            "c_fiber" => l.c_fiber = v,
            "tau_init" => l.tau_init = v,
            "zeta" => l.zeta = v,
            "p_emit" => l.p_emit = v,
            "eta_c" => l.eta_c = v,
            "eta_d" => l.eta_d = v,
            "eta_cav" => l.eta_cav = v,
            "eta_s" => l.eta_s = Some(v),
            "eta_m" => l.eta_m = v,
            "eta_fc" => l.eta_fc = v,
            "eta_s_pair" => l.eta_s_pair = v,
            "source_rate" => l.source_rate = v,
            other => unreachable!("key table and setter disagree on `{other}`"),
        }
    }

    fn get(&self, key: &str) -> Option<f64> {
        let p = &self.physical;
        let l = &self.link;
        Some(match key {
            "gamma_r" => p.gamma_r,
            "gamma_nr" => p.gamma_nr,
            "gamma_star" => p.gamma_star,
            "Gamma" => p.zpl_fwhm,
            "kappa" => p.kappa,
            "g_cav" => p.g_cav,
            "F_res" => p.f_res,
            "detuning" => p.detuning,
            "sigma_sd" => p.sigma_sd,
            "sigma_p" => p.sigma_p,
            "delta_p" => p.delta_p,
            "delta_eps1" => p.delta_eps1,
            "delta_eps2" => p.delta_eps2,
            "T2_electron" => p.t2_electron,
            "B_x" => p.b_x,
            "g_e" => p.g_e,
            "g_h" => p.g_h,
            "omega_Z_nuclear" => p.omega_z_nuclear,
            "sigma_Q" => p.sigma_q,
            "nuclear_polarization" => p.nuclear_polarization,
            "Delta_OH_max" => p.delta_oh_max,
            "Omega_readout" => p.omega_readout,
            "D_dark" => p.d_dark,
            "T_readout" => p.t_readout,
            "F_e_init" => p.f_e_init,
            "t_trans" => p.t_trans,
            "delta_m" => p.delta_m as f64,
            "L_total" => l.l_total,
            "n_nest" => l.n_nest as f64,
            "L_att" => l.l_att,
            "c_fiber" => l.c_fiber,
            "tau_init" => l.tau_init,
            "zeta" => l.zeta,
            "p_emit" => l.p_emit,
            "eta_c" => l.eta_c,
            "eta_d" => l.eta_d,
            "eta_cav" => l.eta_cav,
            "eta_s" => return l.eta_s,
            "eta_m" => l.eta_m,
            "eta_fc" => l.eta_fc,
            "eta_s_pair" => l.eta_s_pair,
            "source_rate" => l.source_rate,
            _ => return None,
        })
    }

    /// Value of a config key in internal units.
    pub fn value(&self, key: &str) -> Option<f64> {
        self.get(key)
    }

    /// Writes every field in the config format. Loading the output yields a
    /// field-wise identical set.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for spec in KEYS {
            if spec.key == "spectral_diffusion_fwhm" {
                continue;
            }
            let Some(v) = self.get(spec.key) else {
                continue;
            };
            let line = match spec.dim {
                Dimension::Integer => format!("{} = {}\n", spec.key, v as i64),
                Dimension::Dimensionless => format!("{} = {:?}\n", spec.key, v),
                dim => format!("{} = \"{}\"\n", spec.key, format_quantity(dim, v)),
            };
            out.push_str(&line);
        }
        out
    }

    /// Range and consistency checks. An empty violation list means the set
    /// is usable.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let p = &self.physical;
        let l = &self.link;

        for spec in KEYS {
            if let Some(v) = self.get(spec.key) {
                if !v.is_finite() {
                    report.violation(spec.key, format!("{v} is not finite"));
                }
            }
        }

        let nonneg = [
            ("gamma_r", p.gamma_r),
            ("gamma_nr", p.gamma_nr),
            ("gamma_star", p.gamma_star),
            ("Gamma", p.zpl_fwhm),
            ("g_cav", p.g_cav),
            ("F_res", p.f_res),
            ("sigma_sd", p.sigma_sd),
            ("sigma_p", p.sigma_p),
            ("T2_electron", p.t2_electron),
            ("B_x", p.b_x),
            ("omega_Z_nuclear", p.omega_z_nuclear),
            ("sigma_Q", p.sigma_q),
            ("Delta_OH_max", p.delta_oh_max),
            ("Omega_readout", p.omega_readout),
            ("D_dark", p.d_dark),
            ("T_readout", p.t_readout),
            ("t_trans", p.t_trans),
            ("L_total", l.l_total),
            ("tau_init", l.tau_init),
            ("source_rate", l.source_rate),
        ];
        for (k, v) in nonneg {
            if v < 0.0 {
                report.violation(k, format!("must be >= 0, got {v}"));
            }
        }
        let positive = [
            ("kappa", p.kappa),
            ("delta_p", p.delta_p),
            ("L_att", l.l_att),
            ("c_fiber", l.c_fiber),
        ];
        for (k, v) in positive {
            if !(v > 0.0) {
                report.violation(k, format!("must be > 0, got {v}"));
            }
        }
        let mut unit_interval = vec![
            ("nuclear_polarization", p.nuclear_polarization),
            ("F_e_init", p.f_e_init),
            ("zeta", l.zeta),
            ("p_emit", l.p_emit),
            ("eta_c", l.eta_c),
            ("eta_d", l.eta_d),
            ("eta_cav", l.eta_cav),
            ("eta_m", l.eta_m),
            ("eta_fc", l.eta_fc),
            ("eta_s_pair", l.eta_s_pair),
        ];
        if let Some(s) = l.eta_s {
            unit_interval.push(("eta_s", s));
        }
        for (k, v) in unit_interval {
            if !(0.0..=1.0).contains(&v) {
                report.violation(k, format!("must lie in [0, 1], got {v}"));
            }
        }
        if !matches!(p.delta_m, 1 | 2) {
            report.violation("delta_m", format!("must be 1 or 2, got {}", p.delta_m));
        }
        if l.n_nest > 20 {
            report.violation("n_nest", format!("{} nesting levels is beyond the model", l.n_nest));
        }
        if !(l.l_total > 0.0) {
            report.violation("L_total", "elementary link length must be > 0");
        }

        let expected_fwhm = p.gamma_r + p.gamma_nr + 2.0 * p.gamma_star;
        if (p.zpl_fwhm - expected_fwhm).abs() > 1e-9 * p.zpl_fwhm.abs().max(1.0) {
            report.violation(
                "Gamma",
                format!(
                    "Gamma = {:e} rad/s disagrees with gamma_r + gamma_nr + 2 gamma_star = {:e} rad/s",
                    p.zpl_fwhm, expected_fwhm
                ),
            );
        }

        let gamma = p.gamma_r + p.gamma_nr;
        if gamma > 0.0 {
            report.cooperativity = p.f_res * p.gamma_r / gamma;
            report.note(format!(
                "cooperativity C = F_res * gamma_r / gamma = {:.6}",
                report.cooperativity
            ));
            if p.kappa > 0.0 {
                let geometric = 4.0 * p.g_cav * p.g_cav / (p.kappa * gamma);
                report.note(format!(
                    "4 g^2/(kappa gamma) = {geometric:.6} from g_cav/kappa = {:.4}; the gate uses C above",
                    p.g_cav / p.kappa
                ));
            }
        }
        report
    }

    fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::Invalid(report.to_string()))
        }
    }
}

fn interpret(spec: &KeySpec, raw: &RawValue) -> Result<f64> {
    let bad = |reason: &str, shown: String| Error::BadValue {
        key: spec.key.to_string(),
        value: shown,
        reason: reason.to_string(),
    };
    match (spec.dim, raw) {
        (Dimension::Integer, RawValue::Integer(i)) => {
            if *i < 0 {
                Err(bad("must be a non-negative integer", i.to_string()))
            } else {
                Ok(*i as f64)
            }
        }
        (Dimension::Integer, RawValue::Text(t)) if t.trim().parse::<u32>().is_ok() => {
            Ok(t.trim().parse::<u32>().unwrap_or_default() as f64)
        }
        (Dimension::Integer, other) => Err(bad("expected an integer", format!("{other:?}"))),
        (Dimension::Dimensionless, RawValue::Number(x)) => Ok(*x),
        (Dimension::Dimensionless, RawValue::Integer(i)) => Ok(*i as f64),
        (Dimension::Dimensionless, RawValue::Text(t)) => parse_quantity(spec.key, spec.dim, t),
        (_, RawValue::Text(t)) => parse_quantity(spec.key, spec.dim, t),
        (_, RawValue::Number(x)) => Err(Error::MissingUnit {
            key: spec.key.to_string(),
            value: x.to_string(),
        }),
        (_, RawValue::Integer(i)) => Err(Error::MissingUnit {
            key: spec.key.to_string(),
            value: i.to_string(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub key: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
    /// Cooperativity implied by the resonant Purcell factor.
    pub cooperativity: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn violation(&mut self, key: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            key: key.to_string(),
            message: message.into(),
        });
    }

    fn note(&mut self, note: String) {
        self.notes.push(note);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{}: {}", v.key, v.message))
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

// SPDX-License-Identifier: Apache-2.0
//! GSHE switch model: read-out power, switching energy, stochastic delay and
//! current-mode minority logic.
//!
//! All quantities are SI. The delay model is a lognormal whose mean and
//! log-space spread follow power laws in the spin current; the anchor at
//! 20 µA is 1.55 ns, the exponents and spread are adjustable fit parameters.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camo::TruthTable;

/// Footprint estimate reported alongside the other metrics.
pub const AREA_UM2: f64 = 0.0016;

#[derive(Debug, Error, PartialEq)]
pub enum DeviceError {
    #[error("invalid device parameters: {0}")]
    InvalidParams(String),
    #[error("spin current {current:e} A below deterministic-switching minimum {min:e} A")]
    SubThreshold { current: f64, min: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelayFit {
    /// Current at which `mean_s` and `sigma_log` apply, A.
    pub reference_current: f64,
    pub mean_s: f64,
    pub sigma_log: f64,
    /// mean ∝ (I / I_ref)^-mean_exponent
    pub mean_exponent: f64,
    /// sigma_log ∝ (I / I_ref)^-sigma_exponent
    pub sigma_exponent: f64,
}

impl Default for DelayFit {
    fn default() -> Self {
        DelayFit {
            reference_current: 20e-6,
            mean_s: 1.55e-9,
            sigma_log: 0.25,
            mean_exponent: 1.0,
            sigma_exponent: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceParams {
    pub nm_length: f64,
    pub nm_width: f64,
    pub nm_thickness: f64,
    pub ms_write: f64,
    pub ms_read: f64,
    pub ku_write: f64,
    pub ku_read: f64,
    /// Minimum current for deterministic switching, A.
    pub spin_current: f64,
    /// Resistance-area product, Ω·m².
    pub rap: f64,
    pub tmr: f64,
    pub rho_hm: f64,
    pub theta_sh: f64,
    pub t_hm: f64,
    pub r_hm: f64,
    pub delay: DelayFit,
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams {
            nm_length: 28e-9,
            nm_width: 15e-9,
            nm_thickness: 2e-9,
            ms_write: 1e6,
            ms_read: 5e5,
            ku_write: 2.5e4,
            ku_read: 5e3,
            spin_current: 20e-6,
            rap: 1e-12,
            tmr: 1.7,
            rho_hm: 5.6e-7,
            theta_sh: 0.4,
            t_hm: 1e-9,
            r_hm: 1000.0,
            delay: DelayFit::default(),
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<(), DeviceError> {
        let positive = [
            ("nm_length", self.nm_length),
            ("nm_width", self.nm_width),
            ("nm_thickness", self.nm_thickness),
            ("ms_write", self.ms_write),
            ("ms_read", self.ms_read),
            ("ku_write", self.ku_write),
            ("ku_read", self.ku_read),
            ("spin_current", self.spin_current),
            ("rap", self.rap),
            ("rho_hm", self.rho_hm),
            ("theta_sh", self.theta_sh),
            ("t_hm", self.t_hm),
            ("r_hm", self.r_hm),
            ("delay.reference_current", self.delay.reference_current),
            ("delay.mean_s", self.delay.mean_s),
            ("delay.sigma_log", self.delay.sigma_log),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(DeviceError::InvalidParams(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.tmr.is_finite() && self.tmr >= 0.0) {
            return Err(DeviceError::InvalidParams(format!("tmr = {} must be non-negative", self.tmr)));
        }
        for (name, v) in [
            ("delay.mean_exponent", self.delay.mean_exponent),
            ("delay.sigma_exponent", self.delay.sigma_exponent),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(DeviceError::InvalidParams(format!("{name} = {v} must be non-negative")));
            }
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        self.theta_sh * (self.nm_width / self.t_hm)
    }

    /// Heavy-metal resistance implied by geometry, for comparison with `r_hm`.
    pub fn r_hm_from_geometry(&self) -> f64 {
        self.rho_hm * self.nm_length / (self.nm_width * self.t_hm)
    }
}

/// (G_P, G_AP) in siemens.
pub fn conductances(p: &DeviceParams) -> (f64, f64) {
    let g_p = p.nm_length * p.nm_width / p.rap;
    (g_p, g_p / (1.0 + p.tmr))
}

/// (V_OUT, V_SUP) at spin current `i_s`.
pub fn read_voltages(p: &DeviceParams, i_s: f64) -> Result<(f64, f64), DeviceError> {
    let (g_p, g_ap) = conductances(p);
    if g_p <= g_ap {
        return Err(DeviceError::InvalidParams("G_P must exceed G_AP (tmr > 0)".into()));
    }
    let beta = p.beta();
    let r = p.r_hm;
    let v_out = i_s * r / beta;
    let v_sup = (i_s / beta) * (1.0 + r * (g_p + g_ap)) / (g_p - g_ap);
    Ok((v_out, v_sup))
}

pub fn read_power_at(p: &DeviceParams, i_s: f64) -> Result<f64, DeviceError> {
    let (g_p, g_ap) = conductances(p);
    let (v_out, v_sup) = read_voltages(p, i_s)?;
    Ok(v_out * v_out / p.r_hm + (v_sup - v_out).powi(2) * g_p + (v_out + v_sup).powi(2) * g_ap)
}

/// Read-out power in watts at the parameter set's spin current.
pub fn read_power(p: &DeviceParams) -> Result<f64, DeviceError> {
    p.validate()?;
    read_power_at(p, p.spin_current)
}

/// Joules per switching event at the given mean delay.
pub fn switching_energy(p: &DeviceParams, mean_delay: f64) -> Result<f64, DeviceError> {
    Ok(read_power(p)? * mean_delay)
}

#[derive(Clone, Debug)]
pub struct DelaySampler {
    dist: LogNormal<f64>,
    rng: ChaCha8Rng,
    mean: f64,
    sigma_log: f64,
}

impl DelaySampler {
    pub fn new(p: &DeviceParams, current: f64, seed: u64) -> Result<DelaySampler, DeviceError> {
        p.validate()?;
        if !(current >= p.spin_current) {
            return Err(DeviceError::SubThreshold {
                current,
                min: p.spin_current,
            });
        }
        let ratio = current / p.delay.reference_current;
        let mean = p.delay.mean_s * ratio.powf(-p.delay.mean_exponent);
        let sigma_log = p.delay.sigma_log * ratio.powf(-p.delay.sigma_exponent);
        let mu = mean.ln() - sigma_log * sigma_log / 2.0;
        let dist = LogNormal::new(mu, sigma_log).map_err(|e| DeviceError::InvalidParams(e.to_string()))?;
        Ok(DelaySampler {
            dist,
            rng: ChaCha8Rng::seed_from_u64(seed),
            mean,
            sigma_log,
        })
    }

    /// Distribution mean, seconds.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Distribution standard deviation, seconds.
    pub fn std_dev(&self) -> f64 {
        self.mean * (self.sigma_log * self.sigma_log).exp_m1().sqrt()
    }

    pub fn sample(&mut self) -> f64 {
        self.dist.sample(&mut self.rng)
    }
}

pub fn sample_delay(p: &DeviceParams, current: f64, seed: u64) -> Result<f64, DeviceError> {
    Ok(DelaySampler::new(p, current, seed)?.sample())
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelaySummary {
    pub current_uA: f64,
    pub samples: usize,
    pub mean_ns: f64,
    pub std_ns: f64,
    pub min_ns: f64,
    pub median_ns: f64,
    pub p95_ns: f64,
    pub max_ns: f64,
}

pub fn summarize_delays(p: &DeviceParams, current: f64, samples: usize, seed: u64) -> Result<DelaySummary, DeviceError> {
    if samples == 0 {
        return Err(DeviceError::InvalidParams("sample count must be positive".into()));
    }
    let mut s = DelaySampler::new(p, current, seed)?;
    let mut xs: Vec<f64> = (0..samples).map(|_| s.sample() * 1e9).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    xs.sort_by(f64::total_cmp);
    let q = |f: f64| xs[((f * (n - 1.0)).round() as usize).min(xs.len() - 1)];
    Ok(DelaySummary {
        current_uA: current * 1e6,
        samples,
        mean_ns: mean,
        std_ns: var.sqrt(),
        min_ns: xs[0],
        median_ns: q(0.5),
        p95_ns: q(0.95),
        max_ns: xs[xs.len() - 1],
    })
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceMetrics {
    pub power_uW: f64,
    pub energy_fJ: f64,
    pub g_p_uS: f64,
    pub g_ap_uS: f64,
    pub beta: f64,
    pub r_hm_ohm: f64,
    pub v_out_mV: f64,
    pub v_sup_mV: f64,
    pub area_um2: f64,
    pub delay: DelaySummary,
}

/// Everything `device-metrics` reports; energy uses the sampler's mean delay.
pub fn device_metrics(p: &DeviceParams, samples: usize, seed: u64) -> Result<DeviceMetrics, DeviceError> {
    let power = read_power(p)?;
    let (g_p, g_ap) = conductances(p);
    let (v_out, v_sup) = read_voltages(p, p.spin_current)?;
    let mean = DelaySampler::new(p, p.spin_current, seed)?.mean();
    Ok(DeviceMetrics {
        power_uW: power * 1e6,
        energy_fJ: power * mean * 1e15,
        g_p_uS: g_p * 1e6,
        g_ap_uS: g_ap * 1e6,
        beta: p.beta(),
        r_hm_ohm: p.r_hm,
        v_out_mV: v_out * 1e3,
        v_sup_mV: v_sup * 1e3,
        area_um2: AREA_UM2,
        delay: summarize_delays(p, p.spin_current, samples, seed)?,
    })
}

/// Sign of a charge current: logic 1 is `Plus`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Current {
    Plus,
    Minus,
}

impl Current {
    pub fn from_bool(b: bool) -> Current {
        if b {
            Current::Plus
        } else {
            Current::Minus
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            Current::Plus => 1,
            Current::Minus => -1,
        }
    }

    pub fn is_one(self) -> bool {
        self == Current::Plus
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Direct,
    Swapped,
}

/// The write magnet follows the majority of the three input currents; the
/// read magnet couples anti-parallel, so the direct read-out is the minority.
pub fn minority_output(a: Current, b: Current, x: Current, polarity: Polarity) -> Current {
    let majority = a.sign() + b.sign() + x.sign() > 0;
    match polarity {
        Polarity::Direct => Current::from_bool(!majority),
        Polarity::Swapped => Current::from_bool(majority),
    }
}

/// Two-input function realized with control current `x`.
pub fn gate_function(x: Current, polarity: Polarity) -> TruthTable {
    let mut id = 0u8;
    for row in 0..4 {
        let out = minority_output(Current::from_bool(row >> 1 & 1 == 1), Current::from_bool(row & 1 == 1), x, polarity);
        id |= (out.is_one() as u8) << row;
    }
    TruthTable::new(id).expect("4-bit id")
}

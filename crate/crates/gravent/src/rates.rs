//! Closed-form entanglement and decoherence rates, and their assembly into
//! a per-channel rate budget with margins.
//!
//! Every function here is pure: identical inputs give bit-identical outputs.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantities::{
    self, ComparisonMode, ExperimentConfig, MassMode, PhysicalConstants, Protocol, RateMode,
};

/// Decoherence (and threshold) channels tracked by the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ChannelId {
    #[serde(rename = "gas")]
    GasScattering,
    #[serde(rename = "bb_scatter")]
    BlackbodyScatter,
    #[serde(rename = "bb_emission")]
    BlackbodyEmission,
    #[serde(rename = "bb_absorption")]
    BlackbodyAbsorption,
    #[serde(rename = "thermal_dissipation")]
    ThermalDissipation,
    #[serde(rename = "position_noise")]
    PositionNoise,
    #[serde(rename = "frequency_noise")]
    FrequencyNoise,
    #[serde(rename = "thermal_occupation")]
    ThermalOccupation,
}

impl ChannelId {
    pub const ALL: [ChannelId; 8] = [
        ChannelId::GasScattering,
        ChannelId::BlackbodyScatter,
        ChannelId::BlackbodyEmission,
        ChannelId::BlackbodyAbsorption,
        ChannelId::ThermalDissipation,
        ChannelId::PositionNoise,
        ChannelId::FrequencyNoise,
        ChannelId::ThermalOccupation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ChannelId::GasScattering => "gas",
            ChannelId::BlackbodyScatter => "bb_scatter",
            ChannelId::BlackbodyEmission => "bb_emission",
            ChannelId::BlackbodyAbsorption => "bb_absorption",
            ChannelId::ThermalDissipation => "thermal_dissipation",
            ChannelId::PositionNoise => "position_noise",
            ChannelId::FrequencyNoise => "frequency_noise",
            ChannelId::ThermalOccupation => "thermal_occupation",
        }
    }

    /// Channels evaluated for a protocol. The oscillator protocol adds the
    /// trap-related channels on top of the scattering set.
    pub fn for_protocol(protocol: Protocol) -> &'static [ChannelId] {
        match protocol {
            Protocol::CsignPhase => &Self::ALL[..4],
            Protocol::CoupledOscillators => &Self::ALL[..],
        }
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ChannelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChannelId::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::config("channel", format!("unknown channel id \"{s}\"")))
    }
}

/// Whether a localization-rate formula was applied inside its
/// long-wavelength regime of validity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegimeFlag {
    Valid,
    /// delta_x >= lambda_th: the Lambda dx^2 form no longer applies.
    Invalid,
}

/// One channel of the budget. `margin` is Gamma_ent / rate; `None` encodes
/// an infinite margin (channel rate exactly zero).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChannelEntry {
    pub channel: ChannelId,
    /// Channel rate in s^-1 (for `ThermalOccupation` this is nbar * omega0).
    pub rate: f64,
    pub margin: Option<f64>,
}

impl ChannelEntry {
    fn new(channel: ChannelId, rate: f64, gamma_ent: f64) -> Self {
        let margin = if rate > 0.0 { Some(gamma_ent / rate) } else { None };
        ChannelEntry {
            channel,
            rate,
            margin,
        }
    }

    /// True when the entanglement rate beats this channel.
    pub fn passes(&self) -> bool {
        match self.margin {
            Some(m) => m > 1.0,
            None => true,
        }
    }
}

/// Entanglement rate against every decoherence channel of the protocol.
#[derive(Debug, Clone, Serialize)]
pub struct RateBudget {
    /// Entanglement rate Gamma_ent in s^-1.
    pub gamma_ent: f64,
    pub channels: Vec<ChannelEntry>,
    /// Channel with the smallest finite margin.
    pub binding_channel: Option<ChannelId>,
    /// True iff every channel margin exceeds 1.
    pub feasible: bool,
    /// Gamma_ent / (sum of channel rates); populated in aggregate mode.
    pub aggregate_margin: Option<f64>,
    pub aggregate_feasible: Option<bool>,
    pub warnings: Vec<String>,
}

impl RateBudget {
    /// Margin of a specific channel; `Ok(None)` encodes infinite margin.
    pub fn margin(&self, channel: ChannelId) -> Result<Option<f64>> {
        self.channels
            .iter()
            .find(|e| e.channel == channel)
            .map(|e| e.margin)
            .ok_or_else(|| {
                Error::config(
                    "channel",
                    format!("channel \"{channel}\" is not part of this protocol"),
                )
            })
    }

    /// Smallest finite margin, or `None` when every channel rate is zero.
    pub fn min_margin(&self) -> Option<f64> {
        self.channels
            .iter()
            .filter_map(|e| e.margin)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Feasibility including the aggregate comparison when present.
    pub fn effective_feasible(&self) -> bool {
        self.feasible && self.aggregate_feasible.unwrap_or(true)
    }
}

/// Entanglement rate for two masses m at center distance d, delocalized
/// over delta_x.
///
/// `PaperApprox` evaluates (G/hbar) m^2 dx^2 / d^3; `Exact` the magnitude of
/// the full phase-difference rate (G m^2/hbar) |1/d - 1/sqrt(d^2+dx^2)|,
/// which approaches half the Taylor form as dx/d -> 0.
pub fn entanglement_rate(
    c: &PhysicalConstants,
    m: f64,
    d: f64,
    delta_x: f64,
    mode: RateMode,
) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::domain(format!("entanglement_rate: mass must be > 0, got {m}")));
    }
    if !(d > 0.0) {
        return Err(Error::domain(format!("entanglement_rate: distance must be > 0, got {d}")));
    }
    if !(delta_x >= 0.0) {
        return Err(Error::domain(format!(
            "entanglement_rate: delta_x must be >= 0, got {delta_x}"
        )));
    }
    let rate = match mode {
        RateMode::PaperApprox => (c.g / c.hbar) * m * m * delta_x * delta_x / d.powi(3),
        RateMode::Exact => {
            (c.g * m * m / c.hbar) * (1.0 / d - 1.0 / (d * d + delta_x * delta_x).sqrt()).abs()
        }
    };
    Ok(rate)
}

/// True when the leading-order Taylor form of the interaction is trusted
/// (delta_x < d). Callers attach a budget warning otherwise.
pub fn taylor_regime_ok(d: f64, delta_x: f64) -> bool {
    delta_x < d
}

/// Entanglement rate in the (R, rho, alpha) parametrization with d = 2 R alpha.
///
/// With both modes at `PaperApprox` this reproduces the closed form
/// (G/hbar) (2 rho^2 / alpha^3) R^3 dx^2 exactly.
pub fn entanglement_rate_parametrized(
    c: &PhysicalConstants,
    body: &quantities::Body,
    alpha: f64,
    delta_x: f64,
    mass_mode: MassMode,
    rate_mode: RateMode,
) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(Error::domain(format!(
            "entanglement_rate_parametrized: alpha must be > 1, got {alpha}"
        )));
    }
    let m = quantities::mass(body, mass_mode);
    let d = 2.0 * body.radius() * alpha;
    entanglement_rate(c, m, d, delta_x, rate_mode)
}

/// Rest-gas collisional decoherence rate
/// Gamma_g = (lambda_th / hbar) (16 pi / 3) p R^2.
///
/// Valid in the short-wavelength regime lambda_th << delta_x, where a single
/// scattered molecule fully localizes the superposition.
pub fn gas_scattering_rate(
    c: &PhysicalConstants,
    pressure: f64,
    radius: f64,
    temp_env: f64,
    gas_mass: f64,
) -> Result<f64> {
    if !(pressure >= 0.0) || !(radius >= 0.0) {
        return Err(Error::domain(
            "gas_scattering_rate: pressure and radius must be >= 0".to_string(),
        ));
    }
    if pressure == 0.0 {
        return Ok(0.0);
    }
    let lambda = quantities::thermal_wavelength_gas(c, temp_env, gas_mass)?;
    Ok((lambda / c.hbar) * (16.0 * std::f64::consts::PI / 3.0) * pressure * radius * radius)
}

/// Blackbody-scattering localization parameter
/// Lambda_sc = (1/lambda_e)^9 (8! * 8 zeta(9) pi^5 c R^6 / 9) chi_re^2, in m^-2 s^-1.
pub fn blackbody_scatter_param(c: &PhysicalConstants, radius: f64, temp_env: f64, chi_re: f64) -> f64 {
    if temp_env <= 0.0 || chi_re == 0.0 {
        return 0.0;
    }
    let inv_lambda = c.k_b * temp_env / (std::f64::consts::PI.powf(2.0 / 3.0) * c.hbar * c.c);
    let factorial_8 = 40_320.0;
    inv_lambda.powi(9)
        * (factorial_8 * 8.0 * quantities::ZETA_9 * std::f64::consts::PI.powi(5) * c.c
            * radius.powi(6)
            / 9.0)
        * chi_re
        * chi_re
}

/// Blackbody emission/absorption localization parameter
/// Lambda_e = (1/lambda)^6 (16 pi^9 c R^3 / 189) chi_im, in m^-2 s^-1.
///
/// The caller selects the temperature: internal for emission, environment
/// for absorption.
pub fn blackbody_emission_param(c: &PhysicalConstants, radius: f64, temp: f64, chi_im: f64) -> f64 {
    if temp <= 0.0 || chi_im == 0.0 {
        return 0.0;
    }
    let inv_lambda = c.k_b * temp / (std::f64::consts::PI.powf(2.0 / 3.0) * c.hbar * c.c);
    inv_lambda.powi(6) * (16.0 * std::f64::consts::PI.powi(9) * c.c * radius.powi(3) / 189.0) * chi_im
}

/// Long-wavelength localization rate Gamma = Lambda dx^2, flagged `Invalid`
/// when delta_x >= lambda_th (outside the regime the form is derived in).
pub fn localization_rate(lambda: f64, delta_x: f64, lambda_th: f64) -> (f64, RegimeFlag) {
    let flag = if delta_x >= lambda_th {
        RegimeFlag::Invalid
    } else {
        RegimeFlag::Valid
    };
    (lambda * delta_x * delta_x, flag)
}

/// Thermal decoherence of a dissipating oscillator,
/// Gamma_th = gamma k_B T_e / (hbar omega0).
pub fn thermal_decoherence_rate(
    c: &PhysicalConstants,
    gamma: f64,
    temp_env: f64,
    omega0: f64,
) -> Result<f64> {
    if !(omega0 > 0.0) {
        return Err(Error::domain(format!(
            "thermal_decoherence_rate: omega0 must be > 0, got {omega0}"
        )));
    }
    Ok(gamma * c.k_b * temp_env / (c.hbar * omega0))
}

/// Trap position-noise heating rate Gamma_x = pi w0^2 S_x(w0) / (4 sigma0^2).
pub fn position_noise_heating(omega0: f64, s_x_at_omega0: f64, sigma0: f64) -> Result<f64> {
    if !(sigma0 > 0.0) {
        return Err(Error::domain(format!(
            "position_noise_heating: sigma0 must be > 0, got {sigma0}"
        )));
    }
    Ok(std::f64::consts::PI * omega0 * omega0 * s_x_at_omega0 / (4.0 * sigma0 * sigma0))
}

/// Trap frequency-noise heating rate Gamma_w = pi w0^2 S_w(2 w0) / 16, with
/// S_w the fractional frequency-fluctuation PSD (units 1/Hz).
pub fn frequency_noise_heating(omega0: f64, s_omega_at_2omega0: f64) -> f64 {
    std::f64::consts::PI * omega0 * omega0 * s_omega_at_2omega0 / 16.0
}

/// Logarithmic-negativity estimate E_N ~ (4 g_s / omega0 - 4 nbar) / ln 2
/// for the coupled-oscillator protocol, with the coupling identified with
/// the entanglement rate at the expanded wavepacket size. May be negative;
/// entanglement requires E_N > 0, i.e. Gamma_ent > nbar omega0.
pub fn log_negativity_estimate(gamma_ent: f64, omega0: f64, nbar: f64) -> f64 {
    (4.0 * gamma_ent / omega0 - 4.0 * nbar) / std::f64::consts::LN_2
}

/// The two candidate accelerations of a test mass at `x0` sourced by a mass
/// in a superposition of `x_l` and `x_r`: a = G m_s / |x - x0|^2.
pub fn feynman_accelerations(
    c: &PhysicalConstants,
    m_source: f64,
    x_l: f64,
    x_r: f64,
    x0: f64,
) -> Result<(f64, f64)> {
    if x_l == x0 || x_r == x0 {
        return Err(Error::domain(
            "feynman_accelerations: source and test positions coincide".to_string(),
        ));
    }
    let a = |x: f64| c.g * m_source / (x - x0).powi(2);
    Ok((a(x_l), a(x_r)))
}

/// Newtonian potential magnitude phi = G m / r experienced at distance r.
pub fn newtonian_potential(c: &PhysicalConstants, m: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("newtonian_potential: r must be > 0, got {r}")));
    }
    Ok(c.g * m / r)
}

/// Evaluates the full rate budget of a configuration: entanglement rate,
/// per-channel decoherence rates, margins, binding channel, and regime
/// warnings. Warnings never alter the numbers.
pub fn rate_budget(c: &PhysicalConstants, config: &ExperimentConfig) -> Result<RateBudget> {
    let body = config.body();
    let env = config.environment();
    let delta_x = config.geometry().delta_x();
    let d = config.distance();

    let gamma_ent = entanglement_rate_parametrized(
        c,
        body,
        config.geometry().alpha(),
        delta_x,
        config.mass_mode(),
        config.rate_mode(),
    )?;

    let mut warnings = Vec::new();
    if !taylor_regime_ok(d, delta_x) {
        warnings.push(format!(
            "delta_x = {delta_x:.3e} m is not small against d = {d:.3e} m; \
             higher-order interaction terms are neglected"
        ));
    }

    let mut channels = Vec::new();

    // rest gas
    let gas_rate = gas_scattering_rate(c, env.pressure(), body.radius(), env.temperature(), env.gas_mass())?;
    if env.pressure() > 0.0 {
        let lambda_gas = quantities::thermal_wavelength_gas(c, env.temperature(), env.gas_mass())?;
        if delta_x < lambda_gas {
            warnings.push(format!(
                "delta_x = {delta_x:.3e} m is below the gas de-Broglie wavelength \
                 {lambda_gas:.3e} m; the single-collision localization rate is an upper estimate"
            ));
        }
    }
    channels.push(ChannelEntry::new(ChannelId::GasScattering, gas_rate, gamma_ent));

    // blackbody scattering (environment temperature)
    let sc_param = blackbody_scatter_param(c, body.radius(), env.temperature(), body.chi_re());
    let sc_rate = if sc_param > 0.0 {
        let lambda_ph = quantities::thermal_wavelength_photon(c, env.temperature())?;
        let (rate, flag) = localization_rate(sc_param, delta_x, lambda_ph);
        if flag == RegimeFlag::Invalid {
            warnings.push(format!(
                "bb_scatter: delta_x = {delta_x:.3e} m exceeds the photon thermal wavelength \
                 {lambda_ph:.3e} m; the Lambda dx^2 form is outside its long-wavelength regime"
            ));
        }
        rate
    } else {
        0.0
    };
    channels.push(ChannelEntry::new(ChannelId::BlackbodyScatter, sc_rate, gamma_ent));

    // blackbody emission (internal temperature)
    let em_param = blackbody_emission_param(c, body.radius(), body.temp_internal(), body.chi_im());
    let em_rate = if em_param > 0.0 {
        let lambda_ph = quantities::thermal_wavelength_photon(c, body.temp_internal())?;
        let (rate, flag) = localization_rate(em_param, delta_x, lambda_ph);
        if flag == RegimeFlag::Invalid {
            warnings.push(format!(
                "bb_emission: delta_x = {delta_x:.3e} m exceeds the photon thermal wavelength \
                 {lambda_ph:.3e} m; the Lambda dx^2 form is outside its long-wavelength regime"
            ));
        }
        rate
    } else {
        0.0
    };
    channels.push(ChannelEntry::new(ChannelId::BlackbodyEmission, em_rate, gamma_ent));

    // blackbody absorption (environment temperature)
    let ab_param = blackbody_emission_param(c, body.radius(), env.temperature(), body.chi_im());
    let ab_rate = if ab_param > 0.0 {
        let lambda_ph = quantities::thermal_wavelength_photon(c, env.temperature())?;
        let (rate, flag) = localization_rate(ab_param, delta_x, lambda_ph);
        if flag == RegimeFlag::Invalid {
            warnings.push(format!(
                "bb_absorption: delta_x = {delta_x:.3e} m exceeds the photon thermal wavelength \
                 {lambda_ph:.3e} m; the Lambda dx^2 form is outside its long-wavelength regime"
            ));
        }
        rate
    } else {
        0.0
    };
    channels.push(ChannelEntry::new(ChannelId::BlackbodyAbsorption, ab_rate, gamma_ent));

    if config.protocol() == Protocol::CoupledOscillators {
        let osc = config
            .oscillator()
            .expect("config invariant: oscillator present for oscillator protocol");
        let omega0 = osc.omega0();

        let th_rate = thermal_decoherence_rate(c, osc.gamma(), env.temperature(), omega0)?;
        channels.push(ChannelEntry::new(ChannelId::ThermalDissipation, th_rate, gamma_ent));

        let sigma0 = quantities::ground_state_size(c, config.mass(), omega0)?;
        let s_x = env.pos_noise().psd_at(omega0);
        let x_rate = position_noise_heating(omega0, s_x, sigma0)?;
        channels.push(ChannelEntry::new(ChannelId::PositionNoise, x_rate, gamma_ent));

        let s_w = env.freq_noise().psd_at(2.0 * omega0);
        let w_rate = frequency_noise_heating(omega0, s_w);
        channels.push(ChannelEntry::new(ChannelId::FrequencyNoise, w_rate, gamma_ent));

        // threshold entry: Gamma_ent must beat nbar * omega0
        channels.push(ChannelEntry::new(
            ChannelId::ThermalOccupation,
            osc.nbar() * omega0,
            gamma_ent,
        ));
    }

    let feasible = channels.iter().all(ChannelEntry::passes);
    let binding_channel = channels
        .iter()
        .filter(|e| e.margin.is_some())
        .min_by(|a, b| a.margin.unwrap().total_cmp(&b.margin.unwrap()))
        .map(|e| e.channel);

    let (aggregate_margin, aggregate_feasible) = match config.comparison() {
        ComparisonMode::PaperComparison => (None, None),
        ComparisonMode::Aggregate => {
            let total: f64 = channels.iter().map(|e| e.rate).sum();
            if total > 0.0 {
                let m = gamma_ent / total;
                (Some(m), Some(m > 1.0))
            } else {
                (None, Some(true))
            }
        }
    };

    Ok(RateBudget {
        gamma_ent,
        channels,
        binding_channel,
        feasible,
        aggregate_margin,
        aggregate_feasible,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantities::{Body, Environment, NoiseModel, Oscillator, PairGeometry, CODATA};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn silica() -> Body {
        Body::new(75e-9, 2e3, 1.0, 1.0, 1.0).unwrap()
    }

    fn lead() -> Body {
        Body::new(70e-6, 1e4, 1.0, 1.0, 1.0).unwrap()
    }

    fn quiet_env(pressure: f64, temp: f64) -> Environment {
        Environment::new(pressure, temp, CODATA.m_h2, NoiseModel::silent(), NoiseModel::silent())
            .unwrap()
    }

    fn csign_config(body: Body, alpha: f64, delta_x: f64, env: Environment) -> ExperimentConfig {
        ExperimentConfig::new(
            body,
            PairGeometry::from_alpha(alpha, delta_x).unwrap(),
            env,
            None,
            Protocol::CsignPhase,
            MassMode::PaperApprox,
            RateMode::PaperApprox,
            ComparisonMode::PaperComparison,
        )
        .unwrap()
    }

    #[test]
    fn entanglement_rate_second_scale_example() {
        // 1e11 silicon atoms at d = 1 um, dx = 100 nm entangle on the scale
        // of seconds
        let m = 1e11 * CODATA.m_si;
        let rate = entanglement_rate(&CODATA, m, 1e-6, 100e-9, RateMode::PaperApprox).unwrap();
        assert_relative_eq!(rate, 1.376550e-1, max_relative = 1e-5);
        assert!(1.0 / rate > 1.0 && 1.0 / rate < 10.0);
    }

    #[test]
    fn entanglement_rate_zero_delocalization() {
        let rate = entanglement_rate(&CODATA, 1e-15, 1e-6, 0.0, RateMode::PaperApprox).unwrap();
        assert_eq!(rate, 0.0);
    }

    #[test]
    fn entanglement_rate_domain_errors() {
        assert!(entanglement_rate(&CODATA, 0.0, 1e-6, 1e-7, RateMode::PaperApprox).is_err());
        assert!(entanglement_rate(&CODATA, 1e-15, 0.0, 1e-7, RateMode::Exact).is_err());
        assert!(entanglement_rate(&CODATA, 1e-15, 1e-6, -1e-9, RateMode::Exact).is_err());
    }

    #[test]
    fn exact_to_approx_ratio_at_tenth() {
        let ex = entanglement_rate(&CODATA, 1.0, 1.0, 0.1, RateMode::Exact).unwrap();
        let ap = entanglement_rate(&CODATA, 1.0, 1.0, 0.1, RateMode::PaperApprox).unwrap();
        // (1 - 1/sqrt(1.01)) / 0.01
        assert_relative_eq!(ex / ap, 0.4962809790, max_relative = 1e-9);
    }

    #[test]
    fn exact_converges_to_half_at_second_order() {
        // deviation from 1/2 shrinks by ~100x per decade of dx/d
        let mut devs = Vec::new();
        for u in [1e-1, 1e-2, 1e-3] {
            let ex = entanglement_rate(&CODATA, 1.0, 1.0, u, RateMode::Exact).unwrap();
            let ap = entanglement_rate(&CODATA, 1.0, 1.0, u, RateMode::PaperApprox).unwrap();
            devs.push((ex / ap - 0.5).abs());
        }
        assert!(devs[0] < 4e-3);
        for w in devs.windows(2) {
            let order = (w[0] / w[1]).log10() / 1.0; // per decade
            assert!((order - 2.0).abs() < 0.05, "convergence order {order}");
        }
    }

    #[test]
    fn parametrized_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let radius = 10f64.powf(rng.gen_range(-8.0..-2.0));
            let density = 10f64.powf(rng.gen_range(2.0..4.5));
            let alpha = 1.0 + rng.gen_range(0.01..9.0);
            let dx = 10f64.powf(rng.gen_range(-13.0..-4.0));
            let body = Body::new(radius, density, 1.0, 1.0, 1.0).unwrap();
            for (mm, rm) in [
                (MassMode::PaperApprox, RateMode::PaperApprox),
                (MassMode::ExactSphere, RateMode::Exact),
            ] {
                let via_param =
                    entanglement_rate_parametrized(&CODATA, &body, alpha, dx, mm, rm).unwrap();
                let direct = entanglement_rate(
                    &CODATA,
                    quantities::mass(&body, mm),
                    2.0 * radius * alpha,
                    dx,
                    rm,
                )
                .unwrap();
                assert_relative_eq!(via_param, direct, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn parametrized_closed_form() {
        // (G/hbar)(2 rho^2/alpha^3) R^3 dx^2 for the silica example
        let rate = entanglement_rate_parametrized(
            &CODATA,
            &silica(),
            2.0,
            2e-6,
            MassMode::PaperApprox,
            RateMode::PaperApprox,
        )
        .unwrap();
        assert_relative_eq!(rate, 1.068005e-3, max_relative = 1e-5);
        let closed = (CODATA.g / CODATA.hbar) * (2.0 * 4e6 / 8.0) * (75e-9_f64).powi(3) * 4e-12;
        assert_relative_eq!(rate, closed, max_relative = 1e-12);
    }

    #[test]
    fn parametrized_alpha_cube_scaling() {
        let r1 = entanglement_rate_parametrized(
            &CODATA, &silica(), 2.0, 1e-6, MassMode::PaperApprox, RateMode::PaperApprox,
        )
        .unwrap();
        let r2 = entanglement_rate_parametrized(
            &CODATA, &silica(), 4.0, 1e-6, MassMode::PaperApprox, RateMode::PaperApprox,
        )
        .unwrap();
        assert_relative_eq!(r1 / r2, 8.0, max_relative = 1e-12);
    }

    #[test]
    fn gas_rate_reference_coefficient() {
        // Gamma_g ~ 2e26 p R^2 at T = 1 K with hydrogen
        let coeff = gas_scattering_rate(&CODATA, 1.0, 1.0, 1.0, CODATA.m_h2).unwrap();
        assert!((coeff / 2e26 - 1.0).abs() < 0.10, "coefficient {coeff:.4e}");
    }

    #[test]
    fn gas_rate_examples() {
        assert_eq!(gas_scattering_rate(&CODATA, 0.0, 1e-7, 1.0, CODATA.m_h2).unwrap(), 0.0);
        let r = gas_scattering_rate(&CODATA, 1e-15, 75e-9, 1.0, CODATA.m_h2).unwrap();
        assert_relative_eq!(r, 1.098911e-3, max_relative = 1e-5);
        // T = 0 with finite pressure is ill-defined
        assert!(gas_scattering_rate(&CODATA, 1e-15, 75e-9, 0.0, CODATA.m_h2).is_err());
    }

    #[test]
    fn blackbody_scatter_reference_coefficient() {
        let coeff = blackbody_scatter_param(&CODATA, 1.0, 1.0, 1.0);
        assert_relative_eq!(coeff, 1.979648e36, max_relative = 1e-5);
        // quoted rounding is 5e36; stays within a factor 3
        assert!(coeff / 5e36 < 3.0 && coeff / 5e36 > 1.0 / 3.0);
    }

    #[test]
    fn blackbody_scatter_scalings() {
        assert_eq!(blackbody_scatter_param(&CODATA, 1.0, 1.0, 0.0), 0.0);
        assert_eq!(blackbody_scatter_param(&CODATA, 1.0, 0.0, 1.0), 0.0);
        let l1 = blackbody_scatter_param(&CODATA, 2e-7, 1.0, 1.0);
        let l2 = blackbody_scatter_param(&CODATA, 2e-7, 2.0, 1.0);
        assert_relative_eq!(l2 / l1, 512.0, max_relative = 1e-10);
    }

    #[test]
    fn blackbody_emission_reference_coefficient() {
        let coeff = blackbody_emission_param(&CODATA, 1.0, 1.0, 1.0);
        assert_relative_eq!(coeff, 5.386997e25, max_relative = 1e-5);
        assert!(coeff / 5e25 < 2.0 && coeff / 5e25 > 0.5);
    }

    #[test]
    fn blackbody_emission_scalings() {
        assert_eq!(blackbody_emission_param(&CODATA, 1.0, 1.0, 0.0), 0.0);
        let l1 = blackbody_emission_param(&CODATA, 2e-7, 1.0, 1.0);
        let l2 = blackbody_emission_param(&CODATA, 2e-7, 2.0, 1.0);
        assert_relative_eq!(l2 / l1, 64.0, max_relative = 1e-10);
    }

    #[test]
    fn localization_rate_regime() {
        let (r, f) = localization_rate(1e25, 0.0, 5e-3);
        assert_eq!(r, 0.0);
        assert_eq!(f, RegimeFlag::Valid);
        let lam = blackbody_emission_param(&CODATA, 75e-9, 1.0, 1.0);
        let (r, _) = localization_rate(lam, 2e-6, 5e-3);
        assert_relative_eq!(r, lam * 4e-12, max_relative = 1e-12);
        let (_, f) = localization_rate(lam, 1e-2, 5e-3);
        assert_eq!(f, RegimeFlag::Invalid);
    }

    #[test]
    fn thermal_decoherence_examples() {
        assert_eq!(thermal_decoherence_rate(&CODATA, 0.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(thermal_decoherence_rate(&CODATA, 1e-3, 0.0, 1.0).unwrap(), 0.0);
        let r = thermal_decoherence_rate(&CODATA, 1e-3, 1.0, TWO_PI * 1e5).unwrap();
        assert_relative_eq!(r, 2.083662e2, max_relative = 1e-5);
        assert!(thermal_decoherence_rate(&CODATA, 1e-3, 1.0, 0.0).is_err());
        // linear in gamma and T_e
        let r2 = thermal_decoherence_rate(&CODATA, 2e-3, 3.0, TWO_PI * 1e5).unwrap();
        assert_relative_eq!(r2 / r, 6.0, max_relative = 1e-12);
    }

    #[test]
    fn position_noise_examples() {
        assert_eq!(position_noise_heating(TWO_PI * 1e5, 0.0, 3e-12).unwrap(), 0.0);
        // sqrt(S_x) = 1e-16 m/sqrt(Hz) at a 3 pm ground state
        let r = position_noise_heating(TWO_PI * 1e5, 1e-32, 3e-12).unwrap();
        assert_relative_eq!(r, 3.445142e2, max_relative = 1e-5);
        let r2 = position_noise_heating(TWO_PI * 1e5, 1e-32, 6e-12).unwrap();
        assert_relative_eq!(r / r2, 4.0, max_relative = 1e-12);
        assert!(position_noise_heating(TWO_PI * 1e5, 1e-32, 0.0).is_err());
    }

    #[test]
    fn frequency_noise_examples() {
        assert_eq!(frequency_noise_heating(TWO_PI * 1e5, 0.0), 0.0);
        let r = frequency_noise_heating(TWO_PI * 1e5, 1e-8);
        assert_relative_eq!(r, 7.751569e2, max_relative = 1e-5);
        assert_relative_eq!(frequency_noise_heating(TWO_PI * 1e5, 3e-8) / r, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn log_negativity_estimate_examples() {
        assert_relative_eq!(log_negativity_estimate(0.5, 1.0, 0.5), 0.0);
        assert_relative_eq!(
            log_negativity_estimate(0.25, 1.0, 0.0),
            1.0 / std::f64::consts::LN_2,
            max_relative = 1e-12
        );
        assert!(log_negativity_estimate(0.1, 1.0, 0.5) < 0.0);
    }

    #[test]
    fn feynman_acceleration_examples() {
        let (al, ar) = feynman_accelerations(&CODATA, 1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(al, ar);
        assert_relative_eq!(al, CODATA.g, max_relative = 1e-12);
        let (a1, _) = feynman_accelerations(&CODATA, 1.0, 2.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(al / a1, 4.0, max_relative = 1e-12);
        assert!(feynman_accelerations(&CODATA, 1.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn newtonian_potential_examples() {
        assert_relative_eq!(newtonian_potential(&CODATA, 1.0, 1.0).unwrap(), CODATA.g);
        let far = newtonian_potential(&CODATA, 1.0, 1e10).unwrap();
        assert!(far < 1e-20 * newtonian_potential(&CODATA, 1.0, 1.0).unwrap());
        assert!(newtonian_potential(&CODATA, 1.0, 0.0).is_err());
        // phi(d)/phi(sqrt(d^2+dx^2)) = sqrt(1 + dx^2/d^2)
        let d = 1e-6;
        let dx = 3e-7;
        let ratio = newtonian_potential(&CODATA, 1.0, d).unwrap()
            / newtonian_potential(&CODATA, 1.0, (d * d + dx * dx).sqrt()).unwrap();
        assert_relative_eq!(ratio, (1.0 + (dx / d).powi(2)).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn budget_silica_csign() {
        let cfg = csign_config(silica(), 2.0, 2e-6, quiet_env(1e-15, 1.0));
        let b = rate_budget(&CODATA, &cfg).unwrap();
        assert_eq!(b.binding_channel, Some(ChannelId::GasScattering));
        let m = b.margin(ChannelId::GasScattering).unwrap().unwrap();
        // the quoted bound dx > 2 um corresponds to margin ~ 1 here
        assert!(m > 0.5 && m < 2.0, "margin {m}");
        assert_eq!(b.feasible, b.channels.iter().all(ChannelEntry::passes));
    }

    #[test]
    fn budget_zero_delta_x_infeasible() {
        let cfg = csign_config(silica(), 2.0, 0.0, quiet_env(1e-15, 1.0));
        let b = rate_budget(&CODATA, &cfg).unwrap();
        assert_eq!(b.gamma_ent, 0.0);
        assert!(!b.feasible);
    }

    #[test]
    fn budget_lead_csign() {
        let cfg = csign_config(lead(), 2.0, 12e-9, quiet_env(1e-15, 1.0));
        let b = rate_budget(&CODATA, &cfg).unwrap();
        let m = b.margin(ChannelId::GasScattering).unwrap().unwrap();
        assert!(m > 0.5 && m < 2.0, "margin {m}");
    }

    #[test]
    fn budget_taylor_warning() {
        // dx = 2 um exceeds d = 300 nm for the silica pair
        let cfg = csign_config(silica(), 2.0, 2e-6, quiet_env(1e-15, 1.0));
        let b = rate_budget(&CODATA, &cfg).unwrap();
        assert!(b.warnings.iter().any(|w| w.contains("higher-order")));
    }

    #[test]
    fn budget_oscillator_channels() {
        let osc = Oscillator::new(TWO_PI * 1e5, 1e-3, 0.5, 1.0).unwrap();
        let pos = NoiseModel::new(1e-30, TWO_PI * 1e5, 2.0).unwrap();
        let freq = NoiseModel::new(1e-6, 2.0 * TWO_PI * 1e5, 0.0).unwrap();
        let env = Environment::new(1e-6, 40.0, CODATA.m_h2, pos, freq).unwrap();
        let cfg = ExperimentConfig::new(
            silica(),
            PairGeometry::from_alpha(2.0, 3.43e-2).unwrap(),
            env,
            Some(osc),
            Protocol::CoupledOscillators,
            MassMode::PaperApprox,
            RateMode::PaperApprox,
            ComparisonMode::PaperComparison,
        )
        .unwrap();
        let b = rate_budget(&CODATA, &cfg).unwrap();
        assert_eq!(b.channels.len(), 8);
        let occ = b
            .channels
            .iter()
            .find(|e| e.channel == ChannelId::ThermalOccupation)
            .unwrap();
        assert_relative_eq!(occ.rate, 0.5 * TWO_PI * 1e5, max_relative = 1e-12);
    }

    #[test]
    fn budget_aggregate_mode() {
        let cfg = ExperimentConfig::new(
            silica(),
            PairGeometry::from_alpha(2.0, 2e-6).unwrap(),
            quiet_env(1e-15, 1.0),
            None,
            Protocol::CsignPhase,
            MassMode::PaperApprox,
            RateMode::PaperApprox,
            ComparisonMode::Aggregate,
        )
        .unwrap();
        let b = rate_budget(&CODATA, &cfg).unwrap();
        let total: f64 = b.channels.iter().map(|e| e.rate).sum();
        assert_relative_eq!(b.aggregate_margin.unwrap(), b.gamma_ent / total, max_relative = 1e-12);
    }

    #[test]
    fn budget_monotonicity_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let radius = 10f64.powf(rng.gen_range(-8.0..-3.0));
            let density = 10f64.powf(rng.gen_range(2.5..4.2));
            let body = Body::new(radius, density, 1.0, 1.0, 1.0).unwrap();
            let alpha = 1.0 + rng.gen_range(0.1..5.0);
            let dx = 10f64.powf(rng.gen_range(-10.0..-5.0));
            let p = 10f64.powf(rng.gen_range(-18.0..-10.0));
            let t = 10f64.powf(rng.gen_range(-0.5..1.5));

            // Gamma_ent strictly increasing in dx and R
            let g0 = entanglement_rate_parametrized(
                &CODATA, &body, alpha, dx, MassMode::PaperApprox, RateMode::PaperApprox,
            )
            .unwrap();
            let g_dx = entanglement_rate_parametrized(
                &CODATA, &body, alpha, dx * 1.7, MassMode::PaperApprox, RateMode::PaperApprox,
            )
            .unwrap();
            assert!(g_dx > g0);
            let body_big = Body::new(radius * 1.3, density, 1.0, 1.0, 1.0).unwrap();
            let g_r = entanglement_rate_parametrized(
                &CODATA, &body_big, alpha, dx, MassMode::PaperApprox, RateMode::PaperApprox,
            )
            .unwrap();
            assert!(g_r > g0);

            // gas rate linear in p, quadratic in R
            let gg = gas_scattering_rate(&CODATA, p, radius, t, CODATA.m_h2).unwrap();
            let gg_p = gas_scattering_rate(&CODATA, 3.0 * p, radius, t, CODATA.m_h2).unwrap();
            assert_relative_eq!(gg_p / gg, 3.0, max_relative = 1e-10);
            let gg_r = gas_scattering_rate(&CODATA, p, 2.0 * radius, t, CODATA.m_h2).unwrap();
            assert_relative_eq!(gg_r / gg, 4.0, max_relative = 1e-10);

            // blackbody temperature power laws
            let sc = blackbody_scatter_param(&CODATA, radius, t, 1.0);
            let sc2 = blackbody_scatter_param(&CODATA, radius, 2.0 * t, 1.0);
            assert_relative_eq!(sc2 / sc, 512.0, max_relative = 1e-9);
            let em = blackbody_emission_param(&CODATA, radius, t, 1.0);
            let em2 = blackbody_emission_param(&CODATA, radius, 2.0 * t, 1.0);
            assert_relative_eq!(em2 / em, 64.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn rate_functions_are_pure() {
        let a = gas_scattering_rate(&CODATA, 1e-15, 75e-9, 1.0, CODATA.m_h2).unwrap();
        let b = gas_scattering_rate(&CODATA, 1e-15, 75e-9, 1.0, CODATA.m_h2).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let cfg = csign_config(silica(), 2.0, 2e-6, quiet_env(1e-15, 1.0));
        let b1 = rate_budget(&CODATA, &cfg).unwrap();
        let b2 = rate_budget(&CODATA, &cfg).unwrap();
        assert_eq!(b1.gamma_ent.to_bits(), b2.gamma_ent.to_bits());
        for (x, y) in b1.channels.iter().zip(b2.channels.iter()) {
            assert_eq!(x.rate.to_bits(), y.rate.to_bits());
        }
    }

    #[test]
    fn channel_id_round_trip_names() {
        for id in ChannelId::ALL {
            let s = id.name();
            let back: ChannelId = s.parse().unwrap();
            assert_eq!(back, id);
        }
        assert!("nope".parse::<ChannelId>().is_err());
    }
}

//! Desk-scale simulators of the two entanglement protocols. They serve as
//! independent oracles for the closed-form rates and thresholds.

pub mod branch;
pub mod gaussian;

pub use branch::{
    branch_overlap, csign_evolve, csign_phases, negativity_two_qubit, BranchState, CsignPhases,
};
pub use gaussian::{
    gaussian_evolve, gaussian_init, log_negativity_gaussian, max_log_negativity,
    oscillator_threshold_scan, symplectic_eigenvalues, GaussianTwoMode,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantities::{ExperimentConfig, PhysicalConstants, Protocol};
use crate::rates;

/// One sampled point of a protocol simulation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TracePoint {
    /// Time in seconds.
    pub t: f64,
    /// Entangling phase, present for the CSIGN protocol only.
    pub delta_phi: Option<f64>,
    /// Negativity (two-qubit negativity, or (2^E_N - 1)/2 for Gaussian states).
    pub negativity: f64,
    /// Logarithmic negativity.
    pub log_negativity: f64,
}

/// Time-ordered simulation record.
#[derive(Debug, Clone, Serialize)]
pub struct SimTrace {
    pub points: Vec<TracePoint>,
}

impl SimTrace {
    pub fn new(points: Vec<TracePoint>) -> Result<Self> {
        for w in points.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(Error::state(format!(
                    "trace times must be strictly increasing: {} then {}",
                    w[0].t, w[1].t
                )));
            }
        }
        for p in &points {
            if p.negativity < 0.0 || p.log_negativity < 0.0 {
                return Err(Error::state("trace measures must be >= 0".to_string()));
            }
        }
        Ok(SimTrace { points })
    }

    /// First sampled time at which the negativity exceeds `threshold`.
    pub fn onset(&self, threshold: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| p.negativity > threshold)
            .map(|p| p.t)
    }

    /// CSV export with columns t_s, delta_phi_rad, negativity, E_N.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,delta_phi_rad,negativity,E_N\r\n");
        for p in &self.points {
            let phi = p.delta_phi.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\r\n",
                p.t, phi, p.negativity, p.log_negativity
            ));
        }
        out
    }
}

/// Simulates the CSIGN protocol for the configured pair. The per-particle
/// dephasing rate is the sum of the configuration's decoherence channel
/// rates.
pub fn simulate_csign(
    c: &PhysicalConstants,
    config: &ExperimentConfig,
    t_max: f64,
    samples: usize,
) -> Result<SimTrace> {
    if !(t_max > 0.0) {
        return Err(Error::domain(format!("simulate: t_max must be > 0, got {t_max}")));
    }
    if samples < 2 {
        return Err(Error::domain(format!("simulate: samples must be >= 2, got {samples}")));
    }
    let budget = rates::rate_budget(c, config)?;
    let gamma_dec: f64 = budget
        .channels
        .iter()
        .filter(|e| e.channel != rates::ChannelId::ThermalOccupation)
        .map(|e| e.rate)
        .sum();
    let m = config.mass();
    let d = config.distance();
    let dx = config.geometry().delta_x();

    let mut points = Vec::with_capacity(samples);
    for k in 0..samples {
        let t = t_max * k as f64 / (samples - 1) as f64;
        let phases = csign_phases(c, m, d, dx, t)?;
        let state = csign_evolve(c, m, d, dx, gamma_dec, t)?;
        let n = state.negativity()?;
        points.push(TracePoint {
            t,
            delta_phi: Some(phases.delta_phi),
            negativity: n,
            log_negativity: (1.0 + 2.0 * n).log2(),
        });
    }
    SimTrace::new(points)
}

/// Simulates the coupled-oscillator protocol. The bare quadrature coupling
/// g = (G/hbar) m^2 sigma0^2 / d^3 follows from the configured geometry; the
/// initial state is the squeezed thermal state of the configured oscillator.
pub fn simulate_oscillator(
    c: &PhysicalConstants,
    config: &ExperimentConfig,
    t_max: f64,
    samples: usize,
) -> Result<SimTrace> {
    if !(t_max > 0.0) {
        return Err(Error::domain(format!("simulate: t_max must be > 0, got {t_max}")));
    }
    if samples < 2 {
        return Err(Error::domain(format!("simulate: samples must be >= 2, got {samples}")));
    }
    let osc = config.oscillator().ok_or_else(|| {
        Error::config("oscillator", "required to simulate the oscillator protocol")
    })?;
    let omega0 = osc.omega0();
    let m = config.mass();
    let d = config.distance();
    let sigma0 = crate::quantities::ground_state_size(c, m, omega0)?;
    let g = (c.g / c.hbar) * m * m * sigma0 * sigma0 / d.powi(3);

    let mut state = gaussian_init(osc.nbar(), osc.eta())?;
    let mut points = Vec::with_capacity(samples);
    let push = |points: &mut Vec<TracePoint>, t: f64, state: &GaussianTwoMode| -> Result<()> {
        let en = log_negativity_gaussian(state)?;
        points.push(TracePoint {
            t,
            delta_phi: None,
            negativity: (en.exp2() - 1.0) / 2.0,
            log_negativity: en,
        });
        Ok(())
    };
    push(&mut points, 0.0, &state)?;
    let interval = t_max / (samples - 1) as f64;
    for k in 1..samples {
        let substeps = ((interval * omega0) / 0.05).ceil().max(1.0) as usize;
        let dt = interval / substeps as f64;
        state = gaussian_evolve(
            c,
            &state,
            omega0,
            g,
            osc.gamma(),
            config.environment().temperature(),
            dt,
            substeps,
        )?;
        push(&mut points, interval * k as f64, &state)?;
    }
    SimTrace::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantities::{
        Body, ComparisonMode, Environment, MassMode, NoiseModel, Oscillator, PairGeometry,
        Protocol, RateMode, CODATA,
    };
    use approx::assert_relative_eq;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn clean_csign_config(delta_x: f64) -> ExperimentConfig {
        // perfect isolation: zero pressure, zero temperatures
        let body = Body::new(75e-9, 2e3, 1.0, 1.0, 0.0).unwrap();
        let env = Environment::new(0.0, 0.0, CODATA.m_h2, NoiseModel::silent(), NoiseModel::silent())
            .unwrap();
        ExperimentConfig::new(
            body,
            PairGeometry::from_alpha(2.0, delta_x).unwrap(),
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
    fn csign_trace_reports_onset() {
        let cfg = clean_csign_config(1e-7);
        let gamma_ent = rates::rate_budget(&CODATA, &cfg).unwrap().gamma_ent;
        // the exact phase rate is about half the leading-order one
        let t_max = std::f64::consts::PI / gamma_ent;
        let trace = simulate_csign(&CODATA, &cfg, t_max, 400).unwrap();
        let onset = trace.onset(1e-6).expect("onset expected for a clean run");
        assert!(onset > 0.0 && onset < t_max);
    }

    #[test]
    fn csign_trace_phase_column_matches_rate() {
        let cfg = clean_csign_config(1e-9);
        let m = cfg.mass();
        let d = cfg.distance();
        let exact = rates::entanglement_rate(&CODATA, m, d, 1e-9, RateMode::Exact).unwrap();
        let trace = simulate_csign(&CODATA, &cfg, 1.0 / exact, 11).unwrap();
        for p in &trace.points {
            assert_relative_eq!(p.delta_phi.unwrap(), exact * p.t, max_relative = 1e-9);
        }
    }

    #[test]
    fn oscillator_trace_with_negligible_coupling_reports_none() {
        let body = Body::new(75e-9, 2e3, 1.0, 1.0, 0.0).unwrap();
        let env = Environment::new(0.0, 0.0, CODATA.m_h2, NoiseModel::silent(), NoiseModel::silent())
            .unwrap();
        let osc = Oscillator::new(TWO_PI * 1e5, 0.0, 0.5, 1.0).unwrap();
        let cfg = ExperimentConfig::new(
            body,
            PairGeometry::from_alpha(1e6, 1e-7).unwrap(), // far-separated traps
            env,
            Some(osc),
            Protocol::CoupledOscillators,
            MassMode::PaperApprox,
            RateMode::PaperApprox,
            ComparisonMode::PaperComparison,
        )
        .unwrap();
        let trace = simulate_oscillator(&CODATA, &cfg, 3.0 * TWO_PI / (TWO_PI * 1e5), 20).unwrap();
        assert!(trace.onset(1e-6).is_none());
    }

    #[test]
    fn trace_csv_shape() {
        let cfg = clean_csign_config(1e-7);
        let trace = simulate_csign(&CODATA, &cfg, 1.0, 2).unwrap();
        let csv = trace.to_csv();
        let lines: Vec<&str> = csv.trim_end().split("\r\n").collect();
        assert_eq!(lines.len(), 3); // header + 2 samples
        assert_eq!(lines[0], "t_s,delta_phi_rad,negativity,E_N");
    }

    #[test]
    fn trace_rejects_unordered_times() {
        let p = |t: f64| TracePoint {
            t,
            delta_phi: None,
            negativity: 0.0,
            log_negativity: 0.0,
        };
        assert!(SimTrace::new(vec![p(0.0), p(0.0)]).is_err());
        assert!(SimTrace::new(vec![p(0.0), p(1.0)]).is_ok());
    }

    #[test]
    fn simulate_argument_validation() {
        let cfg = clean_csign_config(1e-7);
        assert!(simulate_csign(&CODATA, &cfg, 0.0, 10).is_err());
        assert!(simulate_csign(&CODATA, &cfg, 1.0, 1).is_err());
    }
}

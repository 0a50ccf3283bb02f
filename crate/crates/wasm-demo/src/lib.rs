//! Browser bindings: small lattices, everything returned as JSON text.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use tame_core::bench::{benchmark_observable, stream, Bench, Profile, RunConfig, Variant};
use tame_core::eta::{time_average_simulated, EdgeStates, TimeAveraging, WindowKind};
use tame_core::hamiltonian::{build_family, LatticeSpec};
use tame_core::quantum::populations;
use tame_core::simulator::{make_corrupted, SimulatorHandle};

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, JsError> {
    serde_json::to_string(v).map_err(js_err)
}

fn demo_config(n_half: usize, omega0: f64) -> RunConfig {
    let mut cfg = RunConfig::profile(Profile::Desk);
    cfg.lattice.n_half = n_half;
    cfg.omega0 = omega0;
    cfg.eta_list = vec![0.0];
    cfg
}

#[derive(Serialize)]
struct WindowOut {
    kind: WindowKind,
    eps_min: f64,
    eps_max: f64,
}

#[derive(Serialize)]
struct SpectrumOut {
    energies: Vec<f64>,
    /// `⟨α|X|α⟩` for each eigenstate of the same member.
    x_diagonal: Vec<f64>,
    windows: Vec<WindowOut>,
}

/// Spectrum of `H_f(ω₀, λ = η ω₀ / a)` with the three windows of the
/// target (η = 0).
#[wasm_bindgen]
pub fn spectrum(n_half: usize, omega0: f64, eta: f64) -> Result<String, JsError> {
    let bench = Bench::new(demo_config(n_half, omega0)).map_err(js_err)?;
    let spec = bench.config.lattice;
    let h = build_family(spec, omega0, eta * omega0 / spec.a).map_err(js_err)?;
    let eigen = h.eigen().map_err(js_err)?;
    let x = benchmark_observable(&spec);
    to_json(&SpectrumOut {
        energies: eigen.energies.clone(),
        x_diagonal: eigen.diagonal_elements(x.matrix()),
        windows: bench
            .windows
            .iter()
            .map(|w| WindowOut {
                kind: w.kind,
                eps_min: w.window.eps_min,
                eps_max: w.window.eps_max,
            })
            .collect(),
    })
}

#[derive(Serialize)]
struct SignalOut {
    dt: f64,
    samples: Vec<f64>,
    time_average: f64,
    /// Orthodox value of the state's target populations.
    orthodox: f64,
    energy: f64,
}

/// `⟨X(t)⟩` of a random direct benchmarking state of the target, evolved by
/// a simulator of the member with corruption `eta`.
#[wasm_bindgen]
pub fn signal(
    n_half: usize,
    omega0: f64,
    eta: f64,
    window: &str,
    seed: u64,
) -> Result<String, JsError> {
    let kind: WindowKind = window.parse().map_err(js_err)?;
    let bench = Bench::new(demo_config(n_half, omega0)).map_err(js_err)?;
    let eigen = bench.eigen();
    let w = bench.window(kind).map_err(js_err)?;
    let mut rng = stream(seed, &[7, kind as u64]);
    let edges = EdgeStates::Direct {
        eigen,
        bumps: &bench.standardize,
    };
    let psi = edges.draw(eigen.dim(), &w, &mut rng).map_err(js_err)?;
    let sim = make_corrupted(bench.config.lattice, omega0, eta).map_err(js_err)?;
    let ta = TimeAveraging::new(eigen.breadth(), 40.0, 0.9, 1e-4, 0).map_err(js_err)?;
    let avg = time_average_simulated(&sim, &psi, &bench.x, &ta).map_err(js_err)?;
    let p = populations(&psi, eigen).map_err(js_err)?;
    let x_diag = eigen.diagonal_elements(bench.x.matrix());
    to_json(&SignalOut {
        dt: avg.dt,
        samples: avg.samples,
        time_average: avg.value,
        orthodox: p.iter().zip(&x_diag).map(|(p, x)| p * x).sum(),
        energy: sim.energy(&psi).map_err(js_err)?,
    })
}

#[derive(Serialize)]
struct StandardOut {
    values: Vec<f64>,
    mean: f64,
    ci_low: f64,
    ci_high: f64,
    proposals: usize,
}

/// Standard of comparison for one window (`variant` is 1 or 2).
#[wasm_bindgen]
pub fn standardize(
    n_half: usize,
    omega0: f64,
    window: &str,
    variant: u8,
    n: usize,
    seed: u64,
) -> Result<String, JsError> {
    let kind: WindowKind = window.parse().map_err(js_err)?;
    let variant = match variant {
        1 => Variant::I,
        2 => Variant::II,
        v => return Err(JsError::new(&format!("unknown variant {v}"))),
    };
    let mut cfg = demo_config(n_half, omega0);
    cfg.n_standard = n.max(10);
    let bench = Bench::new(cfg).map_err(js_err)?;
    let s = bench.standard(variant, kind, seed).map_err(js_err)?;
    to_json(&StandardOut {
        mean: s.summary.mean,
        ci_low: s.summary.ci_low,
        ci_high: s.summary.ci_high,
        proposals: s.proposals,
        values: s.values,
    })
}

/// Lattice spec validation, so the page can reject input before calling in.
#[wasm_bindgen]
pub fn check_lattice(n_half: usize) -> Result<(), JsError> {
    LatticeSpec::new(n_half, 1.0, 1.0)
        .map(|_| ())
        .map_err(js_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_has_every_level_and_three_windows() {
        let out: serde_json::Value =
            serde_json::from_str(&spectrum(10, 0.05, 0.0).unwrap()).unwrap();
        assert_eq!(out["energies"].as_array().unwrap().len(), 21);
        assert_eq!(out["windows"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn uncorrupted_signal_averages_to_orthodox_value() {
        let out: serde_json::Value =
            serde_json::from_str(&signal(10, 0.05, 0.0, "mid", 3).unwrap()).unwrap();
        let ta = out["time_average"].as_f64().unwrap();
        let orth = out["orthodox"].as_f64().unwrap();
        assert!((ta - orth).abs() < 0.05 * orth.abs(), "{ta} vs {orth}");
    }

    #[test]
    fn standardize_returns_requested_count() {
        let out: serde_json::Value =
            serde_json::from_str(&standardize(10, 0.05, "low", 2, 30, 1).unwrap()).unwrap();
        assert_eq!(out["values"].as_array().unwrap().len(), 30);
    }
}

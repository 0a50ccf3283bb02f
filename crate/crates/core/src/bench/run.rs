use std::time::Instant;

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{RunConfig, Variant};
use crate::error::{Error, Result};
use crate::eta::{
    arbitrate_variant1, arbitrate_variant2, select_window, standardize_variant1,
    standardize_variant2, AnnealCache, ArbitrationSettings, EdgeStates, EnergyWindow,
    InitializingHamiltonian, ScheduleSpace, SimulationDiagnostic, StandardOfComparison,
    StandardizeSettings, TimeAveraging, WindowKind,
};
use crate::hamiltonian::{build_family, EigenDecomposition, LatticeHamiltonian, LatticeSpec};
use crate::quantum::Observable;
use crate::simulator::{make_corrupted, make_target, AuditCounts, ExactSimulator};
use crate::stats::{verdict_with, BootstrapSummary, Verdict};

/// `|x|^{1/3}` on the lattice sites.
pub fn benchmark_observable(spec: &LatticeSpec) -> Observable {
    let diag: Vec<f64> = spec.coordinates().iter().map(|x| x.abs().cbrt()).collect();
    Observable::from_diagonal(&diag)
}

/// Site indices in the order the hopping term visits them (`i → i + 2`).
pub fn hopping_ring(spec: &LatticeSpec) -> Vec<usize> {
    let n = spec.n_sites();
    (0..n).map(|k| (2 * k) % n).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub e_min: f64,
    pub e_max: f64,
    pub breadth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub kind: WindowKind,
    pub window: EnergyWindow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowReport {
    pub seed: u64,
    pub variant: Variant,
    pub window: WindowKind,
    pub eta: f64,
    pub standard: Option<BootstrapSummary>,
    pub diagnostic: Option<BootstrapSummary>,
    /// `None` when the row could not be judged.
    pub verdict: Option<Verdict>,
    pub n_accepted_standard: usize,
    pub n_accepted_arbitrate: usize,
    pub standard_proposals: usize,
    /// Edge states (Variant I) or schedules (Variant II) tried.
    pub attempts: usize,
    pub distinct_states: usize,
    pub non_converged: usize,
    /// The simulator never delivered a state inside the window.
    pub starved: bool,
    pub error: Option<String>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatorAudit {
    pub eta: f64,
    pub counts: AuditCounts,
    pub cached_anneals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: RunConfig,
    pub spectrum: SpectrumSummary,
    pub windows: Vec<WindowReport>,
    pub rows: Vec<RowReport>,
    pub audits: Vec<SimulatorAudit>,
}

impl BenchmarkReport {
    pub fn row(
        &self,
        seed: u64,
        variant: Variant,
        window: WindowKind,
        eta: f64,
    ) -> Option<&RowReport> {
        self.rows
            .iter()
            .find(|r| r.seed == seed && r.variant == variant && r.window == window && r.eta == eta)
    }

    /// True if some row failed for a reason other than starvation.
    pub fn has_failures(&self) -> bool {
        self.rows.iter().any(|r| r.verdict.is_none())
    }
}

/// Everything a run shares between rows: the target, its windows and the
/// protocol settings.
#[derive(Debug)]
pub struct Bench {
    pub config: RunConfig,
    pub target: LatticeHamiltonian,
    pub x: Observable,
    pub windows: Vec<WindowReport>,
    pub settings: ArbitrationSettings,
    pub standardize: StandardizeSettings,
    h_i: InitializingHamiltonian,
    ring: Vec<usize>,
}

impl Bench {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let spec = config.lattice;
        let target = build_family(spec, config.omega0, 0.0)?;
        let eigen = target.eigen()?;
        let (e_min, e_max) = (eigen.min_energy(), eigen.max_energy());
        let windows = config
            .windows
            .iter()
            .map(|&kind| {
                Ok(WindowReport {
                    kind,
                    window: select_window(e_min, e_max, kind)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let delta_b = eigen.breadth();
        let a = &config.arbitration;
        let mut settings = ArbitrationSettings::standard(delta_b)?;
        settings.time = TimeAveraging::new(
            delta_b,
            a.periods,
            a.sampling_safety,
            a.rel_tol,
            a.max_doublings,
        )?;
        settings.peaks.rel_threshold = a.peak_threshold;
        let score: Vec<f64> = spec.coordinates().iter().map(|x| x.abs()).collect();
        let h_i = InitializingHamiltonian::ranked(&score, &eigen.energies)?;
        Ok(Bench {
            x: benchmark_observable(&spec),
            ring: hopping_ring(&spec),
            windows,
            settings,
            standardize: StandardizeSettings::default(),
            h_i,
            target,
            config,
        })
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        self.target.eigen().expect("diagonalized in Bench::new")
    }

    pub fn spectrum(&self) -> SpectrumSummary {
        let e = self.eigen();
        SpectrumSummary {
            e_min: e.min_energy(),
            e_max: e.max_energy(),
            breadth: e.breadth(),
        }
    }

    pub fn window(&self, kind: WindowKind) -> Result<EnergyWindow> {
        self.windows
            .iter()
            .find(|w| w.kind == kind)
            .map(|w| w.window)
            .ok_or_else(|| Error::Config(format!("window {kind} is not configured")))
    }

    pub fn simulator(&self, eta: f64) -> Result<ExactSimulator> {
        if eta == 0.0 {
            make_target(self.config.lattice, self.config.omega0)
        } else {
            make_corrupted(self.config.lattice, self.config.omega0, eta)
        }
    }

    pub fn standard(
        &self,
        variant: Variant,
        kind: WindowKind,
        seed: u64,
    ) -> Result<StandardOfComparison> {
        let w = self.window(kind)?;
        let mut rng = stream(seed, &[0, variant.index(), kind as u64]);
        let n = self.config.n_standard;
        match variant {
            Variant::I => {
                standardize_variant1(self.eigen(), &self.x, &w, n, &self.standardize, &mut rng)
            }
            Variant::II => {
                standardize_variant2(self.eigen(), &self.x, &w, n, &self.standardize, &mut rng)
            }
        }
    }

    /// `cache` must belong to `sim`; it is only used by Variant II.
    pub fn diagnostic(
        &self,
        sim: &ExactSimulator,
        cache: &AnnealCache,
        variant: Variant,
        kind: WindowKind,
        eta: f64,
        seed: u64,
    ) -> Result<SimulationDiagnostic> {
        let w = self.window(kind)?;
        let mut rng = stream(seed, &[1, variant.index(), kind as u64, eta.to_bits()]);
        let n = self.config.n_arbitrate;
        match variant {
            Variant::I => {
                let edges = EdgeStates::Direct {
                    eigen: self.eigen(),
                    bumps: &self.standardize,
                };
                arbitrate_variant1(
                    sim,
                    &self.x,
                    &w,
                    &self.ring,
                    edges,
                    n,
                    &self.settings,
                    &mut rng,
                )
            }
            Variant::II => {
                let space = ScheduleSpace::window_levels(
                    &self.h_i,
                    &w,
                    self.config.arbitration.anneal_taus.clone(),
                )?;
                arbitrate_variant2(
                    sim,
                    &self.x,
                    &w,
                    &self.h_i,
                    &space,
                    cache,
                    n,
                    &self.settings,
                    &mut rng,
                )
            }
        }
    }

    pub fn run(&self) -> Result<BenchmarkReport> {
        let cfg = &self.config;
        let timed = cfg.record_timings;
        let mut keys = Vec::new();
        for &seed in &cfg.seeds {
            for variant in cfg.variant.variants() {
                for w in &self.windows {
                    keys.push((seed, variant, w.kind));
                }
            }
        }
        let standards = par_map(&keys, |&(seed, variant, kind)| {
            self.standard(variant, kind, seed)
        });
        let sims: Vec<Result<ExactSimulator>> = par_map(&cfg.eta_list, |&eta| self.simulator(eta));
        let caches: Vec<AnnealCache> = cfg.eta_list.iter().map(|_| AnnealCache::new()).collect();

        let mut jobs = Vec::new();
        for (k, _) in keys.iter().enumerate() {
            for e in 0..cfg.eta_list.len() {
                jobs.push((k, e));
            }
        }
        let build = |&(k, e): &(usize, usize)| {
            let (seed, variant, kind) = keys[k];
            let eta = cfg.eta_list[e];
            let mut row = RowReport {
                seed,
                variant,
                window: kind,
                eta,
                standard: None,
                diagnostic: None,
                verdict: None,
                n_accepted_standard: 0,
                n_accepted_arbitrate: 0,
                standard_proposals: 0,
                attempts: 0,
                distinct_states: 0,
                non_converged: 0,
                starved: false,
                error: None,
                wall_seconds: 0.0,
            };
            let standard = match &standards[k] {
                Ok(s) => s,
                Err(err) => {
                    row.error = Some(format!("standardization: {err}"));
                    return row;
                }
            };
            row.standard = Some(standard.summary);
            row.n_accepted_standard = standard.accepted();
            row.standard_proposals = standard.proposals;
            let sim = match &sims[e] {
                Ok(s) => s,
                Err(err) => {
                    row.error = Some(format!("simulator: {err}"));
                    return row;
                }
            };
            let start = Instant::now();
            let diag = self.diagnostic(sim, &caches[e], variant, kind, eta, seed);
            if timed {
                row.wall_seconds = start.elapsed().as_secs_f64();
            }
            match diag {
                Ok(d) => {
                    row.verdict = Some(verdict_with(
                        cfg.verdict_rule,
                        &standard.summary,
                        &d.summary,
                    ));
                    row.diagnostic = Some(d.summary);
                    row.n_accepted_arbitrate = d.accepted();
                    row.attempts = d.attempts;
                    row.distinct_states = d.distinct;
                    row.non_converged = d.non_converged;
                }
                Err(Error::ArbitrationStarved { attempts, .. }) => {
                    row.verdict = Some(Verdict::Negative);
                    row.starved = true;
                    row.attempts = attempts;
                    row.error = Some("no simulator state inside the window".into());
                }
                Err(err) => row.error = Some(format!("arbitration: {err}")),
            }
            row
        };
        let rows = par_map(&jobs, |job| {
            let row = build(job);
            info!(
                "seed {} variant {} {} eta {}: {}",
                row.seed,
                row.variant,
                row.window,
                row.eta,
                row.verdict.map_or("error".into(), |v| v.to_string())
            );
            row
        });

        let audits = cfg
            .eta_list
            .iter()
            .zip(&sims)
            .zip(&caches)
            .filter_map(|((&eta, sim), cache)| {
                sim.as_ref().ok().map(|s| SimulatorAudit {
                    eta,
                    counts: s.audit(),
                    cached_anneals: cache.len(),
                })
            })
            .collect();
        let mut config = cfg.clone();
        config.output = None;
        Ok(BenchmarkReport {
            config,
            spectrum: self.spectrum(),
            windows: self.windows.clone(),
            rows,
            audits,
        })
    }
}

pub fn run(config: &RunConfig) -> Result<BenchmarkReport> {
    Bench::new(config.clone())?.run()
}

/// Independent generator for one task of a seeded run.
pub fn stream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = 0x9e37_79b9_7f4a_7c15u64;
    for &t in tags {
        h = splitmix(h ^ t);
    }
    rng.set_stream(h);
    rng
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(feature = "parallel")]
fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, U>(items: &[T], f: impl Fn(&T) -> U) -> Vec<U> {
    items.iter().map(f).collect()
}

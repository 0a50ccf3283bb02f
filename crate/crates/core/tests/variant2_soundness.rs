//! Every state the Variant II gap bound accepts must really live inside the
//! window, judged against the simulator's exact spectrum.

use tame_core::bench::{Bench, Profile, RunConfig};
use tame_core::eta::{variant2_member, AdiabaticSchedule, AnnealCache, ScheduleSpace, WindowKind};
use tame_core::simulator::SimulatorHandle;

const SUPPORT_TOL: f64 = 1e-3;

fn check(eta: f64) -> (usize, usize) {
    let cfg = RunConfig::profile(Profile::Desk);
    let bench = Bench::new(cfg.clone()).unwrap();
    let w = bench.window(WindowKind::Low).unwrap();
    let score: Vec<f64> = cfg.lattice.coordinates().iter().map(|x| x.abs()).collect();
    let h_i =
        tame_core::eta::InitializingHamiltonian::ranked(&score, &bench.eigen().energies).unwrap();
    let space =
        ScheduleSpace::window_levels(&h_i, &w, cfg.arbitration.anneal_taus.clone()).unwrap();
    let sim = bench.simulator(eta).unwrap();
    let cache = AnnealCache::new();
    let mut accepted = 0;
    for &level in &space.levels {
        for &tau in &space.taus {
            let schedule = AdiabaticSchedule { level, tau };
            let o = cache
                .outcome(&sim, &h_i, &bench.x, schedule, &bench.settings)
                .unwrap();
            if !o.accepted(&w) {
                continue;
            }
            accepted += 1;
            let psi = sim
                .anneal(&h_i.observable(), &h_i.eigenstate(level), tau)
                .unwrap();
            assert!(
                variant2_member(&psi, sim.simulation_eigen(), &w, SUPPORT_TOL).unwrap(),
                "eta {eta}: level {level} accepted with energy {} ± {} but leaks outside {w:?}",
                o.energy,
                o.max_gap
            );
        }
    }
    (accepted, space.size())
}

#[test]
fn accepted_states_are_in_window_for_target() {
    let (accepted, total) = check(0.0);
    assert!(accepted > total / 2, "only {accepted} of {total} accepted");
}

#[test]
fn accepted_states_are_in_window_under_corruption() {
    let (accepted, total) = check(0.01);
    assert!(accepted <= total);
}

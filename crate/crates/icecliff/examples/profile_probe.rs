// Scratch diagnostic: far-field column profiles after a damage run.

use icecliff::analysis::ProbeConfig;
use icecliff::assembly::{stress_at_qp, FemCache, N_QP};
use icecliff::boundary::{BasalCondition, TerminusLoading};
use icecliff::material::MaterialParams;
use icecliff::solver::SolverControls;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let h: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(200.0);
    let duration: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(500.0);

    let material = MaterialParams::glacial_ice();
    let mut controls = SolverControls::default();
    controls.damage_duration = duration;
    let mut cfg = ProbeConfig::new(material, controls, 10.0);
    cfg.stop_on_failure = false;
    let probe = cfg
        .run_probe(h, TerminusLoading::land(), 1e6, 0.8, BasalCondition::FreeSlip)
        .unwrap();

    let mesh = &probe.sim.mesh;
    let state = &probe.state;
    let col = mesh.n_cols() / 2;
    println!("t_end={:.0}s; far-field column x={:.0}:", state.t, mesh.nodes[mesh.node_at(col, 0)][0]);
    println!("z_m  phi");
    for iz in (0..mesh.n_rows()).rev().step_by(2) {
        let n = mesh.node_at(col, iz);
        println!("{:6.1} {:.4}", mesh.nodes[n][1], state.phi[n]);
    }

    // H_d and sigma0 profile from the quadrature points nearest x = L/2.
    let cache = FemCache::new(mesh);
    println!("z_m  H_d  sxx0  szz0  syy0  D_if_fresh");
    let mut rows: Vec<(f64, f64, f64, f64, f64, f64)> = Vec::new();
    for (e, elem) in mesh.elements.iter().enumerate() {
        for q in 0..N_QP {
            let [x, z] = cache.geoms[e].physical_point(&cache.rule.points[q]);
            if (x - mesh.length / 2.0).abs() < 10.0 {
                let s = stress_at_qp(
                    cache.grad(e, q),
                    elem,
                    &state.u,
                    &state.qp[e * N_QP + q].eps_v,
                    &material,
                );
                let d = icecliff::constitutive::driving_force_mc(&s, 0.8, 1e6);
                rows.push((z, state.qp[e * N_QP + q].h_d, s.sxx, s.szz, s.syy, d));
            }
        }
    }
    rows.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    for r in rows.iter().step_by(3) {
        println!(
            "{:6.1} {:7.3} {:9.2e} {:9.2e} {:9.2e} {:7.3}",
            r.0, r.1, r.2, r.3, r.4, r.5
        );
    }
    println!(
        "trace: {:?}",
        probe
            .trace
            .times
            .iter()
            .zip(&probe.trace.normalized_damage)
            .step_by(probe.trace.times.len().max(12) / 12)
            .map(|(t, d)| format!("t={t:.0} D={d:.3}"))
            .collect::<Vec<_>>()
    );
}

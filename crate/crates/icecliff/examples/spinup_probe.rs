// Scratch diagnostic for full probes: spin-up metrics, damage-phase
// outcome, crevasse depths and wall time.

use icecliff::analysis::{
    detect_failure, far_field_damage_depth, near_front_crevasse_depth, FailureMode, ProbeConfig,
    CREVASSE_THRESHOLD, FAILURE_THRESHOLD,
};
use icecliff::assembly::{stress_at_qp, FemCache, N_QP};
use icecliff::boundary::{BasalCondition, TerminusLoading};
use icecliff::material::MaterialParams;
use icecliff::solver::SolverControls;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let h: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(200.0);
    let basal = match args.get(2).map(String::as_str).unwrap_or("frozen") {
        "free" => BasalCondition::FreeSlip,
        "frozen" => BasalCondition::Frozen,
        c => BasalCondition::Weertman {
            c_fric: c.parse().unwrap(),
            m_fric: 3.0,
            tau_0: 0.75e6,
        },
    };
    let tau_c: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(1e6);
    let mu: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(0.8);
    let h_w: f64 = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(0.0);
    let target_h: f64 = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(10.0);

    let material = MaterialParams::glacial_ice();
    let mut cfg = ProbeConfig::new(material, SolverControls::default(), target_h);
    cfg.stop_on_failure = std::env::var("STOP_ON_FAILURE").map_or(true, |v| v != "0");

    let terminus = TerminusLoading {
        h_w,
        ..TerminusLoading::land()
    };

    let start = std::time::Instant::now();
    let probe = cfg.run_probe(h, terminus, tau_c, mu, basal).unwrap();
    let wall = start.elapsed().as_secs_f64();

    let mesh = &probe.sim.mesh;
    let state = &probe.state;
    let cache = FemCache::new(mesh);
    let mut basal_peak: f64 = 0.0;
    for (e, elem) in mesh.elements.iter().enumerate() {
        for q in 0..N_QP {
            let [x, z] = cache.geoms[e].physical_point(&cache.rule.points[q]);
            if z < target_h && x > mesh.length - 2.0 * h {
                let s = stress_at_qp(
                    cache.grad(e, q),
                    elem,
                    &state.u,
                    &state.qp[e * N_QP + q].eps_v,
                    &material,
                );
                basal_peak = basal_peak.max(s.tau_max());
            }
        }
    }

    // Basal-corner diagnostics: fresh driving force and history maxima.
    let mut corner_d: f64 = 0.0;
    let mut corner_h: f64 = 0.0;
    let mut corner_tau = 0.0;
    let mut corner_p = 0.0;
    for (e, elem) in mesh.elements.iter().enumerate() {
        for q in 0..N_QP {
            let [x, z] = cache.geoms[e].physical_point(&cache.rule.points[q]);
            if z < 2.0 * target_h && x > mesh.length - 2.0 * h {
                let s = stress_at_qp(
                    cache.grad(e, q),
                    elem,
                    &state.u,
                    &state.qp[e * N_QP + q].eps_v,
                    &material,
                );
                let d = icecliff::constitutive::driving_force_mc(&s, mu, tau_c);
                if d > corner_d {
                    corner_d = d;
                    corner_tau = s.tau_max();
                    corner_p = s.pressure();
                }
                corner_h = corner_h.max(state.qp[e * N_QP + q].h_d);
            }
        }
    }
    println!(
        "  corner: D_fresh={corner_d:.3} (tau={corner_tau:.3e}, P={corner_p:.3e}) H_d_max={corner_h:.3}"
    );

    let far = far_field_damage_depth(mesh, &state.phi, CREVASSE_THRESHOLD);
    let front = near_front_crevasse_depth(mesh, &state.phi, CREVASSE_THRESHOLD, 2.0 * h);
    let report = detect_failure(mesh, &state.phi, h_w, material.ell, FAILURE_THRESHOLD);
    let final_damage = probe.trace.normalized_damage.last().copied().unwrap_or(0.0);
    println!(
        "H={h} basal={basal:?} tau_c={tau_c:.2e} mu={mu} h_w={h_w} target_h={target_h}:"
    );
    println!(
        "  mode={} t_fail={:?} residual={:?} aborted={}",
        probe.report.mode, probe.report.time_of_failure, report.residual_front_thickness, probe.aborted
    );
    println!(
        "  t_end={:.0}s damage={final_damage:.4} far_depth={:.2}H front_depth={:.2}H basal_peak={basal_peak:.3e} steps={} [{wall:.1}s wall]",
        state.t,
        far / h,
        front / h,
        probe.trace.times.len(),
    );
    if report.mode != probe.report.mode {
        println!("  note: final-state mode {} differs from first-detected", report.mode);
    }
}

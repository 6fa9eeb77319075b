//! Fast invariant suite behind the CLI `--seed-check` flag.
//!
//! Randomized spot checks of the value-level math and the small numeric
//! kernels; runs in well under a second and needs no scenario input.

use crate::band::BandMatrix;
use crate::boundary::weertman_traction;
use crate::constitutive::{creep_rate, driving_force_mc, update_history, update_viscous_strain,
    MaterialPointState};
use crate::material::MaterialParams;
use crate::mesh::{shape_values_checked, QuadratureRule};
use crate::tensor::SymmetricStress;

/// One executed check: name, outcome, detail.
pub struct CheckResult {
    pub name: &'static str,
    pub ok: bool,
    pub detail: String,
}

struct Lcg(u64);

impl Lcg {
    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        lo + (hi - lo) * ((self.0 >> 11) as f64 / (1u64 << 53) as f64)
    }
}

/// Runs the suite; deterministic for a fixed seed.
pub fn run(seed: u64) -> Vec<CheckResult> {
    let mut rng = Lcg(seed ^ 0x5EED_C0DE);
    let mut out = Vec::new();
    let material = MaterialParams::<f64>::glacial_ice();

    let mut max_dev: f64 = 0.0;
    let mut max_shift: f64 = 0.0;
    let mut max_trace: f64 = 0.0;
    for _ in 0..2000 {
        let s = SymmetricStress::new(
            rng.range(-4e6, 4e6),
            rng.range(-4e6, 4e6),
            rng.range(-4e6, 4e6),
            rng.range(-4e6, 4e6),
        );
        let p = rng.range(-4e6, 4e6);
        let shifted = SymmetricStress::new(s.sxx + p, s.szz + p, s.syy + p, s.sxz);
        max_dev = max_dev.max((shifted.tau_max() - s.tau_max()).abs() / s.tau_max().max(1.0));
        max_shift = max_shift.max(
            (driving_force_mc(&shifted, 0.0, 1e6) - driving_force_mc(&s, 0.0, 1e6)).abs(),
        );
        let r = creep_rate(&s, &material);
        max_trace = max_trace.max(r.trace().abs() / r.exx.abs().max(1e-30));
    }
    out.push(CheckResult {
        name: "tau_max hydrostatic invariance",
        ok: max_dev <= 1e-12,
        detail: format!("max deviation {max_dev:.2e}"),
    });
    out.push(CheckResult {
        name: "mu=0 driving force pressure independence",
        ok: max_shift <= 1e-10,
        detail: format!("max shift {max_shift:.2e}"),
    });
    out.push(CheckResult {
        name: "creep rate traceless",
        ok: max_trace <= 1e-9,
        detail: format!("max scaled trace {max_trace:.2e}"),
    });

    let state = MaterialPointState::default();
    let s = SymmetricStress::new(1.2e6, -0.4e6, 0.3e6, 0.5e6);
    let next = update_viscous_strain(&state, &s, 21_600.0, &material);
    out.push(CheckResult {
        name: "implicit creep update converges",
        ok: next.is_ok() && next.map(|n| n.eps_v.trace().abs() < 1e-12).unwrap_or(false),
        detail: "6 h step, traceless".into(),
    });

    let rule = QuadratureRule::degree4();
    let sum: f64 = rule.weights.iter().sum();
    out.push(CheckResult {
        name: "quadrature weights sum to 1/2",
        ok: (sum - 0.5).abs() < 1e-14,
        detail: format!("sum {sum}"),
    });
    let quartic: f64 = rule
        .points
        .iter()
        .zip(&rule.weights)
        .map(|(l, w)| w * l[0] * l[0] * l[1] * l[1])
        .sum();
    let exact = 2.0 * 2.0 / 720.0; // a! b! / (a+b+2)! = 4/720
    out.push(CheckResult {
        name: "quadrature exact at degree 4",
        ok: (quartic - exact).abs() < 1e-15,
        detail: format!("l0^2 l1^2 integral {quartic:.2e}"),
    });

    let corners = [[0.1, 0.2], [1.4, 0.3], [0.6, 1.2]];
    let (n, g) = shape_values_checked(corners, &[0.3, 0.4, 0.3]).unwrap();
    let pu = (n.iter().sum::<f64>() - 1.0).abs();
    let gsum = g.iter().fold([0.0; 2], |a, v| [a[0] + v[0], a[1] + v[1]]);
    out.push(CheckResult {
        name: "shape functions partition of unity",
        ok: pu < 1e-13 && gsum[0].abs() < 1e-12 && gsum[1].abs() < 1e-12,
        detail: format!("sum error {pu:.2e}"),
    });

    let tau = weertman_traction(1e-6_f64, 1e6, 3.0, 0.75e6);
    out.push(CheckResult {
        name: "weertman traction hand value",
        ok: (tau + 9868.42).abs() < 0.1,
        detail: format!("{tau:.2} Pa"),
    });
    out.push(CheckResult {
        name: "history field irreversible",
        ok: update_history(0.5, 0.3) == 0.5 && update_history(0.2, 0.5) == 0.5,
        detail: "running maximum".into(),
    });

    // Band solver solves a small SPD system to machine precision.
    let n = 60;
    let hb = 5;
    let mut band = BandMatrix::new(n, hb);
    for i in 0..n {
        for j in i.saturating_sub(hb)..=i {
            if j < i {
                band.add(i, j, rng.range(-1.0, 1.0));
            }
        }
        band.add(i, i, 16.0);
    }
    let x_true: Vec<f64> = (0..n).map(|_| rng.range(-1.0, 1.0)).collect();
    let mut b = vec![0.0; n];
    band.multiply(&x_true, &mut b);
    let mut factor = BandMatrix::new(n, hb);
    band.cholesky_into(&mut factor).unwrap();
    let mut x = b.clone();
    factor.solve_factored(&mut x);
    let err = x
        .iter()
        .zip(&x_true)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    out.push(CheckResult {
        name: "banded Cholesky solve",
        ok: err < 1e-12,
        detail: format!("max error {err:.2e}"),
    });

    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn suite_passes() {
        let results = super::run(42);
        for r in &results {
            assert!(r.ok, "{}: {}", r.name, r.detail);
        }
        assert!(results.len() >= 8);
    }
}

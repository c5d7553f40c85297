//! Regenerates `fixtures/calibration.json`, the empirical constants used by the
//! "far from the torus" tests.
//!
//!     cargo run --release -p perispec --example calibrate [-- OUT.json]
//!
//! For each reference J₀ below, and with fixed seeds:
//!
//! * `sandwich`: 400 cells `t + δu`, with `t` a Toda point of `T_{J₀}`, `u` a
//!   random unit vector in (a, b) and `δ ∈ [1e−4, 1e−2]` log-uniform. The ratio
//!   `distance / mismatch` (projection distance over discriminant-coefficient
//!   mismatch) is recorded; `c` is half its minimum and `d` twice its maximum.
//! * `far`: 400 two-sided windows with every `aₙ, bₙ` of J₀ perturbed uniformly
//!   by up to ±0.3, kept when `d̃₀(J, J₀) ≥ 0.1`. The ratio of the extreme
//!   residual (largest entry on diagonals p and p−1 of `Δ(J) − Sᵖ − S⁻ᵖ`) to
//!   `d̃₀²` is recorded; `c` is half its minimum.
//!
//! The tests draw fresh samples with other seeds and check them against these
//! constants.

use perispec::magic::{magic_residual_jacobi, JacobiSeq, Sides};
use perispec::periodic_jacobi::PeriodicJacobi;
use perispec::torus::{coeff_mismatch, project_to_torus, tilde_d_m_jacobi, toda_sample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const SANDWICH_SEED: u64 = 2024;
const FAR_SEED: u64 = 4048;
const DRAWS: usize = 400;

fn references() -> Vec<PeriodicJacobi> {
    [
        (vec![1.3], vec![0.2]),
        (vec![1.0, 2.0], vec![0.3, -0.2]),
        (vec![1.0, 1.5, 0.7], vec![0.2, -0.4, 0.1]),
        (vec![1.2, 0.8, 1.1, 0.9], vec![0.3, -0.2, 0.1, -0.4]),
    ]
    .into_iter()
    .map(|(a, b)| PeriodicJacobi::new(a, b).unwrap())
    .collect()
}

fn sandwich_ratios(j0: &PeriodicJacobi, rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let p = j0.p();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let t = toda_sample(j0, &[rng.gen_range(0.0..5.0)], 1e-3).unwrap().points.remove(0);
        let u: Vec<f64> = (0..2 * p).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let delta = 10f64.powf(rng.gen_range(-4.0..-2.0));
        let a = (0..p).map(|k| t.a()[k] + delta * u[k] / norm).collect();
        let b = (0..p).map(|k| t.b()[k] + delta * u[p + k] / norm).collect();
        let x = PeriodicJacobi::new(a, b).unwrap();
        let mismatch = coeff_mismatch(&x, j0).unwrap();
        if mismatch < 1e-12 {
            continue;
        }
        let pr = project_to_torus(&x, j0, 1e-13).unwrap();
        out.push(pr.distance / mismatch);
    }
    out
}

/// `(d̃₀, extreme residual)` for one random window.
fn far_sample(j0: &PeriodicJacobi, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let p = j0.p();
    let first = -8 * p as i64;
    let len = 16 * p;
    let a = (0..len as i64).map(|k| j0.a_at(first + k) + rng.gen_range(-0.3..0.3)).collect();
    let b = (0..len as i64).map(|k| j0.b_at(first + k) + rng.gen_range(-0.3..0.3)).collect();
    let x = JacobiSeq::new(first, a, b, Sides::Two).unwrap();
    let dt = tilde_d_m_jacobi(&x, j0, 0, p).unwrap();
    let r = magic_residual_jacobi(&x, j0).unwrap();
    let pi = p as i64;
    let extreme = [pi, pi - 1]
        .iter()
        .flat_map(|k| r.diag_profiles[k].iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    (dt, extreme)
}

fn main() {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/calibration.json").to_string());
    let mut entries = Vec::new();
    for j0 in references() {
        let mut rng = ChaCha8Rng::seed_from_u64(SANDWICH_SEED + j0.p() as u64);
        let ratios = sandwich_ratios(&j0, &mut rng, DRAWS);
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);

        let mut rng = ChaCha8Rng::seed_from_u64(FAR_SEED + j0.p() as u64);
        let far: Vec<f64> = (0..DRAWS)
            .map(|_| far_sample(&j0, &mut rng))
            .filter(|&(dt, _)| dt >= 0.1)
            .map(|(dt, e)| e / (dt * dt))
            .collect();
        let far_lo = far.iter().copied().fold(f64::INFINITY, f64::min);

        println!("p = {}: ratio ∈ [{lo:.4}, {hi:.4}], far ratio ≥ {far_lo:.4} over {} windows", j0.p(), far.len());
        entries.push(json!({
            "j0": j0,
            "sandwich": { "c": 0.5 * lo, "d": 2.0 * hi, "draws": DRAWS, "seed": SANDWICH_SEED + j0.p() as u64 },
            "far": { "c": 0.5 * far_lo, "draws": far.len(), "seed": FAR_SEED + j0.p() as u64 },
        }));
    }
    let doc = json!({ "generator": "examples/calibrate.rs", "references": entries });
    std::fs::write(&out, serde_json::to_string_pretty(&doc).unwrap() + "\n").unwrap();
    println!("wrote {out}");
}

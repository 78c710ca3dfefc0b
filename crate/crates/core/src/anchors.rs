//! Built-in numeric anchors: a fixed table of reference values the model must
//! reproduce under the default scenario. Backs the CLI `validate` command.

use std::fmt;

use crate::offload::Allocation;
use crate::optimizers::{replicate, Algorithm, SwarmConfig};
use crate::pricing::{
    b_part, coupling_ratio, critical_point, default_coefficients, dynamic_price, dynamic_user_utility,
    max_user_utility, p_part, user_utility_gradient,
};
use crate::harness::{run_sweep, successive_deltas, surface_grid, SweepParam, SweepSpec};
use crate::scenario::{ghz_to_hz, mbps_to_bps, Scenario, SnrMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Check {
    Near { expected: f64, tol: f64 },
    Within { lo: f64, hi: f64 },
}

impl Check {
    pub fn passes(&self, actual: f64) -> bool {
        match *self {
            Check::Near { expected, tol } => (actual - expected).abs() <= tol,
            Check::Within { lo, hi } => (lo..=hi).contains(&actual),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Check::Near { expected, tol } => write!(f, "{expected} ± {tol:e}"),
            Check::Within { lo, hi } => write!(f, "in [{lo:e}, {hi:e}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorResult {
    pub name: String,
    pub actual: f64,
    pub check: Check,
    pub passed: bool,
}

impl fmt::Display for AnchorResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {:.9} (expected {})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.actual,
            self.check
        )
    }
}

fn anchor(name: impl Into<String>, actual: f64, check: Check) -> AnchorResult {
    AnchorResult {
        name: name.into(),
        actual,
        passed: actual.is_finite() && check.passes(actual),
        check,
    }
}

fn near(expected: f64, tol: f64) -> Check {
    Check::Near { expected, tol }
}

/// Evaluate every anchor on the given base scenario (normally the default)
/// with the given optimizer configuration for the convergence anchor.
pub fn run_anchors(base: &Scenario, cfg: &SwarmConfig) -> Vec<AnchorResult> {
    let mut out = Vec::new();
    let corner = Allocation::new(ghz_to_hz(6.0), mbps_to_bps(1.0));
    let s500 = base.with_q_kb(500.0).with_f_local_ghz(0.1).with_snr_mode(SnrMode::Raw);

    out.push(anchor("price q=100KB", dynamic_price(&s500.with_q_kb(100.0), corner), near(0.315874, 1e-5)));
    out.push(anchor("price q=500KB", dynamic_price(&s500, corner), near(1.57937, 1e-5)));

    let spec = SweepSpec::new(
        SweepParam::FServer,
        (1..=6).map(|g| ghz_to_hz(g as f64)).collect(),
        s500,
        Allocation::new(corner.f_server, mbps_to_bps(0.1)),
    );
    match run_sweep(&spec) {
        Ok(rows) => {
            let du = successive_deltas(&rows, |r| r.u_user);
            let ds = successive_deltas(&rows, |r| r.u_server);
            let user = [(5.4067, 1e-3), (1.80224, 1e-4), (0.9011, 1e-3), (0.5407, 1e-3), (0.3604, 1e-3)];
            for (i, (d, (e, t))) in du.iter().zip(user).enumerate() {
                out.push(anchor(format!("dU_user {}->{} GHz", i + 1, i + 2), *d, near(e, t)));
            }
            out.push(anchor("dU_user 2->3 GHz (printed 1.8032)", du[1], near(1.8032, 1e-2)));
            let server = [2.70336, 0.90112, 0.45056, 0.27034, 0.18022];
            for (i, (d, e)) in ds.iter().zip(server).enumerate() {
                out.push(anchor(format!("dU_server {}->{} GHz", i + 1, i + 2), *d, near(e, 1e-4)));
            }
        }
        Err(e) => out.push(AnchorResult {
            name: format!("F sweep ({e})"),
            actual: f64::NAN,
            check: near(0.0, 0.0),
            passed: false,
        }),
    }

    out.push(anchor("u_user at corner", dynamic_user_utility(&s500, corner), near(50.9625, 1e-3)));
    out.push(anchor(
        "B_part db-to-linear",
        b_part(&s500.with_snr_mode(SnrMode::DbToLinear)),
        near(-0.0676, 5e-4),
    ));
    out.push(anchor("B_part raw", b_part(&s500), near(-0.102451, 1e-5)));
    out.push(anchor(
        "P_part at corner",
        p_part(&s500, corner),
        Check::Within { lo: 3.227e-7, hi: 2.347e-6 },
    ));
    let default_w2 = Scenario { w2: 0.5, ..s500 };
    out.push(anchor(
        "coupling ratio at w2=0.5",
        coupling_ratio(&default_w2).unwrap_or(f64::NAN),
        near(2.0, 1e-12),
    ));

    let pc = default_coefficients(&s500);
    let crit = critical_point(&s500, pc);
    let (gf, gb) = user_utility_gradient(&s500, pc, crit);
    out.push(anchor("|gradient| at critical point", gf.abs().max(gb.abs()), Check::Within { lo: 0.0, hi: 1e-9 }));

    let corner_hit = surface_grid(&s500, 100, 100)
        .map(|g| {
            let (i, j) = g.argmax_u_user();
            (i == 99 && j == 99) as u8 as f64
        })
        .unwrap_or(0.0);
    out.push(anchor("100x100 argmax at box corner", corner_hit, near(1.0, 0.0)));

    let (_, u_max) = max_user_utility(&s500);
    let objective = |a: Allocation| dynamic_user_utility(&s500, a);
    match replicate(Algorithm::DiscPso, &s500, &objective, u_max, cfg, 50) {
        Ok(stats) => {
            let rate = stats.converged_list.iter().filter(|&&c| c).count() as f64 / stats.n_trials() as f64;
            out.push(anchor("DISC-PSO converged fraction (50 trials)", rate, near(1.0, 0.0)));
            out.push(anchor("DISC-PSO mean iterations", stats.mean_iterations, Check::Within { lo: 0.0, hi: 5.0 }));
            out.push(anchor("DISC-PSO mean u_user", stats.mean_value, Check::Within { lo: 50.91, hi: 50.97 }));
        }
        Err(e) => out.push(AnchorResult {
            name: format!("DISC-PSO ({e})"),
            actual: f64::NAN,
            check: near(1.0, 0.0),
            passed: false,
        }),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_anchors_pass_on_defaults() {
        let results = run_anchors(&Scenario::default(), &SwarmConfig::default());
        for r in &results {
            assert!(r.passed, "{r}");
        }
        assert!(results.len() >= 20);
    }

    #[test]
    fn checks() {
        assert!(near(1.0, 0.1).passes(1.05));
        assert!(!near(1.0, 0.1).passes(1.2));
        assert!(Check::Within { lo: 0.0, hi: 1.0 }.passes(1.0));
        assert!(!Check::Within { lo: 0.0, hi: 1.0 }.passes(-0.1));
        assert!(!anchor("nan", f64::NAN, Check::Within { lo: f64::NEG_INFINITY, hi: f64::INFINITY }).passed);
    }

    #[test]
    fn perturbed_scenario_fails_anchors() {
        let s = Scenario { cycles_per_bit: 1000.0, ..Scenario::default() };
        assert!(run_anchors(&s, &SwarmConfig::default()).iter().any(|r| !r.passed));
    }
}

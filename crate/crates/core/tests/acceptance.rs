use std::process::ExitCode;
use std::time::{Duration, Instant};

use gaussian_kahler::verify::{run_checks, run_verify, ReportRecord, Suite, VerifyConfig, DEFAULT_SEED};

struct Criterion {
    id: u8,
    title: &'static str,
    checks: &'static [&'static str],
    time_limit: Option<Duration>,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        title: "scalar curvature of the tangent bundle is -6",
        checks: &["scalar_curvature_constant", "scalar_curvature_fd"],
        time_limit: Some(Duration::from_secs(1)),
    },
    Criterion {
        id: 2,
        title: "base sectional curvature is -1/2",
        checks: &["base_sectional_curvature"],
        time_limit: Some(Duration::from_secs(1)),
    },
    Criterion {
        id: 3,
        title: "Kahler axioms and closed symplectic form",
        checks: &["kahler_axioms_natural", "kahler_axioms_hybrid", "symplectic_form_closed"],
        time_limit: None,
    },
    Criterion {
        id: 4,
        title: "affine symplectic elements are isometries, dilation is not",
        checks: &["asp_isometry", "asp_reversing_isometry", "non_isometry_detected"],
        time_limit: None,
    },
    Criterion {
        id: 5,
        title: "eikonal system solution families",
        checks: &["eikonal_linear_family", "eikonal_rational_family"],
        time_limit: None,
    },
    Criterion {
        id: 6,
        title: "momentum map fields, Poisson algebra, equivariance, separation",
        checks: &["fundamental_equals_hamiltonian", "poisson_structure", "equivariance", "point_separation"],
        time_limit: None,
    },
    Criterion {
        id: 7,
        title: "momentum components are Kahler functions",
        checks: &["kahler_function_pde"],
        time_limit: None,
    },
    Criterion {
        id: 8,
        title: "wave-function embedding identities",
        checks: &["psi_normalization", "pullback_identity", "expectation_identity", "commutator_table"],
        time_limit: None,
    },
    Criterion {
        id: 9,
        title: "Schrodinger equation along Hamiltonian flows",
        checks: &["schrodinger_shadow", "schrodinger_convergence"],
        time_limit: None,
    },
    Criterion {
        id: 10,
        title: "spectra and spectral measures",
        checks: &["spectral_monte_carlo", "spectral_total_mass", "spectrum_table"],
        time_limit: None,
    },
];

fn summarize(records: &[ReportRecord]) -> String {
    records
        .iter()
        .map(|r| format!("{}={:.3e}/{:.0e}", r.check, r.max_residual, r.tolerance))
        .collect::<Vec<_>>()
        .join(" ")
}

fn line(id: u8, pass: bool, title: &str, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id:>2} {verdict} {title} [{detail}]");
}

fn main() -> ExitCode {
    let config = VerifyConfig::with_seed(DEFAULT_SEED);
    let mut failures = 0;
    for c in CRITERIA {
        let start = Instant::now();
        let result = run_checks(c.checks, &config);
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(records) => {
                let complete = records.len() == c.checks.len();
                let timely = c.time_limit.is_none_or(|limit| elapsed < limit);
                let detail = format!("{} in {:.0?}", summarize(&records), elapsed);
                (complete && timely && records.iter().all(|r| r.pass), detail)
            }
            Err(e) => (false, e.to_string()),
        };
        failures += usize::from(!pass);
        line(c.id, pass, c.title, &detail);
    }

    let start = Instant::now();
    let all = run_verify(Suite::All, &config);
    let elapsed = start.elapsed();
    let (pass, detail) = match all {
        Ok(records) => {
            let failed: Vec<&str> = records.iter().filter(|r| !r.pass).map(|r| r.check.as_str()).collect();
            let detail = format!("{} checks, {} failed {:?}, {:.1?}", records.len(), failed.len(), failed, elapsed);
            (failed.is_empty() && elapsed < Duration::from_secs(60), detail)
        }
        Err(e) => (false, e.to_string()),
    };
    failures += usize::from(!pass);
    line(11, pass, "full verification run", &detail);

    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}

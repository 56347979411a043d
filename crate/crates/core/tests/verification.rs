use std::sync::Arc;

use cusp_eigen::bounds::mu_lower_pp;
use cusp_eigen::eigen::{minimize_rq, SolverConfig};
use cusp_eigen::field::{HeightPower, Polynomial};
use cusp_eigen::mesh::Mesh;
use cusp_eigen::quadrature::QuadratureScheme;
use cusp_eigen::verify::*;
use cusp_eigen::{CuspDomain, Error, ProblemParams, WeightSpec};

fn params() -> ProblemParams {
    ProblemParams::new(2, 1.5, 2.0, 3.0).unwrap()
}

#[test]
fn default_suite_passes() {
    let records = default_suite(&params(), &SuiteConfig::default()).unwrap();
    let failed: Vec<_> = records.iter().filter(|r| !r.passed()).collect();
    assert!(failed.is_empty(), "{failed:#?}");
    assert!(records.iter().filter(|r| r.check == "isometry").all(|r| r.margin < 1e-6));
    assert!(records.iter().filter(|r| r.check == "composition").count() >= 40);
}

#[test]
fn default_suite_is_reproducible() {
    let cfg = SuiteConfig { composition_fields: 4, isometry_fields: 3, ..SuiteConfig::default() };
    let a = default_suite(&params(), &cfg).unwrap();
    let b = default_suite(&params(), &cfg).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.lhs.to_bits(), y.lhs.to_bits());
        assert_eq!(x.rhs.to_bits(), y.rhs.to_bits());
    }
}

#[test]
fn height_function_composition_has_room() {
    // For u = x_n the norm of the gradient is |Ω_γ|^{1/p}.
    let p = params();
    let u = Polynomial::coordinate(2, 1);
    let r = check_composition_inequality(&p, 1.0 / 3.0, &u, &QuadratureScheme::fiber(48, 24)).unwrap();
    let direct = r.rhs / cusp_eigen::bounds::distortion_bound(&p, 1.0 / 3.0).unwrap();
    assert!((direct - (1.0f64 / 3.0).powf(1.0 / 1.5)).abs() < 1e-12);
    assert!(r.passed() && r.margin > 0.0);
}

#[test]
fn isometry_examples() {
    let p = params();
    let scheme = QuadratureScheme::fiber(48, 24);
    let one = check_isometry(&p, 1.0 / 3.0, &Polynomial::constant(2, 1.0), 2.0, &scheme).unwrap();
    assert!((one.rhs - 0.5f64.sqrt()).abs() < 1e-12);
    assert!(one.passed());
    let yn = check_isometry(&p, 1.0 / 3.0, &Polynomial::coordinate(2, 1), 2.0, &scheme).unwrap();
    assert!(yn.passed(), "{yn:?}");
}

#[test]
fn isometry_margin_shrinks_under_refinement() {
    let p = params();
    let v = HeightPower { coeff: 1.0, exponent: 0.7 };
    let coarse = check_isometry(&p, 1.0 / 6.0, &v, 1.5, &QuadratureScheme::fiber(4, 3)).unwrap();
    let fine = check_isometry(&p, 1.0 / 6.0, &v, 1.5, &QuadratureScheme::fiber(4, 3).refined()).unwrap();
    assert!(fine.margin < coarse.margin, "{} vs {}", fine.margin, coarse.margin);
}

#[test]
fn weight_ordering_and_inclusion() {
    let p = params();
    let heights: Vec<f64> = (1..100).map(|k| k as f64 / 100.0).collect();
    let recs = check_weight_ordering(&p, 1.0 / 6.0, 1.0 / 3.0, &heights).unwrap();
    assert!(recs.iter().all(CheckRecord::passed));
    assert_eq!(printed_ordering_region(&p, 1.0 / 6.0, 1.0 / 3.0), 0.0);
    for u in positive_family(2, 20, 3) {
        let r = check_weight_inclusion(&p, 1.0 / 6.0, 1.0 / 3.0, &u, 2.0, &QuadratureScheme::fiber(48, 24)).unwrap();
        assert!(r.passed(), "{r:?}");
    }
    assert!(check_weight_ordering(&p, 0.3, 0.2, &heights).is_err());
}

#[test]
fn integral_identities() {
    for gamma in [2.5, 3.0, 4.0] {
        let p = ProblemParams::new(2, 1.5, 1.5, gamma).unwrap();
        let scheme = QuadratureScheme::fiber(48, 24);
        assert!(check_volume(&p, &scheme).unwrap().passed());
        let a_max = p.derive().unwrap().a_max;
        for a in [a_max, 0.5 * a_max] {
            let r = check_weight_mass(&p, a, &scheme).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }
}

#[test]
fn bound_comparison() {
    let p = ProblemParams::new(2, 1.5, 1.5, 3.0).unwrap();
    let mesh = Arc::new(Mesh::build(&CuspDomain::new(2, 3.0).unwrap(), 16, 2.0).unwrap());
    let eigen = minimize_rq(mesh, &p, &WeightSpec::Optimal, &SolverConfig::default()).unwrap();
    let pp = mu_lower_pp(&p).unwrap();
    let recs = compare_bound(&p, "pp", &eigen, &pp);
    assert_eq!(recs.len(), 2);
    assert!(recs.iter().all(CheckRecord::passed));

    let mut unconverged = eigen.clone();
    unconverged.converged = false;
    assert!(compare_bound(&p, "pp", &unconverged, &pp).iter().all(|r| r.pass == Outcome::Inconclusive));
    let zero = cusp_eigen::bounds::BoundPair { canonical: 0.0, paper_verbatim: 0.0 };
    assert!(compare_bound(&p, "pp", &eigen, &zero).iter().all(|r| r.pass == Outcome::Inconclusive));
}

#[test]
fn inadmissible_map_parameter() {
    let p = params();
    let cfg = SuiteConfig { a_values: vec![0.5], ..SuiteConfig::default() };
    assert!(matches!(default_suite(&p, &cfg).unwrap_err(), Error::Inadmissible { .. }));
}

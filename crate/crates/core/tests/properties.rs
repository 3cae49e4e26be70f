mod support;

use std::sync::{Arc, OnceLock};

use lagrange_galerkin::dc::{residual_viscosity, DcConfig, DiffusionCache, Reduction};
use lagrange_galerkin::diagnostics::{fit_rate, TripleNorm};
use lagrange_galerkin::elements::{get_rule, ElementKind};
use lagrange_galerkin::mesh::{Mesh, Refinement, TauRule};
use lagrange_galerkin::space::FemSpace;
use lagrange_galerkin::sparse::CsrMatrix;
use lagrange_galerkin::stabilization::{assemble_lps, LpsConfig};
use lagrange_galerkin::transport::{mass_rule, ElementQuadrature, Field, LgStepper, Transported};
use proptest::prelude::*;

fn mesh() -> &'static Mesh {
    static M: OnceLock<Mesh> = OnceLock::new();
    M.get_or_init(|| support::square(12))
}

struct Lps {
    space: Arc<FemSpace>,
    stab: CsrMatrix,
}

fn two_level() -> &'static Lps {
    static S: OnceLock<Lps> = OnceLock::new();
    S.get_or_init(|| {
        let fine = Arc::new(support::square(6).refine(Refinement::Barycentric3).unwrap());
        let space = Arc::new(FemSpace::new(fine.clone(), ElementKind::P2).unwrap());
        let cfg = LpsConfig::two_level(Refinement::Barycentric3, TauRule::Proportional(0.1));
        let part = cfg.partition(&fine).unwrap();
        let stab = assemble_lps(&space, &part, &cfg, mass_rule(&space)).unwrap();
        Lps { space, stab }
    })
}

struct Dc {
    lg: LgStepper,
    cache: DiffusionCache,
}

fn dc_setup() -> &'static Dc {
    static S: OnceLock<Dc> = OnceLock::new();
    S.get_or_init(|| {
        let space = Arc::new(FemSpace::new(Arc::new(support::square(6)), ElementKind::P2).unwrap());
        let lg = LgStepper::new(space.clone(), get_rule(7).unwrap()).unwrap();
        let cache = DiffusionCache::new(&space, mass_rule(&space), lg.mass());
        Dc { lg, cache }
    })
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn located_point_is_reproduced(x in -1.0f64..=1.0, y in -1.0f64..=1.0, hint in 0usize..288) {
        let m = mesh();
        let loc = m.locate_point([x, y], Some(hint)).unwrap();
        prop_assert_eq!(loc.element, support::scan(m, [x, y]));
        let back = m.affine(loc.element).map(loc.reference());
        prop_assert!((back[0] - x).abs() <= 1e-12 && (back[1] - y).abs() <= 1e-12);
    }

    #[test]
    fn lps_matrix_is_positive_semidefinite(v in coeffs(two_level().space.ndof())) {
        prop_assert!(two_level().stab.quadratic_form(&v) >= -1e-12);
    }

    #[test]
    fn dc_viscosity_and_diffusion_are_nonnegative(c in coeffs(169), star in coeffs(72 * 7), v in coeffs(169), max in any::<bool>()) {
        let d = dc_setup();
        let space = d.lg.space();
        prop_assert_eq!(space.ndof(), 169);
        let quad: &ElementQuadrature = d.lg.quadrature();
        let field = Field::from_coeffs(space.clone(), c, 0.0).unwrap();
        let cfg = DcConfig { reduction: if max { Reduction::Max } else { Reduction::Mean }, ..DcConfig::default() };
        let eps = residual_viscosity(&field, &Transported { values: star }, quad, 0.01, &cfg);
        prop_assert!(eps.iter().all(|&e| e >= 0.0));
        let a = d.cache.assemble(&eps);
        prop_assert!(a.quadratic_form(&v) >= -1e-12);
    }

    #[test]
    fn triple_norm_dominates_the_l2_norm(steps in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..20), dt in 1e-4f64..1.0) {
        let mut t = TripleNorm::new();
        let mut prev = 0.0;
        for (norm_sq, stab) in steps {
            let tri = t.push(norm_sq, stab, dt);
            prop_assert!(tri >= norm_sq);
            prop_assert!(t.accumulated() >= prev);
            prev = t.accumulated();
        }
    }

    #[test]
    fn rate_fit_recovers_power_laws(rate in -3.0f64..3.0, scale in 1e-6f64..1e3) {
        let series: Vec<(f64, f64)> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&h: &f64| (h, scale * h.powf(rate))).collect();
        prop_assert!((fit_rate(&series).unwrap() - rate).abs() <= 1e-10);
    }
}

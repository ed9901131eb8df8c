//! Structural identities over every bundled family, at random parameters and metrics.

use hermflow::catalog::Catalog;
use hermflow::invariant::connection::exterior_derivative;
use hermflow::invariant::{bismut_curvature, connection, d_omega, dualize, ConnectionKind, CurvatureConvention, MetricSlice};
use hermflow::sampling::{random_metric, seeded};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn family_identities(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        for id in Catalog::builtin().ids() {
            let spec = Catalog::builtin().family(id).unwrap();
            let p = spec.sample_params(&mut rng);
            let eqs = spec.instantiate(&p).unwrap();
            prop_assert!(eqs.d_squared_defect().0 < TOL, "{id}: d² ≠ 0");
            let br = dualize(&eqs).unwrap();
            prop_assert!(br.jacobi_defect().0 < TOL, "{id}: Jacobi");
            prop_assert!(br.integrability_defect() < TOL, "{id}: integrability");

            let m = random_metric(&mut rng, &MetricSlice::GENERIC);
            let g = m.frame_metric().unwrap();
            let dw = d_omega(&br, &g);
            let ddw = exterior_derivative(&br, &dw, 3);
            prop_assert!(ddw.iter().all(|z| z.norm() < TOL), "{id}: ddω ≠ 0");

            let b = connection(ConnectionKind::Bismut, &br, &g);
            prop_assert!(b.metric_defect() < TOL, "{id}: Bismut not metric");
            prop_assert!(b.type_defect() < TOL, "{id}: Bismut moves types");
            prop_assert!(b.torsion_skew_defect(&br, &g) < TOL, "{id}: Bismut torsion not skew");
            let ch = connection(ConnectionKind::Chern, &br, &g);
            prop_assert!(ch.metric_defect() < TOL, "{id}: Chern not metric");
            prop_assert!(ch.type_defect() < TOL, "{id}: Chern moves types");
            prop_assert!(ch.torsion_11_defect(&br) < TOL, "{id}: Chern torsion has a (1,1) part");

            let o = bismut_curvature(&eqs, &m, CurvatureConvention::Swapped).unwrap();
            let scale = 1.0 + o.max_abs();
            prop_assert!(o.antisymmetry_defect() < TOL * scale, "{id}: curvature antisymmetry");
            prop_assert!(o.reality_defect() < TOL * scale, "{id}: curvature reality");
        }
    }
}

//! Property tests for the structural invariants.

use proptest::prelude::*;

use surfcover::ccvt::{
    assign_faces, normal_cost, ClusterCount, EnergyParams, Generator, Norm,
};
use surfcover::geodesic::{Backend, SteinerSolver, SurfacePoint};
use surfcover::shapes;
use surfcover::viewpoint::{candidate_ray_set, CandidateRayParams};

fn arb_params(m: usize) -> impl Strategy<Value = EnergyParams> {
    (
        0.05f64..3.0,
        0.0f64..=1.0,
        -0.9f64..0.9,
        1.1f64..9.0,
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(move |(a1, a2, a3, a4, l1, nc)| EnergyParams {
            alpha1: a1,
            alpha2: a2,
            alpha3: a3,
            alpha4: a4,
            norm: if l1 { Norm::L1 } else { Norm::L2 },
            normal_cost_enabled: nc,
            m: ClusterCount::Fixed(m),
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Any assignment is a disjoint cover of the faces, regardless of
    /// parameters or generator placement.
    #[test]
    fn assignment_is_always_a_partition(
        seed in 0u64..1000,
        m in 1usize..12,
        params in arb_params(6),
    ) {
        let mesh = shapes::icosphere(2, Some((0.15, 2718)));
        let mut params = params;
        params.m = ClusterCount::Fixed(m);
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let generators: Vec<Generator> =
            rand::seq::index::sample(&mut rng, mesh.face_count(), m)
                .into_iter()
                .map(|f| Generator::at_face(&mesh, f as u32))
                .collect();
        let tess = assign_faces(&mesh, &generators, &params);
        prop_assert!(tess.is_partition(&mesh));
        prop_assert!(tess.energy >= 0.0);
    }

    /// The normal cost is bounded by its penalty weight: 0 ≤ Υ ≤ α₄.
    #[test]
    fn normal_cost_is_bounded(
        nx in -1.0f64..1.0,
        ny in -1.0f64..1.0,
        nz in -1.0f64..1.0,
        alpha3 in -0.99f64..0.99,
        alpha4 in 1.01f64..20.0,
    ) {
        let v = surfcover::mesh::Vec3::new(nx, ny, nz);
        prop_assume!(v.norm() > 1e-6);
        let n = v.normalize();
        let up = surfcover::mesh::Vec3::z();
        let cost = normal_cost(&n, &up, alpha3, alpha4);
        prop_assert!(cost >= 0.0);
        prop_assert!(cost <= alpha4 + 1e-12);
    }

    /// Geodesic queries return a polyline whose arc length equals the cost
    /// and respect the Euclidean lower bound.
    #[test]
    fn geodesic_cost_matches_polyline(a in 0u32..320, b in 0u32..320) {
        let mesh = shapes::icosphere(2, Some((0.2, 3141)));
        let solver = SteinerSolver::new(&mesh, None, Backend::default());
        let src = SurfacePoint::face_centroid(&mesh, a);
        let tgt = SurfacePoint::face_centroid(&mesh, b);
        let (cost, polyline) = solver.query(src, tgt).unwrap();
        let arc: f64 = polyline.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        prop_assert!((arc - cost).abs() <= 1e-9 * cost.max(1e-12));
        prop_assert!(cost >= (tgt.point - src.point).norm() - 1e-12);
    }

    /// Every feasible candidate-ray request yields a set satisfying the
    /// structural invariants.
    #[test]
    fn candidate_sets_satisfy_invariants(
        r_s in 0.02f64..0.1,
        ratio in 0.08f64..0.5,
        phi in 0.3f64..std::f64::consts::FRAC_PI_2,
        pick in 0.0f64..1.0,
    ) {
        let params = CandidateRayParams { r_s, r_c: ratio * r_s, phi, n_c: None };
        // Constructive ring capacity: a feasibility witness.
        let l = params.separation();
        let arg = l / (2.0 * r_s);
        let mut capacity = 1usize;
        if arg < 1.0 {
            let theta_l = 2.0 * arg.asin();
            let mut ring = 1;
            while ring as f64 * theta_l <= phi {
                let chord = l / (2.0 * r_s * (ring as f64 * theta_l).sin());
                capacity += if chord >= 1.0 {
                    1
                } else {
                    ((std::f64::consts::PI / chord.asin()).floor() as usize).max(1)
                };
                ring += 1;
            }
        }
        let n_c = 1 + ((capacity - 1) as f64 * pick) as usize;
        let set = candidate_ray_set(&CandidateRayParams { n_c: Some(n_c), ..params }).unwrap();
        prop_assert_eq!(set.centers.len(), n_c);
        prop_assert!(set.check_invariants(1e-6).is_ok());
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::mesh::ray_triangle_intersection;
use crate::shapes;

fn params(r_s: f64, r_c: f64, phi: f64, n_c: Option<usize>) -> CandidateRayParams {
    CandidateRayParams { r_s, r_c, phi, n_c }
}

#[test]
fn separation_matches_hand_values() {
    // r_c = r_s collapses the arctan to π/4: l = r_c√2.
    let p = params(0.05, 0.05, 1.0, Some(1));
    assert!((p.separation() - 0.05 * 2.0_f64.sqrt()).abs() < 1e-12);

    let recipe = CandidateRayParams::recipe();
    let expect = 2.0 * recipe.r_c * (recipe.r_c / recipe.r_s).atan().cos();
    assert_eq!(recipe.separation(), expect);
}

#[test]
fn single_candidate_is_the_pole() {
    let set = candidate_ray_set(&params(0.05, 0.007, 1.0, Some(1))).unwrap();
    assert_eq!(set.centers.len(), 1);
    assert!((set.centers[0] - Point::new(0.0, 0.0, 0.05)).norm() == 0.0);
    assert_eq!(set.objective(), 0.0);
}

#[test]
fn packed_set_satisfies_all_invariants() {
    let p = params(0.05, 0.007, std::f64::consts::FRAC_PI_3, Some(7));
    let set = candidate_ray_set(&p).unwrap();
    assert_eq!(set.centers.len(), 7);
    set.check_invariants(1e-6).unwrap();

    // Local optimality spot check: feasible random perturbations do not
    // reduce the lateral-offset objective.
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let l = p.separation();
    let cap_z = p.r_s * p.phi.cos();
    let mut tested = 0;
    for _ in 0..200 {
        let mut centers = set.centers.clone();
        for c in centers.iter_mut().skip(1) {
            let jitter = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ) * (0.01 * p.r_s);
            let moved = (c.coords + jitter).normalize() * p.r_s;
            *c = Point::from(moved);
        }
        let feasible = centers.iter().all(|c| c.z >= cap_z)
            && (0..centers.len()).all(|i| {
                (i + 1..centers.len()).all(|j| (centers[j] - centers[i]).norm() >= l)
            });
        if feasible {
            tested += 1;
            let objective: f64 = centers.iter().skip(1).map(|c| c.x * c.x + c.y * c.y).sum();
            assert!(set.objective() <= objective + 1e-9);
        }
    }
    assert!(tested > 0, "perturbation oracle never produced a feasible variant");
}

#[test]
fn auto_count_uses_half_the_packing_bound() {
    let p = params(0.05, 0.007, std::f64::consts::FRAC_PI_3, None);
    let disk = std::f64::consts::PI * (p.separation() / 2.0).powi(2);
    let expect = ((0.5 * p.cap_area() / disk).floor() as usize).max(1);
    assert_eq!(p.candidate_count(), expect);
    let set = candidate_ray_set(&p).unwrap();
    assert_eq!(set.centers.len(), expect);
    set.check_invariants(1e-6).unwrap();
}

#[test]
fn infeasible_packing_is_rejected_with_estimate() {
    // Tiny cap, many circles.
    let p = params(0.05, 0.02, 0.2, Some(50));
    match candidate_ray_set(&p) {
        Err(ViewpointError::InfeasiblePacking { requested, max_feasible, .. }) => {
            assert_eq!(requested, 50);
            assert!(max_feasible < 50);
        }
        other => panic!("expected InfeasiblePacking, got {other:?}"),
    }
}

#[test]
fn make_viewpoint_geometry() {
    let ray = make_viewpoint(Point::origin(), Vec3::z(), 0.05);
    assert!((ray.origin - Point::new(0.0, 0.0, 0.05)).norm() < 1e-15);
    assert!((ray.direction - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-15);
    // The waypoint sits at parameter r_s exactly.
    assert!((ray.point_at(0.05) - Point::origin()).norm() < 1e-15);

    let doubled = make_viewpoint(Point::origin(), Vec3::z(), 0.10);
    assert!((doubled.origin.z - 2.0 * ray.origin.z).abs() < 1e-15);
    assert_eq!(doubled.direction, ray.direction);
}

#[test]
fn align_identity_when_outward_is_up() {
    let set = candidate_ray_set(&params(0.05, 0.007, 1.0, Some(5))).unwrap();
    let ray = make_viewpoint(Point::origin(), Vec3::z(), 0.05);
    let aligned = align_candidates(&ray, &set);
    for (a, c) in aligned.iter().zip(&set.centers) {
        assert!((a - c).norm() < 1e-12);
    }
}

#[test]
fn align_rotates_pole_onto_outward() {
    let set = candidate_ray_set(&params(0.05, 0.007, 1.0, Some(6))).unwrap();
    // Outward +x: the pole candidate maps to (r_s, 0, 0).
    let ray = make_viewpoint(Point::origin(), Vec3::x(), 0.05);
    let aligned = align_candidates(&ray, &set);
    assert!((aligned[0] - Point::new(0.05, 0.0, 0.0)).norm() < 1e-9);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..25 {
        let n = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
        .normalize();
        let waypoint = Point::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let ray = make_viewpoint(waypoint, n, 0.05);
        let aligned = align_candidates(&ray, &set);
        // First center lands on the ray origin (colinear with n).
        assert!((aligned[0] - ray.origin).norm() < 1e-9);
        // Rigid transform: all pairwise distances preserved.
        for i in 0..set.centers.len() {
            for j in i + 1..set.centers.len() {
                let before = (set.centers[j] - set.centers[i]).norm();
                let after = (aligned[j] - aligned[i]).norm();
                assert!((before - after).abs() < 1e-9);
            }
        }
        // Cap membership is preserved relative to the new pole: every
        // aligned center keeps its elevation from the outward axis.
        for (a, c) in aligned.iter().zip(&set.centers) {
            let local_cos = c.z / 0.05;
            let world_cos = (a - waypoint).normalize().dot(&n);
            assert!((local_cos - world_cos).abs() < 1e-9);
        }
    }
}

/// Part mesh: flat grid with a small square plate hovering over `waypoint`.
fn overhang_scene() -> (crate::mesh::TriangleMesh, u32) {
    let grid = shapes::grid(8, 8, 0.01);
    let center = Point::new(0.04, 0.04, 0.0);
    let waypoint_face = (0..grid.face_count() as u32)
        .min_by(|&a, &b| {
            (grid.face_centroid(a) - center)
                .norm()
                .total_cmp(&(grid.face_centroid(b) - center).norm())
        })
        .unwrap();
    let w = grid.face_centroid(waypoint_face);

    let mut vertices = grid.vertices().to_vec();
    let mut faces = grid.faces().to_vec();
    let base = vertices.len() as u32;
    let half = 0.008;
    let height = 0.02;
    vertices.push(Point::new(w.x - half, w.y - half, height));
    vertices.push(Point::new(w.x + half, w.y - half, height));
    vertices.push(Point::new(w.x + half, w.y + half, height));
    vertices.push(Point::new(w.x - half, w.y + half, height));
    faces.push([base, base + 1, base + 2]);
    faces.push([base, base + 2, base + 3]);
    let mesh = crate::mesh::TriangleMesh::build(vertices, faces).unwrap();
    (mesh, waypoint_face)
}

#[test]
fn free_ray_returns_first_candidate_when_clear() {
    let mesh = shapes::grid(8, 8, 0.01);
    let face = 40u32;
    let set = candidate_ray_set(&params(0.05, 0.007, std::f64::consts::FRAC_PI_3, None)).unwrap();
    let ray = make_viewpoint(mesh.face_centroid(face), mesh.face_normal(face), 0.05);
    let free = get_free_ray(&ray, face, &set, &mesh, &AcceptAll, std::f64::consts::FRAC_PI_3)
        .expect("unobstructed waypoint");
    assert!((free.origin - ray.origin).norm() < 1e-9, "first candidate is the original");
    assert!((free.direction - ray.direction).norm() < 1e-9);
}

#[test]
fn free_ray_correction_under_overhang() {
    let (mesh, face) = overhang_scene();
    let set = candidate_ray_set(&params(0.05, 0.007, std::f64::consts::FRAC_PI_3, None)).unwrap();
    let waypoint = mesh.face_centroid(face);
    let ray = make_viewpoint(waypoint, Vec3::z(), 0.05);

    // The pole direction is blocked by the plate.
    let eps = 1e-6 * mesh.bbox_diagonal();
    assert!(segment_blocked(&mesh, waypoint, Vec3::z(), 0.05, Some(face), eps));

    let free = get_free_ray(&ray, face, &set, &mesh, &AcceptAll, std::f64::consts::FRAC_PI_3)
        .expect("tilted candidates clear the plate");
    assert!((free.origin - ray.origin).norm() > 1e-6, "not the first candidate");

    // Exhaustive verification: the corrected segment misses every triangle.
    let outward = -free.direction;
    let probe = crate::mesh::Ray { origin: waypoint + eps * outward, direction: outward };
    for fi in 0..mesh.face_count() as u32 {
        if fi == face {
            continue;
        }
        let [a, b, c] = mesh.face_points(fi);
        if let Some(t) = ray_triangle_intersection(&probe, a, b, c) {
            assert!(t >= 0.05 - eps, "corrected ray still hits face {fi} at {t}");
        }
    }
}

#[test]
fn free_ray_none_when_oracle_rejects_everything() {
    struct Never;
    impl ValidityOracle for Never {
        fn is_valid(&self, _: &crate::mesh::Ray, _: f64) -> bool {
            false
        }
    }
    let mesh = shapes::grid(4, 4, 0.01);
    let set = candidate_ray_set(&params(0.05, 0.007, 1.0, Some(4))).unwrap();
    let ray = make_viewpoint(mesh.face_centroid(7), mesh.face_normal(7), 0.05);
    assert!(get_free_ray(&ray, 7, &set, &mesh, &Never, 1.0).is_none());
}

#[test]
fn plan_accepts_everything_on_convex_part() {
    let mesh = shapes::icosphere(2, None);
    let set = candidate_ray_set(&CandidateRayParams::recipe()).unwrap();
    let rays: Vec<(crate::mesh::Ray, u32)> = (0..10u32)
        .map(|f| (make_viewpoint(mesh.face_centroid(f), mesh.face_normal(f), 0.05), f))
        .collect();
    let outcomes = plan_valid_configs(&rays, &set, &mesh, &AcceptAll, std::f64::consts::PI, 4);
    let summary = summarize(&outcomes);
    assert_eq!(summary.accepted, 10);
    assert_eq!(summary.corrected, 0);
    assert_eq!(summary.unrecoverable, 0);
    for o in &outcomes {
        assert_eq!(o.candidates.len(), 4);
        // Roll discretization is exactly {2π t / I}.
        for (t, c) in o.candidates.iter().enumerate() {
            assert_eq!(c.roll_angle, 2.0 * std::f64::consts::PI * t as f64 / 4.0);
        }
    }
}

#[test]
fn plan_marks_overhang_waypoint_corrected() {
    let (mesh, face) = overhang_scene();
    let set = candidate_ray_set(&params(0.05, 0.007, std::f64::consts::FRAC_PI_3, None)).unwrap();
    // Waypoint 0 is far from the plate, waypoint 1 is under it.
    let clear = 2u32;
    let rays = vec![
        (make_viewpoint(mesh.face_centroid(clear), Vec3::z(), 0.05), clear),
        (make_viewpoint(mesh.face_centroid(face), Vec3::z(), 0.05), face),
    ];
    let outcomes =
        plan_valid_configs(&rays, &set, &mesh, &AcceptAll, std::f64::consts::FRAC_PI_3, 3);
    assert_eq!(outcomes[0].status, WaypointStatus::Accepted);
    assert_eq!(outcomes[1].status, WaypointStatus::Corrected);
    let corrected = outcomes[1].final_ray.unwrap();
    assert!((corrected.origin - rays[1].0.origin).norm() > 1e-6);
    for c in &outcomes[1].candidates {
        assert_eq!(c.ray, corrected, "candidates use the substituted ray");
    }
}

#[test]
fn zero_elevation_budget_makes_tilted_waypoints_unrecoverable() {
    let mesh = shapes::grid(8, 8, 0.01);
    let set = candidate_ray_set(&params(0.05, 0.007, std::f64::consts::FRAC_PI_3, None)).unwrap();
    let tilted = Vec3::new(0.5, 0.0, 0.75_f64.sqrt()).normalize();
    let env: Vec<crate::mesh::TriangleMesh> = Vec::new();
    let oracle = DefaultValidityOracle::new(&mesh, &env, 0.05);
    let rays: Vec<(crate::mesh::Ray, u32)> = [30u32, 40, 50]
        .iter()
        .map(|&f| (make_viewpoint(mesh.face_centroid(f), tilted, 0.05), f))
        .collect();
    let outcomes = plan_valid_configs(&rays, &set, &mesh, &oracle, 0.0, 2);
    assert!(outcomes.iter().all(|o| o.status == WaypointStatus::Unrecoverable));
    assert!(outcomes.iter().all(|o| o.candidates.is_empty()));
}

#[test]
fn default_oracle_checks_environment_meshes() {
    let part = shapes::grid(8, 8, 0.01);
    let face = (0..part.face_count() as u32)
        .min_by(|&a, &b| {
            (part.face_centroid(a) - Point::new(0.04, 0.04, 0.0))
                .norm()
                .total_cmp(&(part.face_centroid(b) - Point::new(0.04, 0.04, 0.0)).norm())
        })
        .unwrap();
    let w = part.face_centroid(face);
    // Plate as an environment mesh instead of part geometry.
    let plate = crate::mesh::TriangleMesh::build(
        vec![
            Point::new(w.x - 0.008, w.y - 0.008, 0.02),
            Point::new(w.x + 0.008, w.y - 0.008, 0.02),
            Point::new(w.x + 0.008, w.y + 0.008, 0.02),
            Point::new(w.x - 0.008, w.y + 0.008, 0.02),
        ],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .unwrap();
    let env = vec![plate];
    let oracle = DefaultValidityOracle::new(&part, &env, 0.05);
    let vertical = make_viewpoint(w, Vec3::z(), 0.05);
    assert!(!oracle.is_valid(&vertical, std::f64::consts::FRAC_PI_3), "plate blocks the pole");
    let tilted_dir = Vec3::new(0.766, 0.0, 0.643).normalize(); // ~50° tilt
    let tilted = make_viewpoint(w, tilted_dir, 0.05);
    assert!(oracle.is_valid(&tilted, std::f64::consts::FRAC_PI_3));
}

fn pose(layer: u32, idx: usize) -> PoseCandidate {
    PoseCandidate {
        ray: make_viewpoint(Point::new(idx as f64, layer as f64, 0.0), Vec3::z(), 1.0),
        roll_angle: idx as f64,
        waypoint_index: layer,
    }
}

#[test]
fn config_tour_single_candidate_layers() {
    let layers: Vec<Vec<PoseCandidate>> = (0..4).map(|t| vec![pose(t, t as usize)]).collect();
    let metric = ConfigMetric::default();
    let (selection, total) =
        optimal_config_tour(&layers, &|a, b| metric.eval(a, b)).unwrap();
    assert_eq!(selection.len(), 4);
    let expect: f64 =
        (0..3).map(|t| metric.eval(&layers[t][0], &layers[t + 1][0])).sum();
    assert!((total - expect).abs() < 1e-12);
}

#[test]
fn config_tour_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _case in 0..10 {
        let layer_count = rng.random_range(2..=5usize);
        let width = rng.random_range(2..=4usize);
        let layers: Vec<Vec<PoseCandidate>> = (0..layer_count)
            .map(|t| (0..width).map(|i| pose(t as u32, i)).collect())
            .collect();
        // Hand-built random metric table keyed by (layer, from, to).
        let mut table = vec![vec![vec![0.0; width]; width]; layer_count];
        for layer in table.iter_mut() {
            for row in layer.iter_mut() {
                for cell in row.iter_mut() {
                    *cell = rng.random_range(0.1..5.0);
                }
            }
        }
        let metric = |a: &PoseCandidate, b: &PoseCandidate| {
            table[b.waypoint_index as usize][a.roll_angle as usize][b.roll_angle as usize]
        };
        let (selection, total) = optimal_config_tour(&layers, &metric).unwrap();

        // Exhaustive enumeration over all width^layer_count selections.
        let mut best = f64::INFINITY;
        let combos = width.pow(layer_count as u32);
        for mut code in 0..combos {
            let mut picks = Vec::with_capacity(layer_count);
            for _ in 0..layer_count {
                picks.push(code % width);
                code /= width;
            }
            let mut cost = 0.0;
            for t in 1..layer_count {
                cost += table[t][picks[t - 1]][picks[t]];
            }
            best = best.min(cost);
        }
        assert_eq!(total, best, "layered DP vs enumeration");

        // Positive scaling leaves the argmin unchanged.
        let scaled = |a: &PoseCandidate, b: &PoseCandidate| 3.5 * metric(a, b);
        let (scaled_sel, scaled_total) = optimal_config_tour(&layers, &scaled).unwrap();
        assert!((scaled_total - 3.5 * total).abs() < 1e-9);
        for (a, b) in selection.iter().zip(&scaled_sel) {
            assert_eq!(a.roll_angle, b.roll_angle);
        }
    }
}

#[test]
fn config_tour_beats_random_selections() {
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    let layers: Vec<Vec<PoseCandidate>> = (0..6)
        .map(|t| {
            (0..4)
                .map(|i| {
                    let mut p = pose(t, i);
                    p.ray.origin = Point::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    );
                    p
                })
                .collect()
        })
        .collect();
    let metric = ConfigMetric::default();
    let (_, total) = optimal_config_tour(&layers, &|a, b| metric.eval(a, b)).unwrap();
    for _ in 0..100 {
        let picks: Vec<usize> = (0..6).map(|_| rng.random_range(0..4usize)).collect();
        let mut cost = 0.0;
        for t in 1..6 {
            cost += metric.eval(&layers[t - 1][picks[t - 1]], &layers[t][picks[t]]);
        }
        assert!(total <= cost + 1e-12);
    }
}

#[test]
fn config_tour_empty_layer_is_rejected() {
    let layers = vec![vec![pose(0, 0)], vec![], vec![pose(2, 0)]];
    let metric = ConfigMetric::default();
    assert!(matches!(
        optimal_config_tour(&layers, &|a, b| metric.eval(a, b)),
        Err(ViewpointError::EmptyLayer(1))
    ));
}

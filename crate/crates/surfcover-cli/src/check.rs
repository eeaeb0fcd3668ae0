//! Inline invariant suite behind `--check`.
//!
//! Each checker returns a list of human-readable violations; the CLI turns a
//! non-empty list into exit code 3.

use surfcover::ccvt::{cluster_components, Tessellation};
use surfcover::geodesic::GeneratorGraph;
use surfcover::mesh::TriangleMesh;
use surfcover::metrics::MetricsReport;
use surfcover::tour::CoveragePath;
use surfcover::viewpoint::{
    segment_blocked, CandidateRaySet, PoseCandidate, WaypointOutcome, WaypointStatus,
};

pub fn segmentation(mesh: &TriangleMesh, tess: &Tessellation, repaired: bool) -> Vec<String> {
    let mut v = Vec::new();
    if !tess.is_partition(mesh) {
        v.push("clusters are not a disjoint cover of the faces".into());
    }
    for (i, c) in tess.clusters.iter().enumerate() {
        if c.face_indices.is_empty() {
            v.push(format!("cluster {i} is empty"));
            continue;
        }
        if !c.face_indices.contains(&c.generator_face) {
            v.push(format!("cluster {i}: generator face not a member"));
        }
        if (c.proxy_normal.norm() - 1.0).abs() > 1e-9 {
            v.push(format!("cluster {i}: proxy normal not unit length"));
        }
        let area: f64 = c.face_indices.iter().map(|&f| mesh.face_area(f)).sum();
        if (area - c.area).abs() > 1e-9 * area.max(1.0) {
            v.push(format!("cluster {i}: stored area {} vs recomputed {}", c.area, area));
        }
        if repaired {
            let comps = cluster_components(mesh, tess, i as u32);
            if comps.len() > 1 {
                v.push(format!("cluster {i} has {} components after repair", comps.len()));
            }
        }
    }
    v
}

pub fn graph(graph: &GeneratorGraph) -> Vec<String> {
    let mut v = Vec::new();
    for (&(i, j), e) in &graph.edges {
        if e.cost.is_nan() || e.cost < 0.0 {
            v.push(format!("edge ({i},{j}) has negative or NaN cost"));
        }
        let arc: f64 = e.path.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        if (arc - e.cost).abs() > 1e-6 * e.cost.max(1e-12) {
            v.push(format!("edge ({i},{j}) polyline length {arc} != cost {}", e.cost));
        }
        let (pi, pj) = (graph.nodes[i as usize].point, graph.nodes[j as usize].point);
        if e.path.first().is_none_or(|p| (p - pi).norm() > 1e-9)
            || e.path.last().is_none_or(|p| (p - pj).norm() > 1e-9)
        {
            v.push(format!("edge ({i},{j}) polyline does not join its generators"));
        }
    }
    v
}

pub fn coverage_path(path: &CoveragePath, graph: &GeneratorGraph) -> Vec<String> {
    let mut v = Vec::new();
    let n = graph.nodes.len();
    let mut seen = vec![false; n];
    for &c in &path.order {
        if c as usize >= n || seen[c as usize] {
            v.push("tour order is not a permutation of the generators".into());
            break;
        }
        seen[c as usize] = true;
    }
    if path.order.len() != n {
        v.push(format!("tour visits {} of {} generators", path.order.len(), n));
    }
    let mut cost = 0.0;
    for s in 0..path.order.len() {
        let (a, b) = (path.order[s], path.order[(s + 1) % path.order.len()]);
        match graph.cost(a, b) {
            Some(c) => cost += c,
            None => v.push(format!("tour edge ({a},{b}) missing from the graph")),
        }
    }
    if (cost - path.total_cost).abs() > 1e-9 * cost.max(1.0) {
        v.push(format!("tour cost {} != sum of edges {}", path.total_cost, cost));
    }
    let arc: f64 = path.polyline.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    if (arc - path.total_cost).abs() > 1e-6 * path.total_cost.max(1e-12) {
        v.push(format!("polyline length {arc} != tour cost {}", path.total_cost));
    }
    v
}

pub fn viewpoints(
    mesh: &TriangleMesh,
    set: &CandidateRaySet,
    outcomes: &[WaypointOutcome],
    waypoint_faces: &[u32],
    _theta_r: f64,
    selection: &[PoseCandidate],
) -> Vec<String> {
    let mut v = Vec::new();
    if let Err(e) = set.check_invariants(1e-6) {
        v.push(format!("candidate set: {e}"));
    }
    let r_s = set.params.r_s;
    let eps = 1e-6 * mesh.bbox_diagonal();
    for (i, o) in outcomes.iter().enumerate() {
        match (o.status, &o.final_ray) {
            (WaypointStatus::Unrecoverable, None) => {
                if !o.candidates.is_empty() {
                    v.push(format!("waypoint {i}: unrecoverable but has candidates"));
                }
            }
            (WaypointStatus::Unrecoverable, Some(_)) => {
                v.push(format!("waypoint {i}: unrecoverable yet carries a ray"));
            }
            (_, None) => v.push(format!("waypoint {i}: accepted/corrected without a ray")),
            (_, Some(ray)) => {
                let waypoint = ray.origin + r_s * ray.direction;
                if segment_blocked(mesh, waypoint, -ray.direction, r_s, Some(waypoint_faces[i]), eps)
                {
                    v.push(format!("waypoint {i}: final ray segment intersects the part"));
                }
            }
        }
    }
    let usable = outcomes.iter().filter(|o| o.status != WaypointStatus::Unrecoverable).count();
    if selection.len() != usable {
        v.push(format!("selection has {} poses for {usable} usable waypoints", selection.len()));
    }
    v
}

pub fn metrics(report: &MetricsReport) -> Vec<String> {
    let mut v = Vec::new();
    for (name, value) in [
        ("coverage", report.coverage_pct),
        ("overlap", report.overlap_pct),
        ("unreachable", report.unreach_pct),
        ("unreachableArea", report.unreach_area_pct),
    ] {
        if !(0.0..=100.0).contains(&value) {
            v.push(format!("{name} percentage out of range: {value}"));
        }
    }
    if report.overlap_pct > report.coverage_pct + 1e-12 {
        v.push(format!(
            "overlap {} exceeds coverage {}",
            report.overlap_pct, report.coverage_pct
        ));
    }
    if report.rsd_pct < 0.0 {
        v.push(format!("negative RSD {}", report.rsd_pct));
    }
    v
}

//! Post-processing pass that makes every cluster edge-connected.

use crate::mesh::TriangleMesh;

use super::{
    build_tessellation, constrain_centroid, cost_xi_face, lloyd::mark_degenerate_normals,
    mass_centroid, proxy_normal, Generator, Tessellation,
};

/// Connected components of one cluster's face set under edge adjacency,
/// sorted largest-first (ties: component containing the lowest face index).
pub fn cluster_components(mesh: &TriangleMesh, tess: &Tessellation, cluster: u32) -> Vec<Vec<u32>> {
    components_of(mesh, &tess.face_to_cluster, &tess.clusters[cluster as usize].face_indices)
}

fn components_of(mesh: &TriangleMesh, face_to_cluster: &[u32], faces: &[u32]) -> Vec<Vec<u32>> {
    let mut visited: std::collections::HashSet<u32> = std::collections::HashSet::new();
    let mut components = Vec::new();
    for &start in faces {
        if visited.contains(&start) {
            continue;
        }
        let cluster = face_to_cluster[start as usize];
        let mut comp = vec![start];
        let mut queue = vec![start];
        visited.insert(start);
        while let Some(f) = queue.pop() {
            for &n in mesh.adjacent_faces(f) {
                if face_to_cluster[n as usize] == cluster && visited.insert(n) {
                    comp.push(n);
                    queue.push(n);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    components
}

/// Reassigns the minor components of every multi-component cluster to the
/// cheapest adjacent cluster, face by face, iterating to a fixpoint.
///
/// Generators and proxy normals are frozen while memberships move; once the
/// partition is stable each touched cluster gets a fresh mass centroid,
/// constrained generator, and proxy normal. Partition invariants (disjoint,
/// covering) are preserved throughout.
pub fn repair_connectivity(mesh: &TriangleMesh, tess: &Tessellation) -> Tessellation {
    let params = tess.params.clone();
    let gens: Vec<Generator> = tess.clusters.iter().map(|c| c.generator_state()).collect();
    let mut face_to_cluster = tess.face_to_cluster.clone();
    let mut members: Vec<Vec<u32>> = tess.clusters.iter().map(|c| c.face_indices.clone()).collect();

    let max_passes = mesh.face_count();
    for _pass in 0..max_passes {
        let mut changed = false;
        for ci in 0..members.len() {
            let comps = components_of(mesh, &face_to_cluster, &members[ci]);
            if comps.len() <= 1 {
                continue;
            }
            for comp in &comps[1..] {
                for &face in comp {
                    // Candidate clusters adjacent to this face, excluding its own.
                    let mut best: Option<(f64, u32)> = None;
                    for &n in mesh.adjacent_faces(face) {
                        let target = face_to_cluster[n as usize];
                        if target == ci as u32 {
                            continue;
                        }
                        let cost = cost_xi_face(&params, &gens[target as usize], mesh, face);
                        let better = match best {
                            None => true,
                            Some((c, t)) => cost < c || (cost == c && target < t),
                        };
                        if better {
                            best = Some((cost, target));
                        }
                    }
                    if let Some((_, target)) = best {
                        face_to_cluster[face as usize] = target;
                        changed = true;
                    }
                }
            }
            // Rebuild membership lists touched by this cluster's pass.
            for list in &mut members {
                list.clear();
            }
            for (f, &c) in face_to_cluster.iter().enumerate() {
                members[c as usize].push(f as u32);
            }
        }
        if !changed {
            break;
        }
    }

    // Refresh generator state from the final memberships.
    let updated: Vec<Generator> = gens
        .iter()
        .zip(&members)
        .map(|(g, faces)| {
            if faces.is_empty() {
                return *g;
            }
            let mc = mass_centroid(mesh, faces);
            let face = constrain_centroid(mesh, faces, &mc);
            let proxy = proxy_normal(mesh, faces).unwrap_or_else(|_| mesh.face_normal(face));
            Generator { face, point: mesh.face_centroid(face), proxy_normal: proxy }
        })
        .collect();

    let mut repaired = build_tessellation(
        mesh,
        &updated,
        &params,
        face_to_cluster,
        tess.iterations,
        tess.seed,
        tess.energy_trace.clone(),
    );
    mark_degenerate_normals(mesh, &mut repaired);
    repaired
}

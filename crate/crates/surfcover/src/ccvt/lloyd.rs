//! Lloyd iteration over the segmentation energy.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::mesh::TriangleMesh;

use super::{
    assign_faces, build_tessellation, constrain_centroid, cost_xi_face, mass_centroid,
    proxy_normal, resolve_cluster_count, CcvtError, EnergyParams, Generator, Tessellation,
};

/// How many times an assignment pass is retried after reseeding empty
/// clusters before giving up on the retry loop for that iteration.
const RESEED_RETRIES: usize = 8;

/// Runs seeded Lloyd iteration and returns the converged tessellation.
///
/// Per iteration: assign faces to the current generators (frozen proxy
/// normals), then move each generator to the constrained mass centroid of its
/// cluster and refresh the proxy normal from the members. Iteration stops
/// when the relative change of the post-assignment energy drops below
/// `convergence_tol` or after `max_iterations` passes. Clusters that lose all
/// faces are reseeded at the face centroid costing the most against its
/// current generator.
///
/// The returned tessellation carries the final memberships together with the
/// updated generators, so every generator is a member face centroid; its
/// `energy` is evaluated against those stored generators, while
/// `energy_trace` records the post-assignment energy of each pass.
pub fn lloyd_run(
    mesh: &TriangleMesh,
    params: &EnergyParams,
    seed: u64,
    max_iterations: usize,
    convergence_tol: f64,
) -> Result<Tessellation, CcvtError> {
    params.validate()?;
    let m = resolve_cluster_count(mesh, params.m);
    if m > mesh.face_count() {
        return Err(CcvtError::TooManyClusters { requested: m, faces: mesh.face_count() });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut generators: Vec<Generator> = rand::seq::index::sample(&mut rng, mesh.face_count(), m)
        .into_iter()
        .map(|f| Generator::at_face(mesh, f as u32))
        .collect();

    let mut trace: Vec<f64> = Vec::new();
    let mut prev_energy: Option<f64> = None;
    let mut iterations = 0;
    let mut assignment = Vec::new();

    while iterations < max_iterations.max(1) {
        iterations += 1;
        let mut tess = assign_faces(mesh, &generators, params);
        let mut retries = 0;
        while !tess.empty_clusters().is_empty() && retries < RESEED_RETRIES {
            reseed_empty_clusters(mesh, params, &mut generators, &tess);
            tess = assign_faces(mesh, &generators, params);
            retries += 1;
        }
        trace.push(tess.energy);
        assignment = tess.face_to_cluster;

        // Generator update: constrained mass centroid + member proxy normal.
        let mut members: Vec<Vec<u32>> = vec![Vec::new(); m];
        for (f, &c) in assignment.iter().enumerate() {
            members[c as usize].push(f as u32);
        }
        for (g, faces) in generators.iter_mut().zip(&members) {
            if faces.is_empty() {
                continue;
            }
            let mc = mass_centroid(mesh, faces);
            let face = constrain_centroid(mesh, faces, &mc);
            let proxy = proxy_normal(mesh, faces).unwrap_or_else(|_| mesh.face_normal(face));
            *g = Generator { face, point: mesh.face_centroid(face), proxy_normal: proxy };
        }

        let energy = *trace.last().unwrap();
        if let Some(prev) = prev_energy {
            let denom = prev.abs().max(f64::MIN_POSITIVE);
            if ((prev - energy).abs() / denom) < convergence_tol {
                break;
            }
        }
        prev_energy = Some(energy);
    }

    let mut tess =
        build_tessellation(mesh, &generators, params, assignment, iterations, seed, trace);
    mark_degenerate_normals(mesh, &mut tess);
    Ok(tess)
}

/// Moves the generators of empty clusters onto the face centroids that cost
/// the most against their currently assigned generator.
fn reseed_empty_clusters(
    mesh: &TriangleMesh,
    params: &EnergyParams,
    generators: &mut [Generator],
    tess: &Tessellation,
) {
    let empties = tess.empty_clusters();
    if empties.is_empty() {
        return;
    }
    let taken: std::collections::HashSet<u32> = generators.iter().map(|g| g.face).collect();
    let gens: Vec<Generator> = tess.clusters.iter().map(|c| c.generator_state()).collect();
    let mut costs: Vec<(f64, u32)> = (0..mesh.face_count() as u32)
        .into_par_iter()
        .filter(|f| !taken.contains(f))
        .map(|f| {
            let g = &gens[tess.face_to_cluster[f as usize] as usize];
            (cost_xi_face(params, g, mesh, f), f)
        })
        .collect();
    // Worst-assigned first; ties to the lowest face index.
    costs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    for (slot, &cluster) in empties.iter().enumerate() {
        if let Some(&(_, face)) = costs.get(slot) {
            generators[cluster as usize] = Generator::at_face(mesh, face);
        }
    }
}

/// Re-runs the proxy-normal computation to flag clusters whose normals
/// cancelled (their proxy fell back to the generator's face normal).
pub(super) fn mark_degenerate_normals(mesh: &TriangleMesh, tess: &mut Tessellation) {
    for cluster in &mut tess.clusters {
        if cluster.face_indices.is_empty() {
            continue;
        }
        cluster.degenerate_normal = proxy_normal(mesh, &cluster.face_indices).is_err();
    }
}

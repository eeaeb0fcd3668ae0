//! Deterministic circle packing on a spherical cap.
//!
//! The candidate centers start on concentric rings, then project-and-repel
//! iterations resolve separation violations (push conflicting pairs apart
//! along their chord, re-project to the sphere, clamp to the cap, re-pin the
//! first center to the pole). A final descent pass pulls every center toward
//! the pole along its meridian while feasibility holds, driving down the
//! lateral-offset objective.

use crate::mesh::{Point, Vec3};

use super::{CandidateRayParams, CandidateRaySet, ViewpointError};

const TOTAL_ITERATION_CAP: usize = 10_000;
const SEPARATION_SLACK: f64 = 1e-9;

/// Builds the candidate center set for the given parameters.
///
/// Fails fast when the requested count provably cannot fit
/// (`N·π(l/2)² > 1.1 × capArea`), reporting the estimated maximum.
pub fn candidate_ray_set(params: &CandidateRayParams) -> Result<CandidateRaySet, ViewpointError> {
    params.validate()?;
    let n = params.candidate_count();
    if n == 1 {
        // The pinned pole alone satisfies every constraint.
        let centers = vec![Point::new(0.0, 0.0, params.r_s)];
        return Ok(CandidateRaySet { centers, params: *params });
    }
    let l = params.separation();
    let disk = std::f64::consts::PI * (l / 2.0) * (l / 2.0);
    let cap = params.cap_area();
    if n as f64 * disk > 1.1 * cap {
        return Err(ViewpointError::InfeasiblePacking {
            requested: n,
            separation: l,
            max_feasible: (1.1 * cap / disk).floor() as usize,
        });
    }

    let mut centers = initial_rings(params, n);
    let mut budget = TOTAL_ITERATION_CAP;
    repel_to_feasibility(params, &mut centers, &mut budget);
    descend_toward_pole(params, &mut centers, &mut budget);

    let min_sep = min_separation(&centers);
    if centers.len() > 1 && min_sep < l - 1e-6 {
        return Err(ViewpointError::PackingDidNotConverge { achieved: min_sep, required: l });
    }

    // Ascending by distance to the pole center; ties keep ring order.
    let pole = centers[0];
    centers.sort_by(|a, b| (a - pole).norm().total_cmp(&(b - pole).norm()));
    Ok(CandidateRaySet { centers, params: *params })
}

fn on_sphere(r: f64, theta: f64, azimuth: f64) -> Point {
    Point::new(
        r * theta.sin() * azimuth.cos(),
        r * theta.sin() * azimuth.sin(),
        r * theta.cos(),
    )
}

/// Pole plus concentric rings spaced by the separation chord angle.
fn initial_rings(params: &CandidateRayParams, n: usize) -> Vec<Point> {
    let r = params.r_s;
    let l = params.separation();
    let theta_step = 2.0 * (l / (2.0 * r)).min(1.0).asin();
    let mut centers = vec![Point::new(0.0, 0.0, r)];
    let mut ring = 1usize;
    while centers.len() < n {
        let theta = (ring as f64 * theta_step).min(params.phi);
        // Ring capacity from the in-ring chord constraint.
        let chord = l / (2.0 * r * theta.sin());
        let capacity = if chord >= 1.0 {
            1
        } else {
            ((std::f64::consts::PI / chord.asin()).floor() as usize).max(1)
        };
        let take = capacity.min(n - centers.len());
        let stagger = ring as f64 * 0.381_966; // golden-ratio ring offset
        for t in 0..take {
            let az = 2.0 * std::f64::consts::PI * (t as f64 / take as f64 + stagger);
            centers.push(on_sphere(r, theta, az));
        }
        if theta >= params.phi && centers.len() < n {
            // Cap boundary reached: interleave the remainder on the rim and
            // let the repel pass spread things out.
            let rest = n - centers.len();
            for t in 0..rest {
                let az = 2.0 * std::f64::consts::PI * ((t as f64 + 0.5) / rest as f64 + stagger);
                centers.push(on_sphere(r, params.phi, az));
            }
            break;
        }
        ring += 1;
    }
    centers
}

fn min_separation(centers: &[Point]) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            min = min.min((centers[j] - centers[i]).norm());
        }
    }
    min
}

/// Jacobi-style repulsion until every pair is at least `l` apart (within
/// slack) and every center sits on the cap.
fn repel_to_feasibility(params: &CandidateRayParams, centers: &mut [Point], budget: &mut usize) {
    let r = params.r_s;
    let l = params.separation();
    let cap_z = r * params.phi.cos();
    let n = centers.len();
    while *budget > 0 {
        *budget -= 1;
        let mut disp = vec![Vec3::zeros(); n];
        let mut violated = false;
        for i in 0..n {
            for j in i + 1..n {
                let delta = centers[j] - centers[i];
                let d = delta.norm();
                if d >= l - SEPARATION_SLACK {
                    continue;
                }
                violated = true;
                let dir = if d > 1e-12 * r {
                    delta / d
                } else {
                    // Coincident points: split along a deterministic tangent.
                    let az = (i * n + j) as f64;
                    Vec3::new(az.cos(), az.sin(), 0.0)
                };
                let push = l - d;
                if i == 0 {
                    disp[j] += dir * push;
                } else {
                    disp[i] -= dir * (push / 2.0);
                    disp[j] += dir * (push / 2.0);
                }
            }
        }
        if !violated {
            break;
        }
        for (i, c) in centers.iter_mut().enumerate().skip(1) {
            let mut p = c.coords + disp[i];
            let norm = p.norm();
            if norm < 1e-12 * r {
                p = Vec3::new(0.0, 0.0, r);
            } else {
                p *= r / norm;
            }
            if p.z < cap_z {
                // Clamp to the cap rim along the meridian.
                let rim = r * params.phi.sin();
                let lateral = (p.x * p.x + p.y * p.y).sqrt();
                if lateral < 1e-12 * r {
                    let az = i as f64;
                    p = Vec3::new(rim * az.cos(), rim * az.sin(), cap_z);
                } else {
                    p = Vec3::new(p.x * rim / lateral, p.y * rim / lateral, cap_z);
                }
            }
            *c = Point::from(p);
        }
        centers[0] = Point::new(0.0, 0.0, r);
    }
}

/// Coordinate descent on the lateral-offset objective: shrink each center's
/// polar angle while all separations stay at or above `l`.
fn descend_toward_pole(params: &CandidateRayParams, centers: &mut [Point], budget: &mut usize) {
    let r = params.r_s;
    let l = params.separation();
    let n = centers.len();
    let mut step = 0.25;
    while step > 1e-5 && *budget > 0 {
        let mut progressed = false;
        for i in 1..n {
            if *budget == 0 {
                break;
            }
            *budget -= 1;
            let c = centers[i];
            let theta = (c.z / r).clamp(-1.0, 1.0).acos();
            if theta < 1e-9 {
                continue;
            }
            let azimuth = c.y.atan2(c.x);
            let candidate = on_sphere(r, theta * (1.0 - step), azimuth);
            let ok = (0..n)
                .filter(|&j| j != i)
                .all(|j| (centers[j] - candidate).norm() >= l);
            if ok {
                centers[i] = candidate;
                progressed = true;
            }
        }
        if !progressed {
            step *= 0.5;
        }
    }
}

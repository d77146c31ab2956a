//! Flip-degraded meshes: start from a random coherent triangulation, then
//! randomly flip edges to destroy its shape quality. Phase one flips any
//! edge whose incident face pair is convex; phase two additionally demands
//! that the replacement edge be geodesically longer, driving aspect ratios
//! toward slivers.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::sphere::{vol_sign, Tolerance, Vec3};
use crate::triangulation::SphereTriangulation;
use crate::Result;

use super::hull::random_coherent;

const DEFAULT_ITERATIONS: usize = 10_000;

/// Mutable mesh with the exact flip rule of
/// [`SphereTriangulation::flip_edge`], maintained incrementally so long flip
/// campaigns stay linear. The public API revalidates the final result.
pub(crate) struct FlipMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    dart_face: HashMap<(usize, usize), usize>,
    edges: Vec<(usize, usize)>,
    edge_pos: HashMap<(usize, usize), usize>,
    tol: Tolerance,
}

impl FlipMesh {
    pub(crate) fn new(t: &SphereTriangulation, tol: Tolerance) -> Self {
        let mut dart_face = HashMap::new();
        for (fi, f) in t.faces().iter().enumerate() {
            for e in 0..3 {
                dart_face.insert((f[e], f[(e + 1) % 3]), fi);
            }
        }
        let edges: Vec<_> = t.edges().to_vec();
        let edge_pos = edges.iter().enumerate().map(|(p, &e)| (e, p)).collect();
        FlipMesh {
            vertices: t.vertices().to_vec(),
            faces: t.faces().to_vec(),
            dart_face,
            edges,
            edge_pos,
            tol,
        }
    }

    pub(crate) fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[cfg(test)]
    pub(crate) fn edge(&self, idx: usize) -> (usize, usize) {
        self.edges[idx]
    }

    fn geodesic_angle(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.vertices[i].normalize(), self.vertices[j].normalize());
        a.dot(&b).clamp(-1.0, 1.0).acos()
    }

    fn third(&self, f: usize, i: usize, j: usize) -> usize {
        *self.faces[f]
            .iter()
            .find(|&&v| v != i && v != j)
            .expect("dart not on face")
    }

    /// Attempts the flip; returns whether it was performed. `require_longer`
    /// is the phase-two rule (replacement edge strictly longer).
    pub(crate) fn try_flip(&mut self, edge_idx: usize, require_longer: bool) -> bool {
        let (i, j) = self.edges[edge_idx];
        let f = self.dart_face[&(i, j)];
        let g = self.dart_face[&(j, i)];
        let k = self.third(f, i, j);
        let l = self.third(g, i, j);
        let kl = (k.min(l), k.max(l));
        if self.edge_pos.contains_key(&kl) {
            return false;
        }
        let (vi, vj, vk, vl) = (
            &self.vertices[i],
            &self.vertices[j],
            &self.vertices[k],
            &self.vertices[l],
        );
        if vol_sign(vi, vl, vk, self.tol) != 1 || vol_sign(vj, vk, vl, self.tol) != 1 {
            return false;
        }
        if require_longer && self.geodesic_angle(k, l) <= self.geodesic_angle(i, j) {
            return false;
        }

        for face in [f, g] {
            let t = self.faces[face];
            for e in 0..3 {
                self.dart_face.remove(&(t[e], t[(e + 1) % 3]));
            }
        }
        self.faces[f] = [i, l, k];
        self.faces[g] = [j, k, l];
        for face in [f, g] {
            let t = self.faces[face];
            for e in 0..3 {
                self.dart_face.insert((t[e], t[(e + 1) % 3]), face);
            }
        }

        let last = self.edges.len() - 1;
        let moved = self.edges[last];
        self.edges.swap_remove(edge_idx);
        self.edge_pos.remove(&(i, j));
        if edge_idx <= last && moved != (i, j) {
            self.edge_pos.insert(moved, edge_idx);
        }
        self.edge_pos.insert(kl, self.edges.len());
        self.edges.push(kl);
        true
    }

    #[cfg(test)]
    pub(crate) fn max_edge_angle(&self) -> f64 {
        self.edges
            .iter()
            .map(|&(i, j)| self.geodesic_angle(i, j))
            .fold(0.0, f64::max)
    }

    pub(crate) fn into_triangulation(self) -> Result<SphereTriangulation> {
        SphereTriangulation::from_parts(self.vertices, self.faces)
    }
}

/// The two-phase flip protocol with the standard iteration counts
/// (10000 unconditional-rule flips, then 10000 longer-edge flips).
pub fn ugly_flip_family(n: usize, seed: u64) -> Result<SphereTriangulation> {
    ugly_flip_family_with(n, seed, DEFAULT_ITERATIONS, DEFAULT_ITERATIONS)
}

/// Same protocol with explicit per-phase iteration counts. Zero iterations
/// reproduces `random_coherent(n, seed)` exactly. Edge choices come from a
/// separate stream of the same seed, so the base triangulation is stable.
pub fn ugly_flip_family_with(
    n: usize,
    seed: u64,
    phase1: usize,
    phase2: usize,
) -> Result<SphereTriangulation> {
    let base = random_coherent(n, seed)?;
    let mut mesh = FlipMesh::new(&base, Tolerance::default());
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(1);
    for _ in 0..phase1 {
        let e = rng.gen_range(0..mesh.edge_count());
        mesh.try_flip(e, false);
    }
    for _ in 0..phase2 {
        let e = rng.gen_range(0..mesh.edge_count());
        mesh.try_flip(e, true);
    }
    mesh.into_triangulation()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_iterations_is_the_hull() {
        let a = ugly_flip_family_with(30, 5, 0, 0).unwrap();
        let b = random_coherent(30, 5).unwrap();
        assert_eq!(a.faces(), b.faces());
    }

    #[test]
    fn outputs_validate_across_seeds() {
        for seed in 0..50 {
            let t = ugly_flip_family_with(20, seed, 120, 120).unwrap();
            assert_eq!(t.faces().len(), 36);
        }
    }

    #[test]
    fn phase_two_never_shrinks_the_longest_edge() {
        let base = random_coherent(40, 11).unwrap();
        let tol = Tolerance::default();
        let mut mesh = FlipMesh::new(&base, tol);
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        rng.set_stream(1);
        for _ in 0..200 {
            let e = rng.gen_range(0..mesh.edge_count());
            mesh.try_flip(e, false);
        }
        let mut longest = mesh.max_edge_angle();
        for _ in 0..200 {
            let e = rng.gen_range(0..mesh.edge_count());
            mesh.try_flip(e, true);
            let now = mesh.max_edge_angle();
            assert!(now >= longest - 1e-15);
            longest = now;
        }
    }

    #[test]
    fn incremental_flips_agree_with_public_flip_edge() {
        // Replay the same decisions through the validating API and compare.
        let tol = Tolerance::default();
        let mut mesh = FlipMesh::new(&random_coherent(18, 3).unwrap(), tol);
        let mut slow = random_coherent(18, 3).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(99);
        for step in 0..300 {
            let require_longer = step >= 150;
            let e = rng.gen_range(0..mesh.edge_count());
            let (i, j) = mesh.edge(e);
            let fast_ok = mesh.try_flip(e, require_longer);
            let longer_ok = !require_longer || {
                let f = slow.face_left_of(i, j).unwrap();
                let g = slow.face_left_of(j, i).unwrap();
                let k = slow.third_vertex(f, i, j);
                let l = slow.third_vertex(g, i, j);
                let ang = |a: usize, b: usize| {
                    slow.vertex(a)
                        .normalize()
                        .dot(&slow.vertex(b).normalize())
                        .clamp(-1.0, 1.0)
                        .acos()
                };
                ang(k, l) > ang(i, j)
            };
            let slow_result = if longer_ok { slow.flip_edge(i, j, tol) } else { Err(crate::Error::NotFlippable("shorter".into())) };
            assert_eq!(fast_ok, slow_result.is_ok(), "step {step} edge ({i},{j})");
            if let Ok(next) = slow_result {
                slow = next;
            }
        }
        let final_fast = mesh.into_triangulation().unwrap();
        let mut a: Vec<_> = final_fast.faces().iter().map(|f| sorted3(*f)).collect();
        let mut b: Vec<_> = slow.faces().iter().map(|f| sorted3(*f)).collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    fn sorted3(mut f: [usize; 3]) -> [usize; 3] {
        f.sort_unstable();
        f
    }
}

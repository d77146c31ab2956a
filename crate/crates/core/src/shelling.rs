//! Longitudinal shellability.
//!
//! A triangulation is longitudinally shellable from a pole when its faces can
//! be added one at a time so that every prefix union is a theta-monotone
//! disk. Four equivalent graph conditions decide this: the down dual is
//! acyclic, the oriented primal graph is strongly connected, the oriented
//! primal graph connects the polar faces in both directions, and the leg
//! graph is acyclic. All four are implemented independently and
//! [`is_shellable`] insists that they agree.
//!
//! Edges lying exactly along a longitude (seam edges) are supported: such an
//! edge contributes both orientations to the oriented primal graph and no
//! edge to the down dual, and faces touching the seam contribute no legs.

use std::collections::{HashMap, VecDeque};

use crate::sphere::{vol_sign, Tolerance, Vec3};
use crate::triangulation::SphereTriangulation;
use crate::{Error, Result};

/// Which directed graph a [`DirectedView`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViewKind {
    /// Nodes are faces; edge f -> g across each shared edge whose left dart
    /// satisfies vol(pole, i, j) > 0 (some point of f is due north of g).
    DownDual,
    /// Nodes are vertices; every undirected edge directed west to east, with
    /// both directions for edges along longitudes.
    OrientedPrimal,
    /// Nodes are vertices; the legs of every down face, directed toward the
    /// face's apex.
    LegGraph,
}

/// One of the three directed graphs derived from a triangulation and a pole.
#[derive(Debug, Clone)]
pub struct DirectedView {
    pub kind: ViewKind,
    /// Faces for `DownDual`, vertices otherwise.
    pub node_count: usize,
    pub edges: Vec<(usize, usize)>,
    pub pole: Vec3,
}

impl DirectedView {
    /// Out-neighbor lists indexed by node.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(a, b) in &self.edges {
            adj[a].push(b);
        }
        adj
    }
}

/// All three directed graphs plus the polar faces, computed in one pass.
pub(crate) struct PoleAnalysis {
    dual_edges: Vec<(usize, usize)>,
    primal_edges: Vec<(usize, usize)>,
    leg_edges: Vec<(usize, usize)>,
    pub(crate) north: usize,
    pub(crate) south: usize,
    /// Edges lying along a longitude, as (i, j) with i < j.
    pub(crate) seam_edges: Vec<(usize, usize)>,
    /// Faces with one negative and two positive darts, with their apexes.
    pub(crate) down_faces: Vec<(usize, usize)>,
}

pub(crate) fn pole_analysis(
    t: &SphereTriangulation,
    pole: &Vec3,
    tol: Tolerance,
) -> Result<PoleAnalysis> {
    for (v, p) in t.vertices().iter().enumerate() {
        if p.cross(pole).norm() <= tol.rel * p.norm() * pole.norm() {
            return Err(Error::DegenerateDirection(format!(
                "vertex {v} lies on the polar axis"
            )));
        }
    }
    let mut edge_sign: HashMap<(usize, usize), i8> = HashMap::with_capacity(t.edges().len());
    let mut seam_edges = Vec::new();
    for &(i, j) in t.edges() {
        let s = vol_sign(pole, t.vertex(i), t.vertex(j), tol);
        if s == 0 {
            // Coplanar with the axis: either a seam edge (endpoints on the
            // same longitude) or an arc through a pole, which is degenerate.
            let ph = pole / pole.norm();
            let ei = t.vertex(i) - ph * t.vertex(i).dot(&ph);
            let ej = t.vertex(j) - ph * t.vertex(j).dot(&ph);
            if ei.dot(&ej) <= 0.0 {
                return Err(Error::DegenerateDirection(format!(
                    "edge ({i}, {j}) passes through a pole"
                )));
            }
            seam_edges.push((i, j));
        }
        edge_sign.insert((i, j), s);
    }
    let dart_sign = |a: usize, b: usize| {
        if a < b {
            edge_sign[&(a, b)]
        } else {
            -edge_sign[&(b, a)]
        }
    };

    let mut dual_edges = Vec::with_capacity(t.edges().len());
    let mut primal_edges = Vec::with_capacity(t.edges().len());
    for &(i, j) in t.edges() {
        let f = t.face_left_of(i, j).expect("closed surface");
        let g = t.face_left_of(j, i).expect("closed surface");
        match edge_sign[&(i, j)] {
            1 => {
                dual_edges.push((f, g));
                primal_edges.push((i, j));
            }
            -1 => {
                dual_edges.push((g, f));
                primal_edges.push((j, i));
            }
            _ => {
                // Seam edge: passable in both directions, no dual edge.
                primal_edges.push((i, j));
                primal_edges.push((j, i));
            }
        }
    }

    let mut leg_edges = Vec::new();
    let mut down_faces = Vec::new();
    let mut north = None;
    let mut south = None;
    for (fi, face) in t.faces().iter().enumerate() {
        let signs = [
            dart_sign(face[0], face[1]),
            dart_sign(face[1], face[2]),
            dart_sign(face[2], face[0]),
        ];
        let negatives = signs.iter().filter(|&&s| s == -1).count();
        let positives = signs.iter().filter(|&&s| s == 1).count();
        if negatives == 0 && positives == 3 {
            // Contains the pole.
            if north.replace(fi).is_some() {
                return Err(Error::Internal(format!(
                    "two faces claim the pole: {fi} and earlier"
                )));
            }
        } else if negatives == 3 {
            if south.replace(fi).is_some() {
                return Err(Error::Internal(format!(
                    "two faces claim the antipode: {fi} and earlier"
                )));
            }
        } else if negatives == 1 && positives == 2 {
            // Down face: the negative dart is the base, shared with the
            // neighbor due north; legs run toward the apex. Seam-flank
            // slivers (one dart on a longitude) have no vertex due south of
            // an edge and contribute no legs.
            let e = signs.iter().position(|&s| s == -1).unwrap();
            let apex = face[(e + 2) % 3];
            leg_edges.push((face[e], apex));
            leg_edges.push((face[(e + 1) % 3], apex));
            down_faces.push((fi, apex));
        }
    }
    let (Some(north), Some(south)) = (north, south) else {
        return Err(Error::Internal(
            "no face contains the pole or the antipode; is the triangulation everted?".into(),
        ));
    };
    Ok(PoleAnalysis {
        dual_edges,
        primal_edges,
        leg_edges,
        north,
        south,
        seam_edges,
        down_faces,
    })
}

/// Builds the requested directed graph for `(t, pole)`.
pub fn build_view(
    t: &SphereTriangulation,
    pole: &Vec3,
    kind: ViewKind,
    tol: Tolerance,
) -> Result<DirectedView> {
    let analysis = pole_analysis(t, pole, tol)?;
    let (node_count, edges) = match kind {
        ViewKind::DownDual => (t.faces().len(), analysis.dual_edges),
        ViewKind::OrientedPrimal => (t.n(), analysis.primal_edges),
        ViewKind::LegGraph => (t.n(), analysis.leg_edges),
    };
    Ok(DirectedView {
        kind,
        node_count,
        edges,
        pole: *pole,
    })
}

/// The four independent shellability tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShellMethod {
    /// Down dual acyclic.
    DualAcyclic,
    /// Oriented primal strongly connected.
    PrimalStronglyConnected,
    /// Oriented primal connects the polar faces both ways.
    PolarPaths,
    /// Leg graph acyclic.
    LegsAcyclic,
}

pub const ALL_METHODS: [ShellMethod; 4] = [
    ShellMethod::DualAcyclic,
    ShellMethod::PrimalStronglyConnected,
    ShellMethod::PolarPaths,
    ShellMethod::LegsAcyclic,
];

fn run_method(t: &SphereTriangulation, analysis: &PoleAnalysis, method: ShellMethod) -> bool {
    let adjacency = |edges: &[(usize, usize)], n: usize| {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
        }
        adj
    };
    match method {
        ShellMethod::DualAcyclic => {
            !has_directed_cycle(&adjacency(&analysis.dual_edges, t.faces().len()))
        }
        ShellMethod::PrimalStronglyConnected => {
            strongly_connected_component_count(&adjacency(&analysis.primal_edges, t.n())) == 1
        }
        ShellMethod::PolarPaths => {
            let adj = adjacency(&analysis.primal_edges, t.n());
            let north = t.face(analysis.north);
            let south = t.face(analysis.south);
            let down = reachable_from(&adj, north.iter().copied());
            let up = reachable_from(&adj, south.iter().copied());
            south.iter().any(|&v| down[v]) && north.iter().any(|&v| up[v])
        }
        ShellMethod::LegsAcyclic => !has_directed_cycle(&adjacency(&analysis.leg_edges, t.n())),
    }
}

/// Decides longitudinal shellability of `(t, pole)` with one chosen test.
pub fn is_shellable_by(
    t: &SphereTriangulation,
    pole: &Vec3,
    method: ShellMethod,
    tol: Tolerance,
) -> Result<bool> {
    let analysis = pole_analysis(t, pole, tol)?;
    Ok(run_method(t, &analysis, method))
}

/// Decides longitudinal shellability, running all four tests and demanding
/// unanimity.
pub fn is_shellable(t: &SphereTriangulation, pole: &Vec3, tol: Tolerance) -> Result<bool> {
    let analysis = pole_analysis(t, pole, tol)?;
    let first = run_method(t, &analysis, ALL_METHODS[0]);
    for method in &ALL_METHODS[1..] {
        let answer = run_method(t, &analysis, *method);
        if answer != first {
            return Err(Error::Internal(format!(
                "shellability tests disagree: {method:?} says {answer}, {:?} says {first}",
                ALL_METHODS[0]
            )));
        }
    }
    Ok(first)
}

/// A longitudinal shelling: a topological order of the down dual.
#[derive(Debug, Clone)]
pub struct ShellingOrder {
    faces: Vec<usize>,
}

impl ShellingOrder {
    /// Wraps an unchecked face sequence; certify it with
    /// [`verify_shelling_order`] before trusting it.
    pub fn from_faces(faces: Vec<usize>) -> Self {
        ShellingOrder { faces }
    }

    /// Face indices in shelling order; the first is the north face.
    pub fn faces(&self) -> &[usize] {
        &self.faces
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }
}

/// Computes a longitudinal shelling order of `(t, pole)`, or `NotShellable`.
pub fn shelling_order(
    t: &SphereTriangulation,
    pole: &Vec3,
    tol: Tolerance,
) -> Result<ShellingOrder> {
    let analysis = pole_analysis(t, pole, tol)?;
    let mut adj = vec![Vec::new(); t.faces().len()];
    for &(f, g) in &analysis.dual_edges {
        adj[f].push(g);
    }
    let faces =
        kahn_topological_order(&adj, Some(analysis.north)).ok_or(Error::NotShellable)?;
    debug_assert_eq!(faces[0], analysis.north);
    Ok(ShellingOrder { faces })
}

/// Certifies a claimed shelling order: it must be a permutation of the faces
/// starting at the north face in which every down-dual in-neighbor of a face
/// precedes it.
pub fn verify_shelling_order(
    t: &SphereTriangulation,
    pole: &Vec3,
    order: &ShellingOrder,
    tol: Tolerance,
) -> Result<bool> {
    let analysis = pole_analysis(t, pole, tol)?;
    let nf = t.faces().len();
    if order.faces.len() != nf {
        return Ok(false);
    }
    let mut position = vec![usize::MAX; nf];
    for (pos, &f) in order.faces.iter().enumerate() {
        if f >= nf || position[f] != usize::MAX {
            return Ok(false);
        }
        position[f] = pos;
    }
    if order.faces[0] != analysis.north {
        return Ok(false);
    }
    Ok(analysis
        .dual_edges
        .iter()
        .all(|&(f, g)| position[f] < position[g]))
}

/// Whether `p` lies strictly inside the open hemisphere west of the dart
/// i -> j (the hemisphere from which the dart's dual edge points away).
pub fn dart_hemisphere_contains(
    t: &SphereTriangulation,
    i: usize,
    j: usize,
    p: &Vec3,
    tol: Tolerance,
) -> bool {
    vol_sign(p, t.vertex(i), t.vertex(j), tol) == 1
}

/// Searches for a pole from which `t` is longitudinally shellable.
///
/// Candidate poles are sampled next to every intersection of two distinct
/// edge great circles; each cell of the circle arrangement has such an
/// intersection on its boundary, so testing all candidates covers every
/// combinatorially distinct direction. Returns the first success.
pub fn find_shelling_direction(t: &SphereTriangulation, tol: Tolerance) -> Result<Vec3> {
    let mut normals: Vec<Vec3> = Vec::new();
    for &(i, j) in t.edges() {
        let n = t.vertex(i).cross(t.vertex(j));
        let len = n.norm();
        if len <= tol.rel * t.vertex(i).norm() * t.vertex(j).norm() {
            continue;
        }
        let mut u = n / len;
        if u
            .iter()
            .find(|c| c.abs() > 1e-12)
            .is_some_and(|c| *c < 0.0)
        {
            u = -u;
        }
        if normals.iter().all(|m| m.dot(&u) < 1.0 - 1e-9) {
            normals.push(u);
        }
    }
    let delta = (10.0 * tol.rel).max(1e-6);
    let mut attempts = 0;
    for a in 0..normals.len() {
        for b in a + 1..normals.len() {
            let axis = normals[a].cross(&normals[b]);
            if axis.norm() <= 1e-12 {
                continue;
            }
            for crossing in [axis, -axis] {
                let v = crossing.normalize();
                let t1 = normals[a].cross(&v).normalize();
                let t2 = normals[b].cross(&v).normalize();
                for s1 in [1.0, -1.0] {
                    for s2 in [1.0, -1.0] {
                        let mut d = delta;
                        // A candidate landing non-generically gets one retry
                        // closer to the arrangement vertex.
                        for _ in 0..2 {
                            let cand = (v + t1 * (s1 * d) + t2 * (s2 * d)).normalize();
                            attempts += 1;
                            match is_shellable(t, &cand, tol) {
                                Ok(true) => return Ok(cand),
                                Ok(false) => break,
                                Err(Error::DegenerateDirection(_)) => d /= 10.0,
                                Err(e) => return Err(e),
                            }
                        }
                    }
                }
            }
        }
    }
    Err(Error::NoDirectionFound { attempts })
}

fn has_directed_cycle(adj: &[Vec<usize>]) -> bool {
    // Iterative three-color depth-first search.
    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;
    let mut color = vec![WHITE; adj.len()];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for root in 0..adj.len() {
        if color[root] != WHITE {
            continue;
        }
        color[root] = GRAY;
        stack.push((root, 0));
        while let Some(frame) = stack.last_mut() {
            let v = frame.0;
            if frame.1 < adj[v].len() {
                let w = adj[v][frame.1];
                frame.1 += 1;
                match color[w] {
                    WHITE => {
                        color[w] = GRAY;
                        stack.push((w, 0));
                    }
                    GRAY => return true,
                    _ => {}
                }
            } else {
                color[v] = BLACK;
                stack.pop();
            }
        }
    }
    false
}

fn strongly_connected_component_count(adj: &[Vec<usize>]) -> usize {
    // Iterative Tarjan.
    const UNSET: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSET; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut frames: Vec<(usize, usize)> = Vec::new();
    let mut next = 0;
    let mut count = 0;
    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        frames.push((root, 0));
        while let Some(frame) = frames.last_mut() {
            let v = frame.0;
            if frame.1 < adj[v].len() {
                let w = adj[v][frame.1];
                frame.1 += 1;
                if index[w] == UNSET {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if low[v] == index[v] {
                    count += 1;
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        if w == v {
                            break;
                        }
                    }
                }
                if let Some(parent) = frames.last() {
                    let u = parent.0;
                    low[u] = low[u].min(low[v]);
                }
            }
        }
    }
    count
}

/// Kahn's algorithm; `first`, when given, must have in-degree 0 and is
/// emitted before any other source.
fn kahn_topological_order(adj: &[Vec<usize>], first: Option<usize>) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut in_degree = vec![0usize; n];
    for out in adj {
        for &w in out {
            in_degree[w] += 1;
        }
    }
    let mut queue: VecDeque<usize> = VecDeque::new();
    if let Some(f) = first {
        if in_degree[f] != 0 {
            return None;
        }
        queue.push_back(f);
    }
    for v in 0..n {
        if in_degree[v] == 0 && first != Some(v) {
            queue.push_back(v);
        }
    }
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &adj[v] {
            in_degree[w] -= 1;
            if in_degree[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    (order.len() == n).then_some(order)
}

fn reachable_from(adj: &[Vec<usize>], sources: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for s in sources {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{
        equatorial_rotor, jessen_twist_angle, octahedron, random_coherent, refine_along_seam,
        schonhardt, shaddock, ugly_flip_family, Pose, TwistParams,
    };
    use crate::sphere::{east_of, random_direction, random_rotation};
    use crate::triangulation::FaceLabel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    const TOL: Tolerance = Tolerance { rel: 1e-9 };
    const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    #[test]
    fn octahedron_is_shellable_every_method() {
        let t = octahedron();
        for method in ALL_METHODS {
            assert!(is_shellable_by(&t, &Z, method, TOL).unwrap(), "{method:?}");
        }
        assert!(is_shellable(&t, &Z, TOL).unwrap());
    }

    #[test]
    fn down_dual_degree_profile() {
        for t in [octahedron(), random_coherent(30, 7).unwrap()] {
            let class = t.classify_faces(&Z, TOL).unwrap();
            let view = build_view(&t, &Z, ViewKind::DownDual, TOL).unwrap();
            let mut out = vec![0usize; view.node_count];
            let mut inc = vec![0usize; view.node_count];
            for &(f, g) in &view.edges {
                out[f] += 1;
                inc[g] += 1;
            }
            for f in 0..view.node_count {
                let want = match class.labels[f] {
                    FaceLabel::North => (3, 0),
                    FaceLabel::Down => (2, 1),
                    FaceLabel::Up => (1, 2),
                    FaceLabel::South => (0, 3),
                };
                assert_eq!((out[f], inc[f]), want, "face {f} {:?}", class.labels[f]);
            }
        }
    }

    #[test]
    fn views_match_classification_on_generic_input() {
        let t = random_coherent(25, 3).unwrap();
        let class = t.classify_faces(&Z, TOL).unwrap();
        let dual = build_view(&t, &Z, ViewKind::DownDual, TOL).unwrap();
        let from_class: std::collections::HashSet<_> = class.dual_edges.iter().copied().collect();
        let from_view: std::collections::HashSet<_> = dual.edges.iter().copied().collect();
        assert_eq!(from_class, from_view);
    }

    #[test]
    fn oriented_primal_is_dual_of_down_dual() {
        let t = random_coherent(25, 3).unwrap();
        let primal = build_view(&t, &Z, ViewKind::OrientedPrimal, TOL).unwrap();
        let dual = build_view(&t, &Z, ViewKind::DownDual, TOL).unwrap();
        let dual_set: std::collections::HashSet<_> = dual.edges.iter().copied().collect();
        assert_eq!(primal.edges.len(), t.edges().len());
        for &(i, j) in &primal.edges {
            // The dart i -> j has its left face north of its right face.
            let f = t.face_left_of(i, j).unwrap();
            let g = t.face_left_of(j, i).unwrap();
            assert!(dual_set.contains(&(f, g)), "edge ({i},{j})");
            // Direction agrees with the z-axis east predicate.
            assert_eq!(east_of(t.vertex(i), t.vertex(j), TOL), 1);
        }
    }

    #[test]
    fn leg_graph_has_two_legs_per_down_face() {
        let t = random_coherent(40, 11).unwrap();
        let class = t.classify_faces(&Z, TOL).unwrap();
        let view = build_view(&t, &Z, ViewKind::LegGraph, TOL).unwrap();
        assert_eq!(view.edges.len(), 2 * (t.n() - 3));
        let apexes: std::collections::HashSet<_> = class
            .down_faces()
            .map(|f| class.apex[f].unwrap())
            .collect();
        for &(_, head) in &view.edges {
            assert!(apexes.contains(&head));
        }
    }

    #[test]
    fn seam_edges_are_two_way_and_dropped_from_dual() {
        // Rotating the twisted prism a quarter turn about x leaves one bottom
        // edge exactly on a longitude.
        let t = schonhardt(&TwistParams {
            theta: 0.4,
            pose: Pose::RotatedX90,
        })
        .unwrap();
        let vertical: Vec<(usize, usize)> = t
            .edges()
            .iter()
            .copied()
            .filter(|&(i, j)| vol_sign(&Z, t.vertex(i), t.vertex(j), TOL) == 0)
            .collect();
        assert_eq!(vertical, vec![(1, 2)]);
        let primal = build_view(&t, &Z, ViewKind::OrientedPrimal, TOL).unwrap();
        assert_eq!(primal.edges.len(), t.edges().len() + 1);
        assert!(primal.edges.contains(&(1, 2)) && primal.edges.contains(&(2, 1)));
        let dual = build_view(&t, &Z, ViewKind::DownDual, TOL).unwrap();
        assert_eq!(dual.edges.len(), t.edges().len() - 1);
        let legs = build_view(&t, &Z, ViewKind::LegGraph, TOL).unwrap();
        for &(tail, head) in &legs.edges {
            assert!((tail, head) != (1, 2) && (tail, head) != (2, 1));
        }
        // The two faces flanking the seam edge are not down faces.
        assert_eq!(legs.edges.len(), 2 * (t.n() - 3) - 2);
    }

    #[test]
    fn positive_schonhardt_is_not_shellable_but_rotated_is() {
        let t = schonhardt(&TwistParams::standard(0.4)).unwrap();
        for method in ALL_METHODS {
            assert!(!is_shellable_by(&t, &Z, method, TOL).unwrap(), "{method:?}");
        }
        assert!(matches!(
            shelling_order(&t, &Z, TOL),
            Err(Error::NotShellable)
        ));
        let rotated = schonhardt(&TwistParams {
            theta: 0.4,
            pose: Pose::RotatedX90,
        })
        .unwrap();
        assert!(is_shellable(&rotated, &Z, TOL).unwrap());
    }

    #[test]
    fn coherent_schonhardt_is_shellable() {
        let t = schonhardt(&TwistParams::standard(-0.3)).unwrap();
        assert!(is_shellable(&t, &Z, TOL).unwrap());
    }

    #[test]
    fn jessen_shaddock_is_not_shellable_at_standard_pose() {
        let t = shaddock(jessen_twist_angle()).unwrap();
        assert!(!is_shellable(&t, &Z, TOL).unwrap());
    }

    #[test]
    fn shelling_order_of_octahedron_certifies() {
        let t = octahedron();
        let order = shelling_order(&t, &Z, TOL).unwrap();
        assert_eq!(order.len(), 8);
        let class = t.classify_faces(&Z, TOL).unwrap();
        assert_eq!(order.faces()[0], class.north);
        assert!(verify_shelling_order(&t, &Z, &order, TOL).unwrap());
    }

    #[test]
    fn shelling_orders_of_random_hulls_certify() {
        for seed in 0..25 {
            let n = 6 + (seed as usize * 5) % 35;
            let t = random_coherent(n, seed).unwrap();
            let order = shelling_order(&t, &Z, TOL).unwrap();
            assert!(
                verify_shelling_order(&t, &Z, &order, TOL).unwrap(),
                "seed {seed}"
            );
            // A deliberately corrupted order fails the certificate.
            let mut bad = order.clone();
            bad.faces.swap(0, order.len() - 1);
            assert!(!verify_shelling_order(&t, &Z, &bad, TOL).unwrap());
        }
    }

    #[test]
    fn methods_agree_on_ugly_meshes_and_random_poles() {
        let mut rng = ChaCha20Rng::seed_from_u64(99);
        for seed in 0..12 {
            let t = ugly_flip_family(16, seed).unwrap();
            for _ in 0..6 {
                let pole = random_direction(&mut rng);
                // Unanimity is checked inside is_shellable.
                match is_shellable(&t, &pole, TOL) {
                    Ok(_) => {}
                    Err(Error::DegenerateDirection(_)) => {}
                    Err(e) => panic!("seed {seed}: {e}"),
                }
            }
        }
    }

    #[test]
    fn reversal_and_rotation_symmetry() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let cases = [
            schonhardt(&TwistParams::standard(0.4)).unwrap(),
            shaddock(0.2).unwrap(),
            random_coherent(20, 2).unwrap(),
            ugly_flip_family(14, 8).unwrap(),
        ];
        for t in &cases {
            for _ in 0..5 {
                let pole = random_direction(&mut rng);
                let Ok(fwd) = is_shellable(t, &pole, TOL) else {
                    continue;
                };
                assert_eq!(fwd, is_shellable(t, &(-pole), TOL).unwrap());
                let rot = random_rotation(&mut rng);
                assert_eq!(
                    fwd,
                    is_shellable(&t.rotated(&rot), &(rot * pole), TOL).unwrap()
                );
            }
        }
    }

    #[test]
    fn rotor_blocks_its_axis() {
        let rotor = equatorial_rotor(10, 0.05).unwrap();
        let t = &rotor.triangulation;
        for method in ALL_METHODS {
            assert!(!is_shellable_by(t, &rotor.axis, method, TOL).unwrap());
        }
        // The axis lies in the polar region of the belt cycle: every dual
        // dart of consecutive belt faces keeps the axis on its west side.
        let len = rotor.belt_faces.len();
        for k in 0..len {
            let (f, g) = (rotor.belt_faces[k], rotor.belt_faces[(k + 1) % len]);
            let tri = t.face(f);
            let dart = (0..3)
                .map(|e| (tri[e], tri[(e + 1) % 3]))
                .find(|&(i, j)| t.face_left_of(j, i) == Some(g))
                .expect("consecutive belt faces share an edge");
            assert!(dart_hemisphere_contains(t, dart.0, dart.1, &rotor.axis, TOL));
        }
    }

    #[test]
    fn refined_schonhardt_becomes_shellable() {
        let t = schonhardt(&TwistParams::standard(0.4)).unwrap();
        assert!(!is_shellable(&t, &Z, TOL).unwrap());
        let class = t.classify_faces(&Z, TOL).unwrap();
        let v = t.face(class.north)[0];
        let (refined, _) = refine_along_seam(&t, &Z, v, TOL).unwrap();
        assert!(is_shellable(&refined, &Z, TOL).unwrap());
        let order = shelling_order(&refined, &Z, TOL).unwrap();
        assert!(verify_shelling_order(&refined, &Z, &order, TOL).unwrap());
    }

    #[test]
    fn refined_rotor_unblocks_its_axis() {
        let rotor = equatorial_rotor(10, 0.05).unwrap();
        let t = &rotor.triangulation;
        assert!(!is_shellable(t, &rotor.axis, TOL).unwrap());
        let class = t.classify_faces(&rotor.axis, TOL).unwrap();
        for &v in &t.face(class.north) {
            let (refined, _) = refine_along_seam(t, &rotor.axis, v, TOL).unwrap();
            assert!(
                is_shellable(&refined, &rotor.axis, TOL).unwrap(),
                "vertex {v}"
            );
        }
    }

    #[test]
    fn refining_any_unshellable_pole_heals_it() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let mut healed = 0;
        for seed in 0..8 {
            let t = ugly_flip_family(16, 100 + seed).unwrap();
            for _ in 0..40 {
                let pole = random_direction(&mut rng);
                if !matches!(is_shellable(&t, &pole, TOL), Ok(false)) {
                    continue;
                }
                let class = t.classify_faces(&pole, TOL).unwrap();
                let v = t.face(class.north)[0];
                let (refined, _) = refine_along_seam(&t, &pole, v, TOL).unwrap();
                assert!(is_shellable(&refined, &pole, TOL).unwrap(), "seed {seed}");
                healed += 1;
                break;
            }
        }
        assert!(healed >= 3, "too few unshellable poles sampled: {healed}");
    }

    #[test]
    fn refined_octahedron_chord_through_pole_is_degenerate() {
        // Antipodal symmetry puts the south-face chord of the refinement
        // exactly through the south pole.
        let t = octahedron();
        let class = t.classify_faces(&Z, TOL).unwrap();
        let v = t.face(class.north)[0];
        let (refined, _) = refine_along_seam(&t, &Z, v, TOL).unwrap();
        assert!(matches!(
            is_shellable(&refined, &Z, TOL),
            Err(Error::DegenerateDirection(_))
        ));
    }

    #[test]
    fn dart_hemisphere_boundary_and_antipode() {
        let t = octahedron();
        let (i, j) = t.edges()[0];
        assert!(!dart_hemisphere_contains(&t, i, j, t.vertex(i), TOL));
        let p = Vec3::new(0.3, -0.5, 0.81).normalize();
        if dart_hemisphere_contains(&t, i, j, &p, TOL) {
            assert!(!dart_hemisphere_contains(&t, i, j, &(-p), TOL));
        }
    }

    #[test]
    fn finds_direction_for_twisted_schonhardt() {
        let t = schonhardt(&TwistParams::standard(0.4)).unwrap();
        let dir = find_shelling_direction(&t, TOL).unwrap();
        assert!(is_shellable(&t, &dir, TOL).unwrap());
        assert!((dir.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finds_direction_for_random_hulls_and_rotor() {
        for seed in [1, 2, 3] {
            let t = random_coherent(12, seed).unwrap();
            let dir = find_shelling_direction(&t, TOL).unwrap();
            assert!(is_shellable(&t, &dir, TOL).unwrap());
        }
        let rotor = equatorial_rotor(8, 0.05).unwrap();
        let dir = find_shelling_direction(&rotor.triangulation, TOL).unwrap();
        assert!(is_shellable(&rotor.triangulation, &dir, TOL).unwrap());
    }

    #[test]
    fn candidate_sweep_matches_random_sampling() {
        // If random sampling finds any shellable direction, the arrangement
        // sweep must find one too.
        let mut rng = ChaCha20Rng::seed_from_u64(42);
        let cases = [
            octahedron(),
            schonhardt(&TwistParams::standard(0.4)).unwrap(),
            shaddock(jessen_twist_angle()).unwrap(),
        ];
        for t in &cases {
            let mut sampled_any = false;
            for _ in 0..20_000 {
                let pole = random_direction(&mut rng);
                if let Ok(true) = is_shellable_by(t, &pole, ShellMethod::DualAcyclic, TOL) {
                    sampled_any = true;
                    break;
                }
            }
            if sampled_any {
                assert!(find_shelling_direction(t, TOL).is_ok());
            }
        }
    }
}

//! The triangulation data model: combinatorial structure with spherical
//! vertex coordinates, validity and genericity checking, and the
//! pole-relative classification of faces into north, south, up, and down.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::sphere::{vol, vol_sign, Tolerance, Vec3};
use crate::{Error, Result, Violation};

fn violation(msg: impl Into<String>) -> Violation {
    Violation {
        message: msg.into(),
    }
}

/// A triangulation of the sphere by geodesic arcs.
///
/// Vertices are nonzero homogeneous vectors; faces are vertex triples listed
/// counterclockwise as seen from outside the sphere, so every face determinant
/// is positive, except that a single face may be everted (area above half the
/// sphere) and then appears with negative determinant.
///
/// The structure is immutable after construction; mutating operations return
/// new values.
#[derive(Debug, Clone)]
pub struct SphereTriangulation {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    dart_face: HashMap<(usize, usize), usize>,
    vertex_faces: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl SphereTriangulation {
    pub fn from_parts(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        Self::from_parts_with_tol(vertices, faces, Tolerance::default())
    }

    pub fn from_parts_with_tol(
        vertices: Vec<Vec3>,
        faces: Vec<[usize; 3]>,
        tol: Tolerance,
    ) -> Result<Self> {
        let violations = validate_parts(&vertices, &faces, tol);
        if !violations.is_empty() {
            return Err(Error::InvalidTriangulation(violations));
        }
        let mut dart_face = HashMap::new();
        let mut vertex_faces = vec![Vec::new(); vertices.len()];
        for (fi, face) in faces.iter().enumerate() {
            for e in 0..3 {
                dart_face.insert((face[e], face[(e + 1) % 3]), fi);
            }
            for &v in face {
                vertex_faces[v].push(fi);
            }
        }
        let mut edges: Vec<(usize, usize)> = dart_face
            .keys()
            .filter(|&&(i, j)| i < j)
            .copied()
            .collect();
        edges.sort_unstable();
        Ok(SphereTriangulation {
            vertices,
            faces,
            dart_face,
            vertex_faces,
            edges,
        })
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Vec3 {
        &self.vertices[i]
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> [usize; 3] {
        self.faces[f]
    }

    /// Undirected edges as ordered pairs (i, j) with i < j, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn contains_edge(&self, i: usize, j: usize) -> bool {
        self.dart_face.contains_key(&(i, j))
    }

    /// The face with dart i->j on its boundary (the face to the dart's left).
    pub fn face_left_of(&self, i: usize, j: usize) -> Option<usize> {
        self.dart_face.get(&(i, j)).copied()
    }

    /// Faces incident to vertex `i`, in construction order.
    pub fn faces_at_vertex(&self, i: usize) -> &[usize] {
        &self.vertex_faces[i]
    }

    /// The vertex of face `f` that is not `i` or `j`.
    pub fn third_vertex(&self, f: usize, i: usize, j: usize) -> usize {
        *self.faces[f]
            .iter()
            .find(|&&v| v != i && v != j)
            .expect("dart not on face")
    }

    /// Same combinatorics with new vertex coordinates; revalidates.
    pub fn with_vertices(&self, vertices: Vec<Vec3>) -> Result<Self> {
        Self::from_parts(vertices, self.faces.clone())
    }

    /// Image under a rotation: all vertices rotated, same face triples.
    pub fn rotated(&self, r: &nalgebra::Rotation3<f64>) -> Self {
        let vertices = self.vertices.iter().map(|v| r * v).collect();
        self.with_vertices(vertices)
            .expect("rotation preserves validity")
    }

    /// Renames vertex i to perm[i] (perm must be a permutation of 0..n).
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidInput("not a permutation".into()));
        }
        let mut vertices = vec![Vec3::zeros(); n];
        for (i, &p) in perm.iter().enumerate() {
            vertices[p] = self.vertices[i];
        }
        let faces = self
            .faces
            .iter()
            .map(|f| [perm[f[0]], perm[f[1]], perm[f[2]]])
            .collect();
        Self::from_parts(vertices, faces)
    }

    /// Largest normalized 4-point orientation value over all edges. Negative
    /// means the homogeneous vectors are the vertices of a convex polyhedron
    /// whose boundary complex is exactly this triangulation.
    pub fn convex_edge_defect(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for &(i, j) in &self.edges {
            let k = self.third_vertex(self.dart_face[&(i, j)], i, j);
            let l = self.third_vertex(self.dart_face[&(j, i)], i, j);
            let a = self.vertices[j] - self.vertices[i];
            let b = self.vertices[k] - self.vertices[i];
            let c = self.vertices[l] - self.vertices[i];
            let scale = a.norm() * b.norm() * c.norm();
            if scale == 0.0 {
                return f64::INFINITY;
            }
            worst = worst.max(vol(&a, &b, &c) / scale);
        }
        worst
    }

    /// Whether the homogeneous vectors are in strictly convex position with
    /// this triangulation as the hull's boundary complex.
    pub fn is_convex_position(&self, tol: Tolerance) -> bool {
        self.convex_edge_defect() < -tol.rel
    }

    /// Classification of every face relative to `pole`.
    ///
    /// Across each dart i->j (left face f, right face g) the dual digraph gets
    /// the edge f->g exactly when vol(pole, i, j) > 0. Dual in-degree then
    /// labels the face: 0 north, 1 down, 2 up, 3 south.
    pub fn classify_faces(&self, pole: &Vec3, tol: Tolerance) -> Result<FaceClassification> {
        let nf = self.faces.len();
        let n = self.n();
        let mut in_deg = vec![0usize; nf];
        // incoming[f] / outgoing[f]: dart positions within face f whose dual
        // edge points into / out of f. Dart e of face (a,b,c) is (f[e], f[e+1]).
        let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); nf];
        let mut dual_edges = Vec::with_capacity(self.edges.len());
        for (fi, face) in self.faces.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = (face[e], face[(e + 1) % 3]);
                let s = vol_sign(pole, &self.vertices[a], &self.vertices[b], tol);
                if s == 0 {
                    return Err(Error::DegenerateDirection(format!(
                        "pole is coplanar with edge ({a}, {b})"
                    )));
                }
                if s > 0 {
                    // Dual edge leaves fi across this dart.
                    dual_edges.push((fi, self.dart_face[&(b, a)]));
                } else {
                    in_deg[fi] += 1;
                    incoming[fi].push(e);
                }
            }
        }

        let mut labels = vec![FaceLabel::Down; nf];
        let mut north = None;
        let mut south = None;
        let (mut downs, mut ups) = (0usize, 0usize);
        for f in 0..nf {
            labels[f] = match in_deg[f] {
                0 => {
                    if north.replace(f).is_some() {
                        return Err(Error::DegenerateDirection(
                            "more than one face with dual in-degree 0".into(),
                        ));
                    }
                    FaceLabel::North
                }
                1 => {
                    downs += 1;
                    FaceLabel::Down
                }
                2 => {
                    ups += 1;
                    FaceLabel::Up
                }
                3 => {
                    if south.replace(f).is_some() {
                        return Err(Error::DegenerateDirection(
                            "more than one face with dual in-degree 3".into(),
                        ));
                    }
                    FaceLabel::South
                }
                _ => unreachable!(),
            };
        }
        let (north, south) = match (north, south) {
            (Some(n), Some(s)) => (n, s),
            _ => {
                return Err(Error::DegenerateDirection(
                    "no north or no south face".into(),
                ))
            }
        };
        if downs != n - 3 || ups != n - 3 {
            return Err(Error::DegenerateDirection(format!(
                "expected {} down and up faces, found {downs} down / {ups} up",
                n - 3
            )));
        }

        // Base edge: a down-face's single incoming dual edge crosses it, an
        // up-face's single outgoing one (the dart position not in incoming).
        let mut apex = vec![None; nf];
        let mut base = vec![None; nf];
        for f in 0..nf {
            let e = match labels[f] {
                FaceLabel::Down => incoming[f][0],
                FaceLabel::Up => (0..3).find(|e| !incoming[f].contains(e)).unwrap(),
                _ => continue,
            };
            let t = self.faces[f];
            base[f] = Some((t[e], t[(e + 1) % 3]));
            apex[f] = Some(t[(e + 2) % 3]);
        }

        // f-up of a vertex: the down face whose apex it is, or the north face
        // for north-face vertices; this must come out a clean bijection, and
        // symmetrically below. Anything else means the pose is degenerate.
        let face_above = assign_polar_map(n, nf, &labels, &apex, FaceLabel::Down, north, self)?;
        let face_below = assign_polar_map(n, nf, &labels, &apex, FaceLabel::Up, south, self)?;

        Ok(FaceClassification {
            pole: *pole,
            labels,
            north,
            south,
            apex,
            base,
            face_above,
            face_below,
            dual_edges,
        })
    }

    /// Exhaustive genericity report relative to `pole`: antipodal edges, any
    /// three vertices on a common great circle (all O(n^3) triples), any two
    /// vertices on a common longitude through the poles, vertices at a pole.
    pub fn genericity(&self, pole: &Vec3, tol: Tolerance) -> GenericityReport {
        let mut report = self.genericity_pairs(pole, tol);
        let n = self.n();
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    if vol_sign(&self.vertices[i], &self.vertices[j], &self.vertices[k], tol) == 0
                    {
                        report.coplanar_triples.push((i, j, k));
                    }
                }
            }
        }
        report
    }

    /// Like [`genericity`](Self::genericity) but checking only `samples`
    /// seeded random triples for the cubic condition; pairwise conditions stay
    /// exhaustive.
    pub fn genericity_sampled(
        &self,
        pole: &Vec3,
        tol: Tolerance,
        samples: usize,
        seed: u64,
    ) -> GenericityReport {
        use rand::{Rng, SeedableRng};
        let mut report = self.genericity_pairs(pole, tol);
        report.sampled = true;
        let n = self.n();
        if n < 3 {
            return report;
        }
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            let k = rng.gen_range(0..n);
            if i == j || j == k || i == k {
                continue;
            }
            if vol_sign(&self.vertices[i], &self.vertices[j], &self.vertices[k], tol) == 0 {
                report.coplanar_triples.push((i, j, k));
            }
        }
        report
    }

    fn genericity_pairs(&self, pole: &Vec3, tol: Tolerance) -> GenericityReport {
        let mut report = GenericityReport::default();
        for &(i, j) in &self.edges {
            let (a, b) = (&self.vertices[i], &self.vertices[j]);
            if a.cross(b).norm() <= tol.rel * a.norm() * b.norm() && a.dot(b) < 0.0 {
                report.antipodal_edges.push((i, j));
            }
        }
        let n = self.n();
        for i in 0..n {
            let v = &self.vertices[i];
            if v.cross(pole).norm() <= tol.rel * v.norm() * pole.norm() {
                report.vertices_at_pole.push(i);
            }
            for j in (i + 1)..n {
                if vol_sign(pole, v, &self.vertices[j], tol) == 0 {
                    report.shared_longitude_pairs.push((i, j));
                }
            }
        }
        report
    }

    /// Replaces edge ij (faces (i,j,k) and (j,i,l)) by edge kl when the union
    /// of the two faces is convex, i.e. both replacement faces (i,l,k) and
    /// (j,k,l) are positively oriented.
    pub fn flip_edge(&self, i: usize, j: usize, tol: Tolerance) -> Result<Self> {
        let (f, g) = match (self.face_left_of(i, j), self.face_left_of(j, i)) {
            (Some(f), Some(g)) => (f, g),
            _ => return Err(Error::NotFlippable(format!("({i}, {j}) is not an edge"))),
        };
        let k = self.third_vertex(f, i, j);
        let l = self.third_vertex(g, i, j);
        if self.contains_edge(k, l) {
            return Err(Error::NotFlippable(format!(
                "replacement edge ({k}, {l}) already present"
            )));
        }
        let (vi, vj, vk, vl) = (
            &self.vertices[i],
            &self.vertices[j],
            &self.vertices[k],
            &self.vertices[l],
        );
        if vol_sign(vi, vl, vk, tol) != 1 || vol_sign(vj, vk, vl, tol) != 1 {
            return Err(Error::NotFlippable(
                "union of incident faces is not convex".into(),
            ));
        }
        let mut faces = self.faces.clone();
        faces[f] = [i, l, k];
        faces[g] = [j, k, l];
        Self::from_parts(self.vertices.clone(), faces)
    }

    pub fn to_json_string(&self) -> String {
        let file = TriangulationFile {
            version: 1,
            vertices: self.vertices.iter().map(|v| [v.x, v.y, v.z]).collect(),
            faces: self.faces.clone(),
        };
        serde_json::to_string_pretty(&file).expect("serialization cannot fail")
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_json_string().as_bytes())?;
        Ok(())
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        let file: TriangulationFile = serde_json::from_reader(r)?;
        if file.version != 1 {
            return Err(Error::InvalidInput(format!(
                "unsupported triangulation file version {}",
                file.version
            )));
        }
        let vertices = file
            .vertices
            .into_iter()
            .map(|[x, y, z]| Vec3::new(x, y, z))
            .collect();
        Self::from_parts(vertices, file.faces)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::read_json(s.as_bytes())
    }
}

/// On-disk format, version 1. Indices are 0-based; faces are counterclockwise
/// seen from outside the sphere.
#[derive(Serialize, Deserialize)]
struct TriangulationFile {
    version: u32,
    vertices: Vec<[f64; 3]>,
    faces: Vec<[usize; 3]>,
}

fn assign_polar_map(
    n: usize,
    nf: usize,
    labels: &[FaceLabel],
    apex: &[Option<usize>],
    wanted: FaceLabel,
    polar_face: usize,
    t: &SphereTriangulation,
) -> Result<Vec<usize>> {
    let mut map = vec![usize::MAX; n];
    for &v in &t.faces[polar_face] {
        map[v] = polar_face;
    }
    for f in 0..nf {
        if labels[f] == wanted {
            let a = apex[f].unwrap();
            if map[a] != usize::MAX {
                return Err(Error::DegenerateDirection(format!(
                    "vertex {a} is the apex of two faces on the same side"
                )));
            }
            map[a] = f;
        }
    }
    if let Some(v) = map.iter().position(|&f| f == usize::MAX) {
        return Err(Error::DegenerateDirection(format!(
            "vertex {v} has no face assigned on one side"
        )));
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceLabel {
    North,
    South,
    Up,
    Down,
}

/// Pole-relative roles of all faces, plus the vertex-to-face maps used by
/// shelling and sinking.
#[derive(Debug, Clone)]
pub struct FaceClassification {
    pub pole: Vec3,
    pub labels: Vec<FaceLabel>,
    pub north: usize,
    pub south: usize,
    /// Per face: the vertex opposite the base edge (polar faces: None).
    pub apex: Vec<Option<usize>>,
    /// Per face: the base edge as a dart of that face (polar faces: None).
    /// For a down face the dual edge enters across it; for an up face it
    /// leaves across it.
    pub base: Vec<Option<(usize, usize)>>,
    /// Per vertex: the down face with this apex, or the north face for
    /// vertices of the north face.
    pub face_above: Vec<usize>,
    /// Per vertex: the up face with this apex, or the south face.
    pub face_below: Vec<usize>,
    /// All dual edges f -> g (one per undirected edge).
    pub dual_edges: Vec<(usize, usize)>,
}

impl FaceClassification {
    pub fn down_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.labels.len()).filter(|&f| self.labels[f] == FaceLabel::Down)
    }

    pub fn up_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.labels.len()).filter(|&f| self.labels[f] == FaceLabel::Up)
    }

    /// The two non-base edges of a non-polar face, each as (apex, base vertex).
    pub fn legs(&self, f: usize) -> Option<[(usize, usize); 2]> {
        let (u, w) = self.base[f]?;
        let a = self.apex[f]?;
        Some([(a, u), (a, w)])
    }
}

/// Genericity conditions relative to a pole. Empty lists mean the
/// triangulation is generic for that pole.
#[derive(Debug, Clone, Default)]
pub struct GenericityReport {
    /// Edges whose endpoints are antipodalic (condition: no edge joins
    /// antipodal points).
    pub antipodal_edges: Vec<(usize, usize)>,
    /// Vertex triples on a common great circle.
    pub coplanar_triples: Vec<(usize, usize, usize)>,
    /// Vertex pairs on a common longitude semicircle through the poles.
    pub shared_longitude_pairs: Vec<(usize, usize)>,
    /// Vertices on the polar axis itself.
    pub vertices_at_pole: Vec<usize>,
    /// Whether the triple check was sampled rather than exhaustive.
    pub sampled: bool,
}

impl GenericityReport {
    pub fn is_generic(&self) -> bool {
        self.antipodal_edges.is_empty()
            && self.coplanar_triples.is_empty()
            && self.shared_longitude_pairs.is_empty()
            && self.vertices_at_pole.is_empty()
    }
}

/// Full structural and geometric validity check; collects every problem
/// rather than stopping at the first.
pub fn validate_parts(vertices: &[Vec3], faces: &[[usize; 3]], tol: Tolerance) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = vertices.len();
    if n < 4 {
        out.push(violation(format!("need at least 4 vertices, got {n}")));
        return out;
    }
    for (i, v) in vertices.iter().enumerate() {
        if v.norm() == 0.0 || !v.iter().all(|c| c.is_finite()) {
            out.push(violation(format!("vertex {i} is zero or non-finite")));
        }
    }
    if faces.len() != 2 * n - 4 {
        out.push(violation(format!(
            "expected {} faces for {n} vertices, got {}",
            2 * n - 4,
            faces.len()
        )));
    }

    let mut dart_face = HashMap::new();
    let mut structural_ok = true;
    let mut collisions: HashMap<usize, usize> = HashMap::new();
    for (fi, face) in faces.iter().enumerate() {
        if face.iter().any(|&v| v >= n) {
            out.push(violation(format!("face {fi} has an out-of-range vertex")));
            structural_ok = false;
            continue;
        }
        if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
            out.push(violation(format!("face {fi} repeats a vertex")));
            structural_ok = false;
            continue;
        }
        for e in 0..3 {
            let dart = (face[e], face[(e + 1) % 3]);
            if let Some(&other) = dart_face.get(&dart) {
                out.push(violation(format!(
                    "dart {dart:?} appears in more than one face"
                )));
                *collisions.entry(fi).or_insert(0) += 1;
                *collisions.entry(other).or_insert(0) += 1;
                structural_ok = false;
            } else {
                dart_face.insert(dart, fi);
            }
        }
    }
    // A face colliding with two or more neighbors is most likely listed in
    // the wrong orientation; name it.
    for (&fi, &count) in &collisions {
        if count >= 2 {
            out.push(violation(format!(
                "face {fi} appears mis-oriented: {count} of its darts collide with neighbors"
            )));
        }
    }
    if !structural_ok {
        return out;
    }
    for (&(i, j), _) in &dart_face {
        if !dart_face.contains_key(&(j, i)) {
            out.push(violation(format!("dart ({j}, {i}) is missing")));
        }
    }
    let mut degree = vec![0usize; n];
    for &(i, _) in dart_face.keys() {
        degree[i] += 1;
    }
    for (i, &d) in degree.iter().enumerate() {
        if d < 3 {
            out.push(violation(format!("vertex {i} has degree {d} < 3")));
        }
    }
    let edge_count = dart_face.len() / 2;
    if dart_face.len() % 2 == 0 && edge_count != 3 * n - 6 {
        out.push(violation(format!(
            "expected {} edges, got {edge_count}",
            3 * n - 6
        )));
    }
    if !out.is_empty() {
        return out;
    }

    // Dual connectivity: walk faces across shared edges.
    let mut seen = vec![false; faces.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut reached = 1;
    while let Some(f) = stack.pop() {
        let face = faces[f];
        for e in 0..3 {
            let g = dart_face[&(face[(e + 1) % 3], face[e])];
            if !seen[g] {
                seen[g] = true;
                reached += 1;
                stack.push(g);
            }
        }
    }
    if reached != faces.len() {
        out.push(violation(format!(
            "dual graph disconnected: reached {reached} of {} faces",
            faces.len()
        )));
    }

    // Orientation: all faces positive, except that one face may be everted.
    // An everted face is negative, and every other vertex must then lie
    // strictly inside the complementary (reversed) spherical triangle.
    let mut negative = Vec::new();
    for (fi, &[i, j, k]) in faces.iter().enumerate() {
        match vol_sign(&vertices[i], &vertices[j], &vertices[k], tol) {
            1 => {}
            0 => out.push(violation(format!(
                "face {fi} ({i}, {j}, {k}) is degenerate (determinant ~ 0)"
            ))),
            _ => negative.push(fi),
        }
    }
    if negative.len() > 1 {
        for &fi in &negative {
            out.push(violation(format!(
                "face {fi} is negatively oriented and at most one face may be everted"
            )));
        }
    } else if let Some(&fi) = negative.first() {
        let [i, j, k] = faces[fi];
        let inside_complement = |v: &Vec3| {
            vol_sign(v, &vertices[i], &vertices[k], tol) == 1
                && vol_sign(v, &vertices[k], &vertices[j], tol) == 1
                && vol_sign(v, &vertices[j], &vertices[i], tol) == 1
        };
        for (vi, v) in vertices.iter().enumerate() {
            if vi != i && vi != j && vi != k && !inside_complement(v) {
                out.push(violation(format!(
                    "face {fi} is inverted: vertex {vi} is not inside its complement"
                )));
            }
        }
    }
    out
}

/// Orientation-preserving combinatorial isomorphism from `a` onto `b`:
/// a vertex relabeling sending faces of `a` to faces of `b` with matching
/// cyclic order. Returns the vertex map, or None.
pub fn find_isomorphism(a: &SphereTriangulation, b: &SphereTriangulation) -> Option<Vec<usize>> {
    if a.n() != b.n() || a.faces.len() != b.faces.len() {
        return None;
    }
    let seed_a = {
        let f = a.faces[0];
        (f[0], f[1])
    };
    for face in &b.faces {
        for e in 0..3 {
            let seed_b = (face[e], face[(e + 1) % 3]);
            if let Some(map) = try_dart_correspondence(a, b, seed_a, seed_b) {
                return Some(map);
            }
        }
    }
    None
}

/// Grows a dart correspondence from one anchor pair by closing under
/// face-cycle successor and dart reversal; checks the induced vertex map.
fn try_dart_correspondence(
    a: &SphereTriangulation,
    b: &SphereTriangulation,
    seed_a: (usize, usize),
    seed_b: (usize, usize),
) -> Option<Vec<usize>> {
    let next = |t: &SphereTriangulation, (i, j): (usize, usize)| {
        let f = t.faces[t.dart_face[&(i, j)]];
        let e = (0..3).find(|&e| f[e] == i && f[(e + 1) % 3] == j).unwrap();
        (j, f[(e + 2) % 3])
    };
    let mut vertex_map = vec![usize::MAX; a.n()];
    let mut mapped: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    let mut stack = vec![(seed_a, seed_b)];
    while let Some((da, db)) = stack.pop() {
        if let Some(&prev) = mapped.get(&da) {
            if prev != db {
                return None;
            }
            continue;
        }
        for (va, vb) in [(da.0, db.0), (da.1, db.1)] {
            if vertex_map[va] == usize::MAX {
                vertex_map[va] = vb;
            } else if vertex_map[va] != vb {
                return None;
            }
        }
        mapped.insert(da, db);
        stack.push((next(a, da), next(b, db)));
        stack.push(((da.1, da.0), (db.1, db.0)));
    }
    if vertex_map.contains(&usize::MAX) {
        return None;
    }
    let mut seen = vec![false; b.n()];
    for &v in &vertex_map {
        if std::mem::replace(&mut seen[v], true) {
            return None;
        }
    }
    Some(vertex_map)
}

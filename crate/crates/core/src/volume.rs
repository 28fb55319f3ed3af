//! Exact volume of a polytope given by vertices, integer facet normals and
//! vertex-facet incidences.
//!
//! The face lattice is walked by pulling from the first vertex of each face.
//! A face `G` of dimension `d` is measured in the coordinates left free by the
//! reduced echelon form of the normals tight on `G`; a facet `H` of `G` has
//! exactly one fewer free coordinate `j`, and
//! `vol(G) = (1/d) Σ_H ℓ_f(apex) · vol(H) / |⟨v_f, w_j⟩|`
//! where `w_j` is the null-space direction of `G` along `j` and `f` is any
//! facet tight on `H` but not on `G`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::exact::{rref, Bits, R};
use crate::rational::Q;

pub(crate) struct VPolytope<'a> {
    pub dim: usize,
    pub normals: &'a [Vec<i64>],
    pub offsets: &'a [Q],
    pub vertices: &'a [Vec<Q>],
    /// Active facets per vertex.
    pub incidence: &'a [Bits],
}

struct FaceInfo {
    closure: Bits,
    dim: usize,
    free: Vec<usize>,
    null: Vec<Vec<R>>,
}

struct Walker<'a> {
    p: &'a VPolytope<'a>,
    /// Vertices on each facet.
    facet_vertices: Vec<Bits>,
    info: HashMap<Bits, FaceInfo>,
    vol: HashMap<Bits, Q>,
}

fn to_q(r: &R) -> Q {
    Q::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

impl<'a> Walker<'a> {
    fn face_info(&mut self, verts: &Bits) -> &FaceInfo {
        if !self.info.contains_key(verts) {
            let m = self.p.normals.len();
            let mut closure = Bits::full(m);
            for v in verts.iter() {
                closure.and_assign(&self.p.incidence[v]);
            }
            let rows: Vec<&[i64]> = closure.iter().map(|f| self.p.normals[f].as_slice()).collect();
            let e = rref(rows, self.p.dim);
            let free = e.free_cols();
            let null = free.iter().map(|&j| e.null_vector(j)).collect();
            let info = FaceInfo { closure, dim: self.p.dim - e.rank(), free, null };
            self.info.insert(verts.clone(), info);
        }
        &self.info[verts]
    }

    fn volume(&mut self, verts: &Bits) -> Q {
        if let Some(v) = self.vol.get(verts) {
            return v.clone();
        }
        let (closure, dim, free, null) = {
            let fi = self.face_info(verts);
            (fi.closure.clone(), fi.dim, fi.free.clone(), fi.null.clone())
        };
        if dim == 0 {
            let one = Q::from_integer(1.into());
            self.vol.insert(verts.clone(), one.clone());
            return one;
        }
        let apex = verts.first().expect("nonempty face");
        let mut seen: HashMap<Bits, ()> = HashMap::new();
        let mut total = Q::zero();
        for f in 0..self.p.normals.len() {
            if closure.contains(f) || self.p.incidence[apex].contains(f) {
                continue;
            }
            let sub = verts.and(&self.facet_vertices[f]);
            if sub.is_empty() || seen.contains_key(&sub) {
                continue;
            }
            seen.insert(sub.clone(), ());
            let (sub_dim, sub_free) = {
                let fi = self.face_info(&sub);
                (fi.dim, fi.free.clone())
            };
            if sub_dim + 1 != dim {
                continue;
            }
            let pos = free.iter().position(|c| !sub_free.contains(c)).expect("facet drops one free coordinate");
            let g: R = self.p.normals[f].iter().zip(&null[pos]).map(|(&a, w)| R::from_integer(a as i128) * w).sum();
            let a = &self.p.vertices[apex];
            let height: Q = self.p.normals[f].iter().zip(a).map(|(&c, x)| Q::from_integer(c.into()) * x).sum::<Q>()
                - &self.p.offsets[f];
            let sub_vol = self.volume(&sub);
            total += height * sub_vol / to_q(&g).abs();
        }
        let vol = total / Q::from_integer(BigInt::from(dim));
        self.vol.insert(verts.clone(), vol.clone());
        vol
    }
}

/// Volume of the full polytope in its own affine hull, measured in the free
/// coordinates of that hull (the ordinary Euclidean volume when full-dimensional).
pub(crate) fn polytope_volume(p: &VPolytope<'_>) -> Q {
    let nv = p.vertices.len();
    let mut facet_vertices = vec![Bits::empty(nv); p.normals.len()];
    for (v, inc) in p.incidence.iter().enumerate() {
        for f in inc.iter() {
            facet_vertices[f].insert(v);
        }
    }
    let mut w = Walker { p, facet_vertices, info: HashMap::new(), vol: HashMap::new() };
    w.volume(&Bits::full(nv))
}

//! Blobs, reduction, flattening, decorations and blow-up.

use super::multitype::{FlatTree, MultitypeTree};
use super::plane::{PlaneTree, NO_PARENT};
use crate::error::{Error, Result};

fn require_type1_root(t: &MultitypeTree) -> Result<()> {
    if t.root_type() != 0 {
        return Err(Error::RootType {
            found: t.root_type() + 1,
        });
    }
    Ok(())
}

/// For each vertex, its nearest strict ancestor of type 0 (`NO_PARENT` at the
/// root).
fn nearest_type1_ancestor(t: &MultitypeTree) -> Vec<u32> {
    let shape = t.shape();
    let mut anc = vec![NO_PARENT; t.len()];
    for v in 1..t.len() {
        let p = shape.parents()[v];
        anc[v] = if t.types()[p as usize] == 0 {
            p
        } else {
            anc[p as usize]
        };
    }
    anc
}

/// Blob decomposition. Each type-0 vertex roots one blob; each other vertex
/// belongs to the blob of its nearest type-0 ancestor. Type-0 vertices also sit
/// on the frontier of their parent blob, exposed through [`Blobs::frontier`].
#[derive(Clone, Debug)]
pub struct Blobs {
    /// Blob root owning each vertex.
    pub owner: Vec<u32>,
    roots: Vec<u32>,
    frontier_start: Vec<u32>,
    frontier: Vec<u32>,
    size: Vec<u32>,
}

impl Blobs {
    /// Type-0 vertices in preorder; blob `r` is rooted at `roots()[r]`.
    pub fn roots(&self) -> &[u32] {
        &self.roots
    }

    /// Type-0 vertices on the frontier of blob `r`, in lexicographic order.
    pub fn frontier(&self, r: usize) -> &[u32] {
        &self.frontier[self.frontier_start[r] as usize..self.frontier_start[r + 1] as usize]
    }

    /// Number of owned vertices of blob `r` (root plus non-type-0 members).
    pub fn size(&self, r: usize) -> usize {
        self.size[r] as usize
    }

    pub fn max_size(&self) -> usize {
        self.size.iter().copied().max().unwrap_or(0) as usize
    }
}

pub fn blobs(t: &MultitypeTree) -> Result<Blobs> {
    require_type1_root(t)?;
    let n = t.len();
    let anc = nearest_type1_ancestor(t);
    let mut rank = vec![NO_PARENT; n];
    let mut roots = Vec::new();
    for v in 0..n {
        if t.types()[v] == 0 {
            rank[v] = roots.len() as u32;
            roots.push(v as u32);
        }
    }
    let b = roots.len();
    let mut owner = vec![0u32; n];
    let mut size = vec![1u32; b];
    let mut frontier_start = vec![0u32; b + 1];
    for v in 0..n {
        if t.types()[v] == 0 {
            owner[v] = v as u32;
            if v > 0 {
                frontier_start[rank[anc[v] as usize] as usize + 1] += 1;
            }
        } else {
            owner[v] = anc[v];
            size[rank[anc[v] as usize] as usize] += 1;
        }
    }
    for r in 0..b {
        frontier_start[r + 1] += frontier_start[r];
    }
    let mut fill = frontier_start.clone();
    let mut frontier = vec![0u32; frontier_start[b] as usize];
    for v in 1..n {
        if t.types()[v] == 0 {
            let r = rank[anc[v] as usize] as usize;
            frontier[fill[r] as usize] = v as u32;
            fill[r] += 1;
        }
    }
    Ok(Blobs {
        owner,
        roots,
        frontier_start,
        frontier,
        size,
    })
}

/// The monotype tree on type-0 vertices, each attached to its nearest type-0
/// strict ancestor, in inherited lexicographic order.
pub fn reduce(t: &MultitypeTree) -> Result<PlaneTree> {
    require_type1_root(t)?;
    let anc = nearest_type1_ancestor(t);
    let mut rank = vec![NO_PARENT; t.len()];
    let mut parent = Vec::new();
    for v in 0..t.len() {
        if t.types()[v] == 0 {
            rank[v] = parent.len() as u32;
            parent.push(if v == 0 {
                NO_PARENT
            } else {
                rank[anc[v] as usize]
            });
        }
    }
    let n = parent.len();
    Ok(PlaneTree::from_preorder_parents_unchecked(parent, n))
}

/// One small multitype tree per type-0 vertex of a flat tree, stored in a
/// shared arena. Blob `r` belongs to the r-th type-0 vertex in preorder; its
/// vertices are in DFS order with local parent indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Decoration {
    offsets: Vec<u32>,
    types: Vec<u16>,
    parents: Vec<u32>,
}

impl Decoration {
    pub fn new() -> Self {
        Decoration {
            offsets: vec![0],
            types: Vec::new(),
            parents: Vec::new(),
        }
    }

    pub fn with_capacity(blobs: usize, vertices: usize) -> Self {
        let mut offsets = Vec::with_capacity(blobs + 1);
        offsets.push(0);
        Decoration {
            offsets,
            types: Vec::with_capacity(vertices),
            parents: Vec::with_capacity(vertices),
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn total_vertices(&self) -> usize {
        self.types.len()
    }

    /// Appends a blob given as local types and parents (`parents[0]` ignored).
    pub fn push(&mut self, types: &[u16], parents: &[u32]) {
        debug_assert_eq!(types.len(), parents.len());
        self.types.extend_from_slice(types);
        self.parents.push(NO_PARENT);
        self.parents.extend_from_slice(&parents[1..]);
        self.offsets.push(self.types.len() as u32);
    }

    pub fn push_tree(&mut self, blob: &MultitypeTree) {
        self.push(blob.types(), blob.shape().parents());
    }

    pub fn blob(&self, r: usize) -> (&[u16], &[u32]) {
        let (a, b) = (self.offsets[r] as usize, self.offsets[r + 1] as usize);
        (&self.types[a..b], &self.parents[a..b])
    }

    pub fn blob_tree(&self, r: usize) -> Result<MultitypeTree> {
        let (types, parents) = self.blob(r);
        MultitypeTree::from_parents(parents, types.to_vec())
    }

    /// The identity decoration: each blob is its vertex with its flat-tree
    /// children as leaves.
    pub fn stars(tau: &FlatTree) -> Self {
        let t = tau.tree();
        let mut d = Decoration::with_capacity(t.len(), 2 * t.len());
        let mut ty = Vec::new();
        let mut pa = Vec::new();
        for v in 0..t.len() {
            if t.types()[v] != 0 {
                continue;
            }
            ty.clear();
            pa.clear();
            ty.push(0);
            pa.push(NO_PARENT);
            for &c in t.shape().children(v) {
                ty.push(t.types()[c as usize]);
                pa.push(0);
            }
            d.push(&ty, &pa);
        }
        d
    }
}

/// Flattened tree together with the decoration that blows it back up to `t`.
pub fn flatten(t: &MultitypeTree) -> Result<(FlatTree, Decoration)> {
    require_type1_root(t)?;
    let n = t.len();
    let anc = nearest_type1_ancestor(t);
    let types = t.types();

    // Members of each blob (excluding the root) in lexicographic order.
    let mut rank = vec![NO_PARENT; n];
    let mut nb = 0usize;
    for v in 0..n {
        if types[v] == 0 {
            rank[v] = nb as u32;
            nb += 1;
        }
    }
    let mut start = vec![0u32; nb + 1];
    for v in 1..n {
        start[rank[anc[v] as usize] as usize + 1] += 1;
    }
    for r in 0..nb {
        start[r + 1] += start[r];
    }
    let mut fill = start.clone();
    let mut members = vec![0u32; n - 1];
    for v in 1..n {
        let r = rank[anc[v] as usize] as usize;
        members[fill[r] as usize] = v as u32;
        fill[r] += 1;
    }
    let members_of = |r: usize| &members[start[r] as usize..start[r + 1] as usize];

    // Induced decoration.
    let mut deco = Decoration::with_capacity(nb, n + nb);
    let mut local = vec![0u32; n];
    let mut ty = Vec::new();
    let mut pa = Vec::new();
    let roots: Vec<usize> = (0..n).filter(|&v| types[v] == 0).collect();
    for (r, &x) in roots.iter().enumerate() {
        ty.clear();
        pa.clear();
        ty.push(0);
        pa.push(NO_PARENT);
        for (i, &v) in members_of(r).iter().enumerate() {
            let v = v as usize;
            local[v] = i as u32 + 1;
            let p = t.shape().parents()[v] as usize;
            ty.push(types[v]);
            pa.push(if p == x { 0 } else { local[p] });
        }
        deco.push(&ty, &pa);
    }

    // Flat tree in DFS order: type-0 children (recursively) first, then the
    // remaining members sorted by type, stable within a type.
    enum Step {
        Enter(u32, u32),
        Leaves(u32, u32),
    }
    let mut parent = Vec::with_capacity(n);
    let mut out_types = Vec::with_capacity(n);
    let mut stack = vec![Step::Enter(0, NO_PARENT)];
    let mut leaves: Vec<u32> = Vec::new();
    while let Some(step) = stack.pop() {
        match step {
            Step::Enter(x, p) => {
                let id = parent.len() as u32;
                parent.push(p);
                out_types.push(0u16);
                stack.push(Step::Leaves(x, id));
                let r = rank[x as usize] as usize;
                for &c in members_of(r).iter().rev() {
                    if types[c as usize] == 0 {
                        stack.push(Step::Enter(c, id));
                    }
                }
            }
            Step::Leaves(x, id) => {
                let r = rank[x as usize] as usize;
                leaves.clear();
                leaves.extend(
                    members_of(r)
                        .iter()
                        .copied()
                        .filter(|&c| types[c as usize] != 0),
                );
                leaves.sort_by_key(|&c| types[c as usize]);
                for &c in &leaves {
                    parent.push(id);
                    out_types.push(types[c as usize]);
                }
            }
        }
    }
    let shape = PlaneTree::from_preorder_parents_unchecked(parent, n);
    let flat = FlatTree::new_unchecked(MultitypeTree::from_parts_unchecked(shape, out_types));
    Ok((flat, deco))
}

pub fn flatten_tree(t: &MultitypeTree) -> Result<FlatTree> {
    flatten(t).map(|(f, _)| f)
}

fn mismatch(vertex: usize, reason: impl Into<String>) -> Error {
    Error::DecorationMismatch {
        vertex,
        reason: reason.into(),
    }
}

/// Checks that blob `r` of `deco` is a valid decoration for the flat-tree
/// vertex `v`: rooted at type 0, type-0 vertices only at the root or as
/// leaves, and per-type counts equal to the children of `v` in `tau`.
fn check_blob(
    tau: &MultitypeTree,
    v: usize,
    types: &[u16],
    parents: &[u32],
    num_types: usize,
) -> Result<()> {
    if types.is_empty() || types[0] != 0 {
        return Err(mismatch(v, "blob root must have type 1"));
    }
    let m = types.len();
    let mut has_child = vec![false; m];
    let mut stack: Vec<u32> = vec![0];
    for i in 1..m {
        let p = parents[i];
        if p as usize >= i {
            return Err(mismatch(v, "blob is not in depth-first order"));
        }
        while stack.last().is_some_and(|&s| s != p) {
            stack.pop();
        }
        if stack.is_empty() {
            return Err(mismatch(v, "blob is not in depth-first order"));
        }
        stack.push(i as u32);
        has_child[p as usize] = true;
    }
    let mut counts = vec![0u32; num_types.max(tau.max_type() + 1)];
    for i in 1..m {
        let ti = types[i] as usize;
        if ti >= counts.len() {
            counts.resize(ti + 1, 0);
        }
        if ti == 0 && has_child[i] {
            return Err(mismatch(v, "internal blob vertex of type 1"));
        }
        counts[ti] += 1;
    }
    let mut expect = vec![0u32; counts.len()];
    for &c in tau.shape().children(v) {
        expect[tau.types()[c as usize] as usize] += 1;
    }
    if counts != expect {
        return Err(mismatch(
            v,
            format!("blob type profile {counts:?} differs from flat-tree children {expect:?}"),
        ));
    }
    Ok(())
}

/// Replaces each type-0 vertex of `tau` by its blob. The k-th type-0 leaf of a
/// blob (in DFS order) is identified with the k-th type-0 child in `tau`.
/// Returns the tree and the image of each type-0 vertex of `tau` (indexed by
/// preorder rank among type-0 vertices).
pub fn blow_up(tau: &FlatTree, deco: &Decoration) -> Result<(MultitypeTree, Vec<u32>)> {
    let t = tau.tree();
    let n = t.len();
    let mut rank = vec![NO_PARENT; n];
    let mut roots = Vec::new();
    for v in 0..n {
        if t.types()[v] == 0 {
            rank[v] = roots.len() as u32;
            roots.push(v as u32);
        }
    }
    if deco.len() != roots.len() {
        return Err(mismatch(
            0,
            format!("{} blobs for {} type-1 vertices", deco.len(), roots.len()),
        ));
    }
    let num_types = t.max_type() + 1;
    for (r, &v) in roots.iter().enumerate() {
        let (ty, pa) = deco.blob(r);
        check_blob(t, v as usize, ty, pa, num_types)?;
    }

    // Local children lists and frontier ranks over the whole arena.
    let total = deco.total_vertices();
    let mut child_start = vec![0u32; total + 1];
    let mut frontier_rank = vec![0u32; total];
    for r in 0..deco.len() {
        let base = deco.offsets[r] as usize;
        let (ty, pa) = deco.blob(r);
        let mut k = 0;
        for i in 1..ty.len() {
            child_start[base + pa[i] as usize + 1] += 1;
            if ty[i] == 0 {
                frontier_rank[base + i] = k;
                k += 1;
            }
        }
    }
    for g in 0..total {
        child_start[g + 1] += child_start[g];
    }
    let mut fill = child_start.clone();
    let mut kids = vec![0u32; total.saturating_sub(deco.len())];
    for r in 0..deco.len() {
        let base = deco.offsets[r] as usize;
        let (_, pa) = deco.blob(r);
        for (i, &p) in pa.iter().enumerate().skip(1) {
            let slot = &mut fill[base + p as usize];
            kids[*slot as usize] = (base + i) as u32;
            *slot += 1;
        }
    }

    let out_n = total - (roots.len() - 1);
    let mut parent = Vec::with_capacity(out_n);
    let mut types = Vec::with_capacity(out_n);
    let mut phi = vec![0u32; roots.len()];
    let mut blob_of = vec![0u32; total];
    for r in 0..deco.len() {
        for g in deco.offsets[r]..deco.offsets[r + 1] {
            blob_of[g as usize] = r as u32;
        }
    }
    let mut stack: Vec<(u32, u32)> = vec![(deco.offsets[0], NO_PARENT)];
    while let Some((mut g, p)) = stack.pop() {
        let r = blob_of[g as usize] as usize;
        if g != deco.offsets[r] && deco.types[g as usize] == 0 {
            let v = roots[r] as usize;
            let child = t.shape().children(v)[frontier_rank[g as usize] as usize];
            g = deco.offsets[rank[child as usize] as usize];
        }
        let id = parent.len() as u32;
        parent.push(p);
        types.push(deco.types[g as usize]);
        if g == deco.offsets[blob_of[g as usize] as usize] {
            phi[blob_of[g as usize] as usize] = id;
        }
        let (a, b) = (
            child_start[g as usize] as usize,
            child_start[g as usize + 1] as usize,
        );
        for &c in kids[a..b].iter().rev() {
            stack.push((c, id));
        }
    }
    let len = parent.len();
    let shape = PlaneTree::from_preorder_parents_unchecked(parent, len);
    Ok((MultitypeTree::from_parts_unchecked(shape, types), phi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mt(parents: &[u32], types: &[u16]) -> MultitypeTree {
        MultitypeTree::from_parents(parents, types.to_vec()).unwrap()
    }

    #[test]
    fn blob_examples() {
        let mono = MultitypeTree::monotype(PlaneTree::from_parents(&[0, 0, 1, 0]).unwrap());
        let b = blobs(&mono).unwrap();
        assert!((0..4).all(|r| b.size(r) == 1));
        // root(1) -> child(2) -> grandchild(1)
        let t = mt(&[0, 0, 1], &[0, 1, 0]);
        let b = blobs(&t).unwrap();
        assert_eq!(b.roots(), &[0, 2]);
        assert_eq!(b.owner, vec![0, 0, 2]);
        assert_eq!(b.frontier(0), &[2]);
        assert_eq!(b.size(0), 2);
        assert!(matches!(
            blobs(&mt(&[0, 0], &[1, 0])),
            Err(Error::RootType { found: 2 })
        ));
    }

    #[test]
    fn reduce_examples() {
        let t = mt(&[0, 0, 1], &[0, 1, 0]);
        assert_eq!(
            reduce(&t).unwrap(),
            PlaneTree::from_parents(&[0, 0]).unwrap()
        );
        let mono = PlaneTree::from_parents(&[0, 0, 1, 1, 0]).unwrap();
        assert_eq!(
            reduce(&MultitypeTree::monotype(mono.clone())).unwrap(),
            mono
        );
    }

    #[test]
    fn flatten_sorts_and_reattaches() {
        // root(1): [a(2): [b(1), c(3)], d(1)]
        let t = mt(&[0, 0, 1, 1, 0], &[0, 1, 0, 2, 0]);
        let (flat, deco) = flatten(&t).unwrap();
        assert_eq!(flat.tree().types(), &[0, 0, 0, 1, 2]);
        assert_eq!(flat.tree().shape().parents()[1..], [0, 0, 0, 0]);
        assert_eq!(flat.tree().type_counts(3), t.type_counts(3));
        let (back, phi) = blow_up(&flat, &deco).unwrap();
        assert_eq!(back, t);
        assert_eq!(phi, vec![0, 2, 4]);
    }

    #[test]
    fn star_decoration_is_identity() {
        let t = mt(&[0, 0, 1, 1, 0, 0], &[0, 0, 0, 1, 1, 1]);
        let flat = FlatTree::new(t.clone()).unwrap();
        let (back, _) = blow_up(&flat, &Decoration::stars(&flat)).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn mismatched_decoration_is_rejected() {
        let flat = FlatTree::new(mt(&[0, 0], &[0, 0])).unwrap();
        let mut deco = Decoration::new();
        deco.push(&[0, 1], &[NO_PARENT, 0]);
        deco.push(&[0], &[NO_PARENT]);
        assert!(matches!(
            blow_up(&flat, &deco),
            Err(Error::DecorationMismatch { .. })
        ));
    }
}

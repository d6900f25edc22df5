//! Morse decompositions: strongly connected components of the flow digraph,
//! the order they inherit from reachability, and checks for user-supplied
//! partitions.
//!
//! Order convention: `p <= q` iff the Morse set `p` is reachable from the
//! Morse set `q` along flow paths. Attractors are therefore minimal, and the
//! boundary matrix assembled in any basis extending this order is filtered
//! (a face always has a grade below or equal to its coface).

use std::collections::VecDeque;

use thiserror::Error;

use crate::mvfield::FlowDigraph;
use crate::simplicial::{Simplex, SimplicialComplex};

/// Fixed-size bit set used for reachability rows.
#[derive(Clone, Debug, PartialEq, Eq)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn new(len: usize) -> Self {
        BitRow(vec![0; len.div_ceil(64)])
    }
    fn insert(&mut self, k: usize) {
        self.0[k / 64] |= 1 << (k % 64);
    }
    fn contains(&self, k: usize) -> bool {
        self.0[k / 64] >> (k % 64) & 1 == 1
    }
    fn union_with(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("order relation contains a cycle through element {0}")]
pub struct CycleError(pub usize);

/// A finite strict partial order on `0..len()`, stored as a DAG of direct
/// "covers or is above" edges together with its transitive closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poset {
    /// `below[q]` lists elements `p < q` joined to `q` by a DAG edge.
    below: Vec<Vec<usize>>,
    /// `strictly_below[q]` contains every `p < q`.
    strictly_below: Vec<BitRow>,
    topo: Vec<usize>,
}

impl Poset {
    /// Builds the order generated by `edges`, each `(p, q)` meaning `p < q`.
    pub fn from_relations<I>(len: usize, edges: I) -> Result<Self, CycleError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut below = vec![Vec::new(); len];
        for (p, q) in edges {
            if p == q {
                return Err(CycleError(p));
            }
            below[q].push(p);
        }
        for b in &mut below {
            b.sort_unstable();
            b.dedup();
        }
        // Kahn from the minimal elements upward
        let mut pending: Vec<usize> = below.iter().map(Vec::len).collect();
        let mut above = vec![Vec::new(); len];
        for (q, b) in below.iter().enumerate() {
            for &p in b {
                above[p].push(q);
            }
        }
        let mut queue: VecDeque<usize> = (0..len).filter(|&q| pending[q] == 0).collect();
        let mut topo = Vec::with_capacity(len);
        while let Some(p) = queue.pop_front() {
            topo.push(p);
            for &q in &above[p] {
                pending[q] -= 1;
                if pending[q] == 0 {
                    queue.push_back(q);
                }
            }
        }
        if topo.len() != len {
            let stuck = (0..len).find(|&q| pending[q] > 0).expect("some element is on a cycle");
            return Err(CycleError(stuck));
        }
        let mut strictly_below = vec![BitRow::new(len); len];
        for &q in &topo {
            let mut row = BitRow::new(len);
            for &p in &below[q] {
                row.insert(p);
                row.union_with(&strictly_below[p]);
            }
            strictly_below[q] = row;
        }
        Ok(Self { below, strictly_below, topo })
    }

    pub fn len(&self) -> usize {
        self.below.len()
    }

    pub fn is_empty(&self) -> bool {
        self.below.is_empty()
    }

    pub fn lt(&self, p: usize, q: usize) -> bool {
        self.strictly_below[q].contains(p)
    }

    pub fn le(&self, p: usize, q: usize) -> bool {
        p == q || self.lt(p, q)
    }

    pub fn comparable(&self, p: usize, q: usize) -> bool {
        self.le(p, q) || self.le(q, p)
    }

    /// Elements joined to `q` by a direct DAG edge from below.
    pub fn direct_below(&self, q: usize) -> &[usize] {
        &self.below[q]
    }

    /// A linear extension, minimal elements first.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// The covering relation as `(p, q)` pairs with `p < q` and nothing strictly
    /// between, sorted.
    pub fn covering_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for q in 0..self.len() {
            for &p in &self.below[q] {
                let shortcut = self.below[q].iter().any(|&r| r != p && self.lt(p, r));
                if !shortcut {
                    pairs.push((p, q));
                }
            }
        }
        pairs.sort_unstable();
        pairs
    }
}

/// A partition of a complex into Morse sets with the induced order.
#[derive(Clone, Debug)]
pub struct MorseDecomposition {
    sets: Vec<Vec<usize>>,
    grade_of: Vec<usize>,
    poset: Poset,
}

impl MorseDecomposition {
    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn set(&self, p: usize) -> &[usize] {
        &self.sets[p]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Morse set containing simplex `id`.
    pub fn grade_of(&self, id: usize) -> usize {
        self.grade_of[id]
    }

    pub fn grades(&self) -> &[usize] {
        &self.grade_of
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }
}

/// Strongly connected components, each sorted, listed by smallest member.
pub fn strongly_connected_components(g: &FlowDigraph) -> Vec<Vec<usize>> {
    let n = g.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut lowlink = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0;
    // explicit call stack of (node, next successor position)
    let mut calls: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        calls.push((root, 0));
        index[root] = next;
        lowlink[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = calls.last_mut() {
            let succ = g.successors(v);
            if *pos < succ.len() {
                let w = succ[*pos];
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    lowlink[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
                continue;
            }
            calls.pop();
            if let Some(&(parent, _)) = calls.last() {
                lowlink[parent] = lowlink[parent].min(lowlink[v]);
            }
            if lowlink[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps.sort_unstable_by_key(|c| c[0]);
    comps
}

/// Orders the components of `g`: `p <= q` iff `sccs[p]` is reachable from
/// `sccs[q]`.
pub fn condensation_order(g: &FlowDigraph, sccs: Vec<Vec<usize>>) -> MorseDecomposition {
    let mut grade_of = vec![usize::MAX; g.len()];
    for (p, comp) in sccs.iter().enumerate() {
        for &s in comp {
            grade_of[s] = p;
        }
    }
    let poset = quotient_order(g, &grade_of, sccs.len())
        .expect("the condensation of a digraph is acyclic");
    MorseDecomposition { sets: sccs, grade_of, poset }
}

fn quotient_order(g: &FlowDigraph, grade_of: &[usize], len: usize) -> Result<Poset, CycleError> {
    let edges = (0..g.len()).flat_map(|s| {
        g.successors(s)
            .iter()
            .filter(move |&&t| grade_of[t] != grade_of[s])
            .map(move |&t| (grade_of[t], grade_of[s]))
    });
    Poset::from_relations(len, edges)
}

/// The decomposition into minimal Morse sets.
pub fn minimal_decomposition(g: &FlowDigraph) -> MorseDecomposition {
    condensation_order(g, strongly_connected_components(g))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorseError {
    #[error("Morse sets do not partition the complex: {0}")]
    NotPartition(String),
    #[error("{first} and {second} lie on a common cycle but in different Morse sets")]
    SplitsComponent { first: Simplex, second: Simplex },
    #[error("Morse set {set} is not path-convex: a path from {start} through {escape} returns to {end}")]
    NotConvex { set: usize, start: Simplex, escape: Simplex, end: Simplex },
}

/// Validates a user partition into Morse sets and returns it with its order.
///
/// Sets are renumbered by their smallest simplex index, like the minimal
/// decomposition.
pub fn validate_morse_partition(
    complex: &SimplicialComplex,
    g: &FlowDigraph,
    user_sets: Vec<Vec<usize>>,
) -> Result<MorseDecomposition, MorseError> {
    let n = g.len();
    let mut sets: Vec<Vec<usize>> = user_sets
        .into_iter()
        .map(|mut s| {
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    if let Some(k) = sets.iter().position(Vec::is_empty) {
        return Err(MorseError::NotPartition(format!("set {k} is empty")));
    }
    sets.sort_unstable_by_key(|s| s[0]);
    let mut grade_of = vec![usize::MAX; n];
    for (p, set) in sets.iter().enumerate() {
        for &s in set {
            if s >= n {
                return Err(MorseError::NotPartition(format!("unknown simplex index {s}")));
            }
            if grade_of[s] != usize::MAX {
                return Err(MorseError::NotPartition(format!(
                    "{} is in two sets",
                    complex.simplex(s)
                )));
            }
            grade_of[s] = p;
        }
    }
    if let Some(s) = grade_of.iter().position(|&p| p == usize::MAX) {
        return Err(MorseError::NotPartition(format!("{} is not covered", complex.simplex(s))));
    }
    for comp in strongly_connected_components(g) {
        if let Some(&other) = comp.iter().find(|&&s| grade_of[s] != grade_of[comp[0]]) {
            return Err(MorseError::SplitsComponent {
                first: complex.simplex(comp[0]).clone(),
                second: complex.simplex(other).clone(),
            });
        }
    }
    let reverse = reverse_graph(g);
    for (p, set) in sets.iter().enumerate() {
        let forward = reach(n, set, |v| g.successors(v));
        let backward = reach(n, set, |v| &reverse[v]);
        if let Some(escape) = (0..n).find(|&v| grade_of[v] != p && forward[v] && backward[v]) {
            let start = first_in_set(n, escape, &grade_of, p, |v| &reverse[v]);
            let end = first_in_set(n, escape, &grade_of, p, |v| g.successors(v));
            return Err(MorseError::NotConvex {
                set: p,
                start: complex.simplex(start).clone(),
                escape: complex.simplex(escape).clone(),
                end: complex.simplex(end).clone(),
            });
        }
    }
    let poset = quotient_order(g, &grade_of, sets.len()).expect("convex sets have an acyclic quotient");
    Ok(MorseDecomposition { sets, grade_of, poset })
}

fn reverse_graph(g: &FlowDigraph) -> Vec<Vec<usize>> {
    let mut rev = vec![Vec::new(); g.len()];
    for v in 0..g.len() {
        for &w in g.successors(v) {
            rev[w].push(v);
        }
    }
    rev
}

/// Nodes reachable by a nonempty path from `sources`.
fn reach<'a, F>(n: usize, sources: &[usize], next: F) -> Vec<bool>
where
    F: Fn(usize) -> &'a [usize],
{
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = sources.iter().copied().collect();
    while let Some(v) = queue.pop_front() {
        for &w in next(v) {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Breadth-first search from `from` to the nearest member of set `p`.
fn first_in_set<'a, F>(n: usize, from: usize, grade_of: &[usize], p: usize, next: F) -> usize
where
    F: Fn(usize) -> &'a [usize],
{
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(v) = queue.pop_front() {
        for &w in next(v) {
            if grade_of[w] == p {
                return w;
            }
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    unreachable!("caller guarantees the set is reachable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mvfield::{flow_digraph, validate_field, MultivectorField};

    fn annulus() -> (SimplicialComplex, MultivectorField) {
        let k = SimplicialComplex::from_facets([["A", "B", "C"], ["C", "D", "A"]]).unwrap();
        let blocks = [&["A", "AB"][..], &["B", "BC"], &["C", "CD"], &["D", "AD"], &["AC"], &["ABC"], &["ACD"]]
            .iter()
            .map(|b| ids(&k, b))
            .collect();
        let v = validate_field(&k, blocks).unwrap();
        (k, v)
    }

    fn ids(k: &SimplicialComplex, labels: &[&str]) -> Vec<usize> {
        let mut v: Vec<usize> =
            labels.iter().map(|l| k.index_of(&Simplex::from_chars(l).unwrap()).unwrap()).collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn annulus_components() {
        let (k, v) = annulus();
        let g = flow_digraph(&k, &v);
        let sccs = strongly_connected_components(&g);
        assert_eq!(
            sccs,
            vec![
                ids(&k, &["A", "AB", "B", "BC", "C", "CD", "D", "AD"]),
                ids(&k, &["AC"]),
                ids(&k, &["ABC"]),
                ids(&k, &["ACD"]),
            ]
        );
    }

    #[test]
    fn annulus_order() {
        let (k, v) = annulus();
        let m = minimal_decomposition(&flow_digraph(&k, &v));
        let p = m.poset();
        // 0 = orbit, 1 = AC, 2 = ABC, 3 = ACD
        assert!(p.lt(0, 1) && p.lt(1, 2) && p.lt(1, 3) && p.lt(0, 2));
        assert!(!p.comparable(2, 3));
        assert_eq!(p.covering_pairs(), vec![(0, 1), (1, 2), (1, 3)]);
    }

    #[test]
    fn singleton_field_components() {
        let (k, _) = annulus();
        let g = flow_digraph(&k, &MultivectorField::singletons(&k));
        let sccs = strongly_connected_components(&g);
        assert_eq!(sccs.len(), k.len());
        let edge = SimplicialComplex::from_facets([["A", "B"]]).unwrap();
        let m = minimal_decomposition(&flow_digraph(&edge, &MultivectorField::singletons(&edge)));
        assert!(m.poset().lt(0, 2) && m.poset().lt(1, 2) && !m.poset().comparable(0, 1));
    }

    #[test]
    fn edge_with_one_vector() {
        let k = SimplicialComplex::from_facets([["A", "B"]]).unwrap();
        let v = validate_field(&k, vec![vec![0, 2], vec![1]]).unwrap();
        let m = minimal_decomposition(&flow_digraph(&k, &v));
        assert_eq!(m.sets(), &[vec![0, 2], vec![1]]);
        // {B} is reachable from {A, AB}
        assert!(m.poset().lt(1, 0));
    }

    #[test]
    fn merged_triangles_are_a_valid_morse_set() {
        let (k, v) = annulus();
        let g = flow_digraph(&k, &v);
        let sets = vec![
            ids(&k, &["A", "AB", "B", "BC", "C", "CD", "D", "AD"]),
            ids(&k, &["AC"]),
            ids(&k, &["ABC", "ACD"]),
        ];
        let m = validate_morse_partition(&k, &g, sets).unwrap();
        assert_eq!(m.poset().covering_pairs(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn invalid_user_partitions() {
        let (k, v) = annulus();
        let g = flow_digraph(&k, &v);
        // splits the orbit
        let first = ids(&k, &["A", "ABC"]);
        let mut sets: Vec<Vec<usize>> = (0..k.len()).filter(|i| !first.contains(i)).map(|i| vec![i]).collect();
        sets.push(first);
        assert!(matches!(
            validate_morse_partition(&k, &g, sets),
            Err(MorseError::SplitsComponent { .. })
        ));

        // keeps components whole but skips AC between ABC and the orbit
        let sets = vec![ids(&k, &["A", "AB", "B", "BC", "C", "CD", "D", "AD", "ABC"]), ids(&k, &["AC"]), ids(&k, &["ACD"])];
        let err = validate_morse_partition(&k, &g, sets).unwrap_err();
        assert_eq!(
            err,
            MorseError::NotConvex {
                set: 0,
                start: Simplex::from_chars("ABC").unwrap(),
                escape: Simplex::from_chars("AC").unwrap(),
                end: Simplex::from_chars("A").unwrap(),
            }
        );

        let sets = vec![ids(&k, &["A"])];
        assert!(matches!(validate_morse_partition(&k, &g, sets), Err(MorseError::NotPartition(_))));
    }

    #[test]
    fn cycle_detected() {
        assert_eq!(Poset::from_relations(2, [(0, 1), (1, 0)]).unwrap_err().0, 0);
        assert!(Poset::from_relations(1, [(0, 0)]).is_err());
    }

    #[test]
    fn deep_chain_does_not_overflow() {
        // a long path exercises the iterative Tarjan
        let n = 50_000;
        let succ = (0..n).map(|v| if v + 1 < n { vec![v, v + 1] } else { vec![v, 0] }).collect();
        let g = FlowDigraph::from_successors(succ);
        assert_eq!(strongly_connected_components(&g).len(), 1);
    }
}

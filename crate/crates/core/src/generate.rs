//! Seeded instance generators for tests and benchmarks.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mvfield::{validate_field, MultivectorField};
use crate::simplicial::{Simplex, SimplicialComplex};

/// `A`..`Z`, then `v26`, `v27`, ...
pub fn vertex_name(i: usize) -> String {
    if i < 26 {
        char::from(b'A' + i as u8).to_string()
    } else {
        format!("v{i}")
    }
}

fn subsets(facet: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (1u32..1 << facet.len()).map(move |mask| {
        facet.iter().enumerate().filter(|&(b, _)| mask >> b & 1 == 1).map(|(_, &v)| v).collect()
    })
}

fn complex_from_index_sets(sets: &BTreeSet<Vec<usize>>) -> SimplicialComplex {
    let simplices = sets
        .iter()
        .map(|s| Simplex::new(s.iter().map(|&v| vertex_name(v))).expect("distinct vertices"));
    SimplicialComplex::from_simplices(simplices).expect("closed by construction")
}

/// Random complex with at most `max_simplices` simplices and dimension at
/// most `max_dim`, built as the closure of random facets.
pub fn random_complex<R: Rng>(rng: &mut R, max_simplices: usize, max_dim: usize) -> SimplicialComplex {
    let mut sets: BTreeSet<Vec<usize>> = BTreeSet::new();
    if max_simplices == 0 {
        return complex_from_index_sets(&sets);
    }
    let n_vertices = (max_simplices / 4).clamp(2, 400);
    let mut misses = 0;
    while misses < 40 {
        let dim = rng.gen_range(0..=max_dim.min(n_vertices - 1));
        let mut facet: Vec<usize> = rand::seq::index::sample(rng, n_vertices, dim + 1).into_vec();
        facet.sort_unstable();
        let new: Vec<Vec<usize>> = subsets(&facet).filter(|s| !sets.contains(s)).collect();
        if new.is_empty() || sets.len() + new.len() > max_simplices {
            misses += 1;
            continue;
        }
        misses = 0;
        sets.extend(new);
    }
    complex_from_index_sets(&sets)
}

/// Triangulated torus on a `w x h` grid of vertices, each square split along
/// its diagonal. It has `6wh` simplices. Both sides must be at least 3.
pub fn torus_grid(w: usize, h: usize) -> SimplicialComplex {
    assert!(w >= 3 && h >= 3, "torus grid needs at least 3x3 vertices");
    let width = (w * h - 1).to_string().len();
    let name = |i: usize, j: usize| format!("{:0width$}", (j % h) * w + i % w);
    let mut facets = Vec::with_capacity(2 * w * h);
    for j in 0..h {
        for i in 0..w {
            facets.push([name(i, j), name(i + 1, j), name(i + 1, j + 1)]);
            facets.push([name(i, j), name(i, j + 1), name(i + 1, j + 1)]);
        }
    }
    SimplicialComplex::from_facets(facets).expect("valid facets")
}

/// Torus grid with roughly `n` simplices.
pub fn torus_grid_for_size(n: usize) -> SimplicialComplex {
    let cells = (n as f64 / 6.0).max(9.0);
    let h = (cells.sqrt().round() as usize).max(3);
    let w = ((cells / h as f64).round() as usize).max(3);
    torus_grid(w, h)
}

/// Random gradient (acyclic) Forman field built from a random sequence of
/// elementary collapses. When no free face is available, or with probability
/// `critical_rate`, a random maximal simplex is removed as a critical cell.
pub fn random_forman_field<R: Rng>(rng: &mut R, complex: &SimplicialComplex, critical_rate: f64) -> MultivectorField {
    let n = complex.len();
    let mut alive = vec![true; n];
    // number of live codimension-one cofaces
    let mut live_cofaces: Vec<usize> = (0..n).map(|id| complex.cofaces(id).expect("id").len()).collect();
    let mut remaining = n;
    let mut blocks: Vec<Vec<usize>> = Vec::new();

    let remove = |id: usize, alive: &mut Vec<bool>, live_cofaces: &mut Vec<usize>| {
        alive[id] = false;
        for &f in complex.boundary_faces(id).expect("id") {
            live_cofaces[f] -= 1;
        }
    };

    while remaining > 0 {
        let free: Vec<(usize, usize)> = (0..n)
            .filter(|&s| alive[s] && live_cofaces[s] == 1)
            .map(|s| {
                let t = *complex.cofaces(s).expect("id").iter().find(|&&t| alive[t]).expect("one live coface");
                (s, t)
            })
            .collect();
        if !free.is_empty() && !rng.gen_bool(critical_rate) {
            let &(s, t) = free.choose(rng).expect("non-empty");
            remove(t, &mut alive, &mut live_cofaces);
            remove(s, &mut alive, &mut live_cofaces);
            blocks.push(vec![s, t]);
            remaining -= 2;
        } else {
            let maximal: Vec<usize> = (0..n).filter(|&s| alive[s] && live_cofaces[s] == 0).collect();
            let &s = maximal.choose(rng).expect("a finite complex has maximal simplices");
            remove(s, &mut alive, &mut live_cofaces);
            blocks.push(vec![s]);
            remaining -= 1;
        }
    }
    validate_field(complex, blocks).expect("collapses give a valid field")
}

/// Random multivector field whose blocks are face intervals
/// `{rho : sigma <= rho <= tau}`.
pub fn random_multivector_field<R: Rng>(rng: &mut R, complex: &SimplicialComplex) -> MultivectorField {
    let n = complex.len();
    let mut taken = vec![false; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut blocks = Vec::new();
    for sigma in order {
        if taken[sigma] {
            continue;
        }
        // climb through free cofaces while every simplex of the interval is free
        let mut tau = sigma;
        let mut interval = vec![sigma];
        loop {
            if !rng.gen_bool(0.6) {
                break;
            }
            let candidates: Vec<(usize, Vec<usize>)> = complex
                .cofaces(tau)
                .expect("id")
                .iter()
                .filter_map(|&up| {
                    let between = interval_between(complex, sigma, up);
                    between.iter().all(|&r| !taken[r]).then_some((up, between))
                })
                .collect();
            let Some((up, between)) = candidates.choose(rng).cloned() else { break };
            tau = up;
            interval = between;
        }
        for &r in &interval {
            taken[r] = true;
        }
        blocks.push(interval);
    }
    validate_field(complex, blocks).expect("intervals give a valid field")
}

fn interval_between(complex: &SimplicialComplex, sigma: usize, tau: usize) -> Vec<usize> {
    let lower = complex.simplex(sigma);
    let mut ids: Vec<usize> = complex.faces(tau).expect("id");
    ids.push(tau);
    ids.retain(|&r| lower.is_face_of(complex.simplex(r)) || r == sigma);
    ids.sort_unstable();
    ids.dedup();
    ids
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    TorusGrid,
    RandomForman,
    RandomMultivector,
    Singleton,
}

impl Generator {
    pub const ALL: [Generator; 4] =
        [Generator::TorusGrid, Generator::RandomForman, Generator::RandomMultivector, Generator::Singleton];

    pub fn name(self) -> &'static str {
        match self {
            Generator::TorusGrid => "triangulated-torus-grid",
            Generator::RandomForman => "random-forman",
            Generator::RandomMultivector => "random-multivector",
            Generator::Singleton => "singleton",
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "triangulated-torus-grid" | "torus-grid" | "grid" => Ok(Generator::TorusGrid),
            "random-forman" | "forman" => Ok(Generator::RandomForman),
            "random-multivector" | "multivector" => Ok(Generator::RandomMultivector),
            "singleton" => Ok(Generator::Singleton),
            _ => Err(format!(
                "unknown generator {s:?}; expected one of {}",
                Generator::ALL.map(Generator::name).join(", ")
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub complex: SimplicialComplex,
    pub field: MultivectorField,
}

/// Deterministic instance of roughly `n` simplices. The torus grid carries
/// a random Forman field.
pub fn generate(generator: Generator, n: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let complex = match generator {
        Generator::TorusGrid => torus_grid_for_size(n),
        _ => random_complex(&mut rng, n, 2),
    };
    let field = match generator {
        Generator::TorusGrid | Generator::RandomForman => random_forman_field(&mut rng, &complex, 0.05),
        Generator::RandomMultivector => random_multivector_field(&mut rng, &complex),
        Generator::Singleton => MultivectorField::singletons(&complex),
    };
    Instance { complex, field }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mvfield::flow_digraph;
    use crate::morse::strongly_connected_components;

    #[test]
    fn random_complex_respects_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for limit in [0, 1, 5, 60, 200] {
            let k = random_complex(&mut rng, limit, 3);
            assert!(k.len() <= limit);
            assert!(k.max_dim().unwrap_or(0) <= 3);
        }
        assert!(random_complex(&mut rng, 200, 2).len() > 150);
    }

    #[test]
    fn torus_sizes() {
        let k = torus_grid(3, 3);
        assert_eq!(k.len(), 54);
        assert_eq!(k.max_dim(), Some(2));
        for n in [200, 400, 800, 1600, 3200] {
            let len = torus_grid_for_size(n).len();
            assert!(len * 10 >= n * 8 && len * 10 <= n * 12, "{n} -> {len}");
        }
    }

    #[test]
    fn forman_fields_are_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let k = random_complex(&mut rng, 80, 3);
            let v = random_forman_field(&mut rng, &k, 0.1);
            assert!(v.is_forman());
            let g = flow_digraph(&k, &v);
            // every strongly connected component is a single block
            for scc in strongly_connected_components(&g) {
                assert_eq!(v.block_of(scc[0]).len(), scc.len());
            }
        }
    }

    #[test]
    fn multivector_fields_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut largest = 0;
        for _ in 0..20 {
            let k = random_complex(&mut rng, 60, 3);
            let v = random_multivector_field(&mut rng, &k);
            largest = largest.max(v.blocks().iter().map(Vec::len).max().unwrap_or(0));
        }
        assert!(largest > 2);
    }

    #[test]
    fn generation_is_deterministic() {
        for g in Generator::ALL {
            let a = generate(g, 120, 5);
            let b = generate(g, 120, 5);
            assert_eq!(a.complex.simplices(), b.complex.simplices());
            assert_eq!(a.field.blocks(), b.field.blocks());
            assert_eq!(g.name().parse::<Generator>().unwrap(), g);
        }
    }
}

//! Smallest set of smallest rings.
//!
//! Candidates are Horton cycles (shortest path from a root to each end of an
//! edge, plus the edge) which are guaranteed to contain a minimum cycle
//! basis. They are tried shortest first and kept when linearly independent
//! over GF(2) until the cycle rank is reached.

use std::collections::{HashMap, HashSet, VecDeque};

use super::MolGraph;

/// Rings in cycle order, each starting at its lowest atom index and
/// continuing towards the smaller of that atom's two ring neighbours.
/// Sorted by size, then by discovery order.
pub fn smallest_rings(g: &MolGraph) -> Vec<Vec<usize>> {
    let n = g.atoms.len();
    let m = g.bonds.len();
    if n == 0 || m + 1 <= n {
        return Vec::new();
    }
    let rank = m + 1 - n;
    let adj = g.adjacency();
    let mut edge_index = HashMap::with_capacity(m);
    for (i, b) in g.bonds.iter().enumerate() {
        edge_index.insert((b.a.min(b.b), b.a.max(b.b)), i);
    }
    let edge = |a: usize, b: usize| edge_index[&(a.min(b), a.max(b))];

    let mut candidates: Vec<Vec<usize>> = Vec::new();
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    for root in 0..n {
        let parent = bfs_tree(&adj, root);
        for b in &g.bonds {
            let (x, y) = (b.a, b.b);
            if parent[x].is_none() || parent[y].is_none() {
                continue;
            }
            let px = path_to_root(&parent, x);
            let py = path_to_root(&parent, y);
            // Paths must meet only at the root.
            let sx: HashSet<usize> = px.iter().copied().collect();
            if py.iter().filter(|a| sx.contains(a)).count() != 1 {
                continue;
            }
            // px: x..root, py: y..root  ->  cycle root..x, y..(before root)
            let mut cycle: Vec<usize> = px.iter().rev().copied().collect();
            cycle.extend(py.iter().take(py.len() - 1));
            if cycle.len() < 3 {
                continue;
            }
            let bits = edge_bits(&cycle, m, &edge);
            if seen.insert(bits) {
                candidates.push(cycle);
            }
        }
    }
    candidates.sort_by_key(Vec::len);

    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut rings = Vec::new();
    for cycle in candidates {
        let mut v = edge_bits(&cycle, m, &edge);
        for (pivot, row) in &basis {
            if v[pivot / 64] >> (pivot % 64) & 1 == 1 {
                v.iter_mut().zip(row).for_each(|(a, b)| *a ^= b);
            }
        }
        if let Some(pivot) = first_bit(&v) {
            basis.push((pivot, v));
            rings.push(canonical(cycle));
            if rings.len() == rank {
                break;
            }
        }
    }
    rings
}

fn bfs_tree(adj: &[Vec<usize>], root: usize) -> Vec<Option<usize>> {
    let mut parent = vec![None; adj.len()];
    parent[root] = Some(root);
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if parent[w].is_none() {
                parent[w] = Some(u);
                queue.push_back(w);
            }
        }
    }
    parent
}

fn path_to_root(parent: &[Option<usize>], mut v: usize) -> Vec<usize> {
    let mut path = vec![v];
    while let Some(p) = parent[v] {
        if p == v {
            break;
        }
        path.push(p);
        v = p;
    }
    path
}

fn edge_bits(cycle: &[usize], m: usize, edge: &impl Fn(usize, usize) -> usize) -> Vec<u64> {
    let mut bits = vec![0u64; m.div_ceil(64)];
    for i in 0..cycle.len() {
        let e = edge(cycle[i], cycle[(i + 1) % cycle.len()]);
        bits[e / 64] |= 1 << (e % 64);
    }
    bits
}

fn first_bit(v: &[u64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

fn canonical(mut cycle: Vec<usize>) -> Vec<usize> {
    let start = (0..cycle.len()).min_by_key(|&i| cycle[i]).unwrap();
    cycle.rotate_left(start);
    if cycle.len() > 2 && cycle[cycle.len() - 1] < cycle[1] {
        cycle[1..].reverse();
    }
    cycle
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn sizes(s: &str) -> Vec<usize> {
        smallest_rings(&parse_smiles(s).unwrap())
            .iter()
            .map(Vec::len)
            .collect()
    }

    #[test]
    fn acyclic_has_no_rings() {
        assert!(sizes("CCO").is_empty());
        assert!(sizes("C").is_empty());
    }

    #[test]
    fn simple_and_fused() {
        assert_eq!(sizes("C1CCCCC1"), vec![6]);
        assert_eq!(sizes("c1ccc2ccccc2c1"), vec![6, 6]);
        assert_eq!(sizes("Cn1cnc2c1c(=O)n(C)c(=O)n2C"), vec![5, 6]);
        // Norbornane: two 5-rings, not the 6-ring.
        assert_eq!(sizes("C1CC2CCC1C2"), vec![5, 5]);
        // Cubane: rank 5, all 4-rings.
        assert_eq!(sizes("C12C3C4C1C5C2C3C45"), vec![4; 5]);
    }

    #[test]
    fn ring_order_is_a_cycle() {
        let g = parse_smiles("C1CCCCC1").unwrap();
        let ring = &smallest_rings(&g)[0];
        assert_eq!(ring, &vec![0, 1, 2, 3, 4, 5]);
        for i in 0..ring.len() {
            assert!(g.bond_between(ring[i], ring[(i + 1) % ring.len()]).is_some());
        }
    }
}

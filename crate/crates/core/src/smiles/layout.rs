//! Deterministic 2D coordinates in bond-length units.
//!
//! Phase one walks the graph depth-first, laying chains out as 120° zigzags
//! and every ring system as regular polygons fused edge to edge. Phase two
//! runs a fixed number of force-directed steps: a unit-length spring per
//! bond and inverse-square repulsion between non-bonded atoms.

use std::f64::consts::PI;

use serde::Serialize;

use super::rings::smallest_rings;
use super::{BondOrder, MolGraph};

pub const RELAX_ITERATIONS: usize = 200;
pub const RELAX_STEP: f64 = 0.05;
const SPRING: f64 = 1.0;
const REPULSION: f64 = 0.03;
// Repulsion is evaluated at no less than this distance.
const MIN_REPULSION_DISTANCE: f64 = 0.2;
const MAX_MOVE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layout2D {
    pub coords: Vec<[f64; 2]>,
}

impl Layout2D {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// `(min_x, min_y, max_x, max_y)`, or `None` for an empty layout.
    pub fn bounds(&self) -> Option<(f64, f64, f64, f64)> {
        let first = self.coords.first()?;
        Some(self.coords.iter().fold(
            (first[0], first[1], first[0], first[1]),
            |(a, b, c, d), p| (a.min(p[0]), b.min(p[1]), c.max(p[0]), d.max(p[1])),
        ))
    }

    /// Smallest distance between any two atoms (`inf` with fewer than two).
    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.coords.len() {
            for j in (i + 1)..self.coords.len() {
                best = best.min(dist(self.coords[i], self.coords[j]));
            }
        }
        best
    }
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

fn scale(a: [f64; 2], s: f64) -> [f64; 2] {
    [a[0] * s, a[1] * s]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    norm(sub(a, b))
}

fn unit(a: [f64; 2]) -> Option<[f64; 2]> {
    let n = norm(a);
    (n > 1e-12).then(|| scale(a, 1.0 / n))
}

fn polar(angle: f64) -> [f64; 2] {
    [angle.cos(), angle.sin()]
}

fn angle_of(a: [f64; 2]) -> f64 {
    a[1].atan2(a[0])
}

pub fn layout2d(g: &MolGraph) -> Layout2D {
    let n = g.atoms.len();
    if n == 0 {
        return Layout2D { coords: Vec::new() };
    }
    let mut placer = Placer::new(g);
    placer.run();
    let mut coords: Vec<[f64; 2]> = placer
        .pos
        .into_iter()
        .map(|p| p.expect("graph is connected"))
        .collect();
    relax(g, &mut coords);

    let c = coords.iter().fold([0.0, 0.0], |acc, p| add(acc, *p));
    let c = scale(c, 1.0 / n as f64);
    for p in coords.iter_mut() {
        *p = sub(*p, c);
    }
    if coords[0][0] < 0.0 {
        for p in coords.iter_mut() {
            p[0] = -p[0];
        }
    }
    for p in coords.iter_mut() {
        // Avoid -0.0 so identical layouts also print identically.
        p.iter_mut().for_each(|v| *v += 0.0);
    }
    Layout2D { coords }
}

struct Placer<'a> {
    g: &'a MolGraph,
    adj: Vec<Vec<usize>>,
    rings: Vec<Vec<usize>>,
    ring_system: Vec<usize>,
    atom_system: Vec<Option<usize>>,
    ring_center: Vec<Option<[f64; 2]>>,
    pos: Vec<Option<[f64; 2]>>,
    // Side of the last zigzag turn, per atom.
    turn: Vec<f64>,
}

impl<'a> Placer<'a> {
    fn new(g: &'a MolGraph) -> Self {
        let n = g.atoms.len();
        let rings = smallest_rings(g);

        // Group rings sharing an atom into systems.
        let mut ring_system: Vec<usize> = (0..rings.len()).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            p[i] = r;
            r
        }
        for i in 0..rings.len() {
            for j in (i + 1)..rings.len() {
                if rings[i].iter().any(|a| rings[j].contains(a)) {
                    let (ri, rj) = (find(&mut ring_system, i), find(&mut ring_system, j));
                    ring_system[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        for i in 0..rings.len() {
            ring_system[i] = find(&mut ring_system, i);
        }
        let mut atom_system = vec![None; n];
        for (i, ring) in rings.iter().enumerate() {
            for &a in ring {
                atom_system[a] = Some(ring_system[i]);
            }
        }

        Self {
            g,
            adj: g.adjacency(),
            ring_center: vec![None; rings.len()],
            rings,
            ring_system,
            atom_system,
            pos: vec![None; n],
            turn: vec![1.0; n],
        }
    }

    fn run(&mut self) {
        let mut stack = Vec::new();
        if self.atom_system[0].is_some() {
            self.pos[0] = Some([0.0, 0.0]);
            stack.extend(self.place_system(0, [1.0, 0.0]).into_iter().rev());
        } else {
            self.pos[0] = Some([0.0, 0.0]);
            stack.push(0);
        }
        while let Some(atom) = stack.pop() {
            let placed_children = self.branch_out(atom);
            stack.extend(placed_children.into_iter().rev());
        }
    }

    fn is_linear(&self, atom: usize) -> bool {
        let mut doubles = 0;
        for b in self.g.bonds.iter().filter(|b| b.touches(atom)) {
            match b.order {
                BondOrder::Triple => return true,
                BondOrder::Double => doubles += 1,
                _ => {}
            }
        }
        doubles >= 2
    }

    /// Places the unplaced neighbours of `atom`; returns atoms to expand next.
    fn branch_out(&mut self, atom: usize) -> Vec<usize> {
        let here = self.pos[atom].unwrap();
        let children: Vec<usize> = self.adj[atom]
            .iter()
            .copied()
            .filter(|&w| self.pos[w].is_none())
            .collect();
        if children.is_empty() {
            return Vec::new();
        }
        let placed: Vec<[f64; 2]> = self.adj[atom]
            .iter()
            .filter_map(|&w| self.pos[w])
            .collect();
        let m = children.len();

        let directions: Vec<f64> = if placed.is_empty() {
            match m {
                1 => vec![-PI / 6.0],
                2 => vec![-PI / 6.0, PI / 2.0],
                _ => (0..m).map(|k| -PI / 6.0 + 2.0 * PI * k as f64 / m as f64).collect(),
            }
        } else if placed.len() == 1 && self.atom_system[atom].is_none() {
            let theta = angle_of(sub(here, placed[0]));
            let side = -self.turn[atom];
            match m {
                1 if self.is_linear(atom) => vec![theta],
                1 => vec![theta + side * PI / 3.0],
                2 => vec![theta + side * PI / 3.0, theta - side * PI / 3.0],
                _ => (1..=m)
                    .map(|k| theta + PI + 2.0 * PI * k as f64 / (m + 1) as f64)
                    .collect(),
            }
        } else {
            let mean = scale(placed.iter().fold([0.0, 0.0], |a, p| add(a, *p)), 1.0 / placed.len() as f64);
            let out = angle_of(unit(sub(here, mean)).unwrap_or([1.0, 0.0]));
            let spread = PI / 3.0;
            (0..m)
                .map(|k| out + spread * (k as f64 - (m - 1) as f64 / 2.0))
                .collect()
        };

        let mut next = Vec::new();
        for (&child, &angle) in children.iter().zip(&directions) {
            if self.pos[child].is_some() {
                // Placed meanwhile as part of a ring system.
                continue;
            }
            let dir = polar(angle);
            self.pos[child] = Some(add(here, dir));
            let side = angle - angle_of(sub(here, self.parent_pos(atom, here)));
            self.turn[child] = if side.sin() >= 0.0 { 1.0 } else { -1.0 };
            if self.atom_system[child].is_some() {
                next.extend(self.place_system(child, dir));
            } else {
                next.push(child);
            }
        }
        next
    }

    fn parent_pos(&self, atom: usize, here: [f64; 2]) -> [f64; 2] {
        self.adj[atom]
            .iter()
            .filter_map(|&w| self.pos[w])
            .next()
            .unwrap_or(sub(here, [1.0, 0.0]))
    }

    /// Lays out the ring system containing `anchor` (already placed), with
    /// the first ring's centre in direction `dir` from the anchor. Returns the
    /// system's atoms in placement order.
    fn place_system(&mut self, anchor: usize, dir: [f64; 2]) -> Vec<usize> {
        let system = self.atom_system[anchor].unwrap();
        let members: Vec<usize> = (0..self.rings.len())
            .filter(|&r| self.ring_system[r] == system)
            .collect();
        let first = *members
            .iter()
            .find(|&&r| self.rings[r].contains(&anchor))
            .unwrap();
        let mut order = Vec::new();

        let k = self.rings[first].len();
        let radius = 0.5 / (PI / k as f64).sin();
        let center = add(self.pos[anchor].unwrap(), scale(dir, radius));
        self.place_regular(first, center, anchor, 1.0, &mut order);

        let mut pending: Vec<usize> = members.into_iter().filter(|&r| r != first).collect();
        while !pending.is_empty() {
            let (idx, _) = pending
                .iter()
                .enumerate()
                .map(|(i, &r)| (i, self.rings[r].iter().filter(|a| self.pos[**a].is_some()).count()))
                .max_by_key(|&(i, count)| (count, std::cmp::Reverse(i)))
                .unwrap();
            let ring = pending.remove(idx);
            self.place_fused(ring, &mut order);
        }
        order
    }

    fn place_regular(
        &mut self,
        ring: usize,
        center: [f64; 2],
        start: usize,
        sense: f64,
        order: &mut Vec<usize>,
    ) {
        let atoms = self.rings[ring].clone();
        let k = atoms.len();
        let radius = 0.5 / (PI / k as f64).sin();
        let s = atoms.iter().position(|&a| a == start).unwrap();
        let a0 = angle_of(sub(self.pos[start].unwrap(), center));
        for j in 0..k {
            let atom = atoms[(s + j) % k];
            if self.pos[atom].is_none() {
                let angle = a0 + sense * 2.0 * PI * j as f64 / k as f64;
                self.pos[atom] = Some(add(center, scale(polar(angle), radius)));
            }
            if !order.contains(&atom) {
                order.push(atom);
            }
        }
        self.ring_center[ring] = Some(center);
    }

    fn placed_center_containing(&self, atoms: &[usize]) -> Option<[f64; 2]> {
        (0..self.rings.len())
            .filter(|&r| atoms.iter().all(|a| self.rings[r].contains(a)))
            .find_map(|r| self.ring_center[r])
    }

    fn place_fused(&mut self, ring: usize, order: &mut Vec<usize>) {
        let atoms = self.rings[ring].clone();
        let k = atoms.len();
        let placed: Vec<bool> = atoms.iter().map(|&a| self.pos[a].is_some()).collect();
        let count = placed.iter().filter(|p| **p).count();
        if count == k {
            let c = atoms.iter().fold([0.0, 0.0], |acc, &a| add(acc, self.pos[a].unwrap()));
            self.ring_center[ring] = Some(scale(c, 1.0 / k as f64));
            return;
        }

        // Placed atoms as one contiguous arc [s .. e] in ring order.
        let arc_start = (0..k).find(|&i| placed[i] && !placed[(i + k - 1) % k]);
        let arc = arc_start.and_then(|s| {
            let len = (0..k).take_while(|j| placed[(s + j) % k]).count();
            (len == count).then_some((s, len))
        });

        match arc {
            Some((s, 1)) => {
                // Spiro junction.
                let pivot = atoms[s];
                let p = self.pos[pivot].unwrap();
                let away = self
                    .placed_center_containing(&[pivot])
                    .and_then(|c| unit(sub(p, c)))
                    .unwrap_or([1.0, 0.0]);
                let radius = 0.5 / (PI / k as f64).sin();
                self.place_regular(ring, add(p, scale(away, radius)), pivot, 1.0, order);
            }
            Some((s, 2)) => {
                let (a, b) = (atoms[s], atoms[(s + 1) % k]);
                let (pa, pb) = (self.pos[a].unwrap(), self.pos[b].unwrap());
                let edge = sub(pb, pa);
                let len = norm(edge).max(1e-6);
                let mid = scale(add(pa, pb), 0.5);
                let mut normal = [-edge[1] / len, edge[0] / len];
                if let Some(c) = self.placed_center_containing(&[a, b]) {
                    if (sub(mid, c)[0] * normal[0] + sub(mid, c)[1] * normal[1]) < 0.0 {
                        normal = scale(normal, -1.0);
                    }
                }
                let apothem = len / (2.0 * (PI / k as f64).tan());
                let center = add(mid, scale(normal, apothem));
                let ra = sub(pa, center);
                let rb = sub(pb, center);
                let sense = if ra[0] * rb[1] - ra[1] * rb[0] >= 0.0 { 1.0 } else { -1.0 };
                self.place_regular(ring, center, a, sense, order);
            }
            _ => {
                // Bridged or irregular: bow the missing atoms out between the
                // placed neighbours and let relaxation sort it out.
                let placed_atoms: Vec<usize> = (0..k).filter(|&i| placed[i]).map(|i| atoms[i]).collect();
                let c = scale(
                    placed_atoms.iter().fold([0.0, 0.0], |acc, &a| add(acc, self.pos[a].unwrap())),
                    1.0 / placed_atoms.len() as f64,
                );
                let away = self
                    .placed_center_containing(&placed_atoms[..1])
                    .and_then(|rc| unit(sub(c, rc)))
                    .unwrap_or([0.0, 1.0]);
                let missing: Vec<usize> = (0..k).filter(|&i| !placed[i]).map(|i| atoms[i]).collect();
                let r = missing.len();
                let side = [-away[1], away[0]];
                for (j, &atom) in missing.iter().enumerate() {
                    let t = (j as f64 + 1.0) / (r as f64 + 1.0) - 0.5;
                    let p = add(add(c, scale(away, 0.9)), scale(side, t * r as f64));
                    self.pos[atom] = Some(p);
                }
                for &a in &atoms {
                    if !order.contains(&a) {
                        order.push(a);
                    }
                }
                let rc = atoms.iter().fold([0.0, 0.0], |acc, &a| add(acc, self.pos[a].unwrap()));
                self.ring_center[ring] = Some(scale(rc, 1.0 / k as f64));
            }
        }
    }
}

fn relax(g: &MolGraph, coords: &mut [[f64; 2]]) {
    let n = coords.len();
    let mut bonded = vec![false; n * n];
    for b in &g.bonds {
        bonded[b.a * n + b.b] = true;
        bonded[b.b * n + b.a] = true;
    }
    let mut force = vec![[0.0f64; 2]; n];
    for _ in 0..RELAX_ITERATIONS {
        force.iter_mut().for_each(|f| *f = [0.0, 0.0]);
        for b in &g.bonds {
            let d = sub(coords[b.b], coords[b.a]);
            let len = norm(d);
            let dir = if len > 1e-9 { scale(d, 1.0 / len) } else { fallback(b.a, b.b) };
            let f = scale(dir, SPRING * (len - 1.0));
            force[b.a] = add(force[b.a], f);
            force[b.b] = sub(force[b.b], f);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if bonded[i * n + j] {
                    continue;
                }
                let d = sub(coords[j], coords[i]);
                let len = norm(d);
                let dir = if len > 1e-9 { scale(d, 1.0 / len) } else { fallback(i, j) };
                let r = len.max(MIN_REPULSION_DISTANCE);
                let f = scale(dir, REPULSION / (r * r));
                force[i] = sub(force[i], f);
                force[j] = add(force[j], f);
            }
        }
        for (p, f) in coords.iter_mut().zip(&force) {
            let mut step = scale(*f, RELAX_STEP);
            let len = norm(step);
            if len > MAX_MOVE {
                step = scale(step, MAX_MOVE / len);
            }
            *p = add(*p, step);
        }
    }
}

/// Fixed direction used to separate coincident atoms.
fn fallback(i: usize, j: usize) -> [f64; 2] {
    polar((i * 31 + j * 17) as f64 * 2.399_963_229_728_653)
}

//! Fundamental cycles of the network graph and angle-sum consistency.
//!
//! Edges are merged links (one per connected bus pair), matching the one
//! `(c_ij, s_ij)` pair per link used by the relaxations. A link's angle is
//! `θ_from − θ_to`; a cycle sums its links' angles with orientation `±1`
//! according to the traversal direction.

use std::collections::VecDeque;

use serde::Serialize;

use crate::network::{Link, NetworkCase};
use crate::socp::RelaxationSolution;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CycleError {
    #[error("network is disconnected: bus {0} is not reachable from the slack")]
    Disconnected(usize),
    #[error("branch {0} has zero series impedance")]
    ZeroImpedance(usize),
    #[error("angle of link {from}-{to} is undefined (c = s = 0)")]
    UndefinedAngle { from: usize, to: usize },
    #[error("no branch joins buses {0} and {1}")]
    NoLink(usize, usize),
    #[error("bus {0} does not exist")]
    UnknownBus(usize),
    #[error("cycle must start and end at the same bus and visit at least three buses")]
    NotClosed,
    #[error("expected {expected} values per link, got {got}")]
    Length { expected: usize, got: usize },
}

/// A closed walk through the network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cycle {
    /// `(link index, +1 | -1)`; `+1` means traversed `from → to`.
    pub edges: Vec<(usize, i8)>,
    /// Bus indices visited, first repeated at the end.
    pub buses: Vec<usize>,
}

impl Cycle {
    /// External bus numbers joined by `-`, e.g. `1-2-5-1`.
    pub fn label<T>(&self, case: &NetworkCase<T>) -> String {
        self.buses
            .iter()
            .map(|&b| case.buses[b].id.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }

    /// The same cycle walked the other way round.
    pub fn reversed(&self) -> Cycle {
        Cycle {
            edges: self.edges.iter().rev().map(|&(k, o)| (k, -o)).collect(),
            buses: self.buses.iter().rev().copied().collect(),
        }
    }

    /// `Σ orientation · angle[link]`.
    pub fn sum<T: Scalar>(&self, link_angles: &[T]) -> T {
        self.edges
            .iter()
            .map(|&(k, o)| if o > 0 { link_angles[k] } else { -link_angles[k] })
            .sum()
    }
}

/// Spanning tree plus one cycle per non-tree link.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleBasis {
    /// Link indices of the BFS tree, ascending.
    pub tree_edges: Vec<usize>,
    pub cycles: Vec<Cycle>,
}

struct Tree {
    // parent bus and connecting link per bus; root has none
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
}

fn bfs_tree<T>(n: usize, root: usize, links: &[Link<T>]) -> Result<Tree, usize> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (k, l) in links.iter().enumerate() {
        adj[l.from].push((l.to, k));
        adj[l.to].push((l.from, k));
    }
    let mut parent = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    depth[root] = 0;
    let mut q = VecDeque::from([root]);
    while let Some(u) = q.pop_front() {
        for &(v, k) in &adj[u] {
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                parent[v] = Some((u, k));
                q.push_back(v);
            }
        }
    }
    match depth.iter().position(|&d| d == usize::MAX) {
        Some(b) => Err(b),
        None => Ok(Tree { parent, depth }),
    }
}

fn orientation<T>(l: &Link<T>, from: usize) -> i8 {
    if l.from == from {
        1
    } else {
        -1
    }
}

impl CycleBasis {
    /// Fundamental basis of the graph `links` over `n` buses, with the BFS
    /// tree rooted at `root`. Neighbours are visited in link order, so the
    /// basis is deterministic.
    pub fn from_links<T>(n: usize, root: usize, links: &[Link<T>]) -> Result<Self, CycleError> {
        let tree = bfs_tree(n, root, links).map_err(CycleError::Disconnected)?;
        let mut in_tree = vec![false; links.len()];
        for &(_, k) in tree.parent.iter().flatten() {
            in_tree[k] = true;
        }
        let mut cycles = Vec::new();
        for (k, l) in links.iter().enumerate() {
            if in_tree[k] {
                continue;
            }
            // climb from both ends to the common ancestor
            let (mut a, mut b) = (l.from, l.to);
            let mut up: Vec<(usize, usize)> = Vec::new(); // (bus reached, link) from `from`
            let mut down: Vec<(usize, usize)> = Vec::new(); // same, from `to`
            while a != b {
                if tree.depth[a] >= tree.depth[b] {
                    let (p, e) = tree.parent[a].expect("non-root has a parent");
                    up.push((p, e));
                    a = p;
                } else {
                    let (p, e) = tree.parent[b].expect("non-root has a parent");
                    down.push((p, e));
                    b = p;
                }
            }
            let mut buses = vec![l.from];
            let mut edges = Vec::new();
            let mut cur = l.from;
            for &(p, e) in &up {
                edges.push((e, orientation(&links[e], cur)));
                buses.push(p);
                cur = p;
            }
            // walk down towards `to`: reverse the climb from `to`
            let mut path_to: Vec<usize> = vec![l.to];
            path_to.extend(down.iter().map(|&(p, _)| p));
            for (i, &(_, e)) in down.iter().enumerate().rev() {
                let next = path_to[i];
                edges.push((e, orientation(&links[e], cur)));
                buses.push(next);
                cur = next;
            }
            edges.push((k, orientation(l, cur)));
            buses.push(l.from);
            cycles.push(Cycle { edges, buses });
        }
        let tree_edges = (0..links.len()).filter(|&k| in_tree[k]).collect();
        Ok(CycleBasis { tree_edges, cycles })
    }
}

/// Fundamental cycle basis of `case`, BFS tree rooted at the slack bus.
pub fn fundamental_cycles<T: Scalar>(case: &NetworkCase<T>) -> Result<CycleBasis, CycleError> {
    let links = case.links().map_err(CycleError::ZeroImpedance)?;
    CycleBasis::from_links(case.buses.len(), case.slack(), &links)
}

/// Builds the cycle through the given external bus numbers, e.g.
/// `[1, 2, 5, 1]`.
pub fn cycle_from_buses<T>(
    case: &NetworkCase<T>,
    links: &[Link<T>],
    ids: &[usize],
) -> Result<Cycle, CycleError> {
    if ids.len() < 4 || ids.first() != ids.last() {
        return Err(CycleError::NotClosed);
    }
    let idx: Vec<usize> = ids
        .iter()
        .map(|&id| {
            case.buses
                .iter()
                .position(|b| b.id == id)
                .ok_or(CycleError::UnknownBus(id))
        })
        .collect::<Result<_, _>>()?;
    let mut edges = Vec::with_capacity(idx.len() - 1);
    for w in idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        let k = links
            .iter()
            .position(|l| (l.from == a && l.to == b) || (l.from == b && l.to == a))
            .ok_or(CycleError::NoLink(case.buses[a].id, case.buses[b].id))?;
        edges.push((k, orientation(&links[k], a)));
    }
    Ok(Cycle { edges, buses: idx })
}

/// Where the per-link angles of a cycle report come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AngleSource {
    /// `atan2(s_ij, c_ij)` per link.
    RecoveredFromCS,
    /// `θ_i − θ_j` from the solution's angle variables.
    DirectTheta,
}

impl AngleSource {
    pub fn label(self) -> &'static str {
        match self {
            AngleSource::RecoveredFromCS => "recovered_cs",
            AngleSource::DirectTheta => "direct_theta",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleReport<T> {
    pub sums: Vec<T>,
    pub max_abs_sum: T,
    pub source: AngleSource,
}

/// `atan2(s, c)` per link.
pub fn link_angles_cs<T: Scalar>(cij: &[T], sij: &[T]) -> Vec<T> {
    cij.iter().zip(sij).map(|(&c, &s)| s.atan2(c)).collect()
}

/// `θ_from − θ_to` per link.
pub fn link_angles_theta<T: Scalar>(theta: &[T], links: &[Link<T>]) -> Vec<T> {
    links.iter().map(|l| theta[l.from] - theta[l.to]).collect()
}

/// Oriented angle sums over `cycles`.
pub fn cycle_sums<T: Scalar>(
    cycles: &[Cycle],
    link_angles: &[T],
    source: AngleSource,
) -> CycleReport<T> {
    let sums: Vec<T> = cycles.iter().map(|c| c.sum(link_angles)).collect();
    let max_abs_sum = sums.iter().fold(T::zero(), |m, s| m.max(s.abs()));
    CycleReport {
        sums,
        max_abs_sum,
        source,
    }
}

/// The per-link angles a solution implies: its `θ` variables when present,
/// otherwise `atan2(s_ij, c_ij)`.
pub fn solution_link_angles<T: Scalar>(
    solution: &RelaxationSolution<T>,
    links: &[Link<T>],
) -> Result<(Vec<T>, AngleSource), CycleError> {
    if solution.cij.len() != links.len() {
        return Err(CycleError::Length {
            expected: links.len(),
            got: solution.cij.len(),
        });
    }
    Ok(match &solution.theta {
        Some(theta) => (link_angles_theta(theta, links), AngleSource::DirectTheta),
        None => (
            link_angles_cs(&solution.cij, &solution.sij),
            AngleSource::RecoveredFromCS,
        ),
    })
}

/// Bus angles from `(c_ij, s_ij)` along the BFS tree from the slack:
/// `θ_to = θ_from − atan2(s_ij, c_ij)` on every tree link.
///
/// Non-tree links are ignored, so the result is consistent on every cycle
/// by construction; use [`cycle_sums`] with [`link_angles_cs`] to see how
/// far the raw link angles are from that.
pub fn recover_angles<T: Scalar>(
    solution: &RelaxationSolution<T>,
    case: &NetworkCase<T>,
) -> Result<Vec<T>, CycleError> {
    let links = case.links().map_err(CycleError::ZeroImpedance)?;
    if solution.cij.len() != links.len() || solution.sij.len() != links.len() {
        return Err(CycleError::Length {
            expected: links.len(),
            got: solution.cij.len(),
        });
    }
    let n = case.buses.len();
    let root = case.slack();
    let tree = bfs_tree(n, root, &links).map_err(CycleError::Disconnected)?;
    // visit in BFS order so parents are set first
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| tree.depth[i]);
    let mut theta = vec![T::zero(); n];
    for &v in &order {
        let Some((p, k)) = tree.parent[v] else { continue };
        let (c, s) = (solution.cij[k], solution.sij[k]);
        if c == T::zero() && s == T::zero() {
            return Err(CycleError::UndefinedAngle {
                from: case.buses[links[k].from].id,
                to: case.buses[links[k].to].id,
            });
        }
        let d = s.atan2(c);
        theta[v] = if links[k].from == p {
            theta[p] - d
        } else {
            theta[p] + d
        };
    }
    Ok(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_case;

    fn ring(n: usize, chords: &[(usize, usize)]) -> NetworkCase<f64> {
        let mut text = String::from("mpc.baseMVA = 100;\nmpc.bus = [\n");
        for i in 1..=n {
            let kind = if i == 1 { 3 } else { 1 };
            text += &format!("{i} {kind} 0 0 0 0 1 1 0 1 1 1.1 0.9;\n");
        }
        text += "];\nmpc.gen = [1 0 0 1 -1 1 100 1 1 0];\nmpc.branch = [\n";
        let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i, i + 1)).collect();
        edges.extend_from_slice(chords);
        for (a, b) in edges {
            text += &format!("{a} {b} 0 0.1 0 0 0 0 0 0 1 -360 360;\n");
        }
        text += "];\n";
        parse_case(&text).unwrap()
    }

    #[test]
    fn path_has_no_cycles() {
        let basis = fundamental_cycles(&ring(5, &[])).unwrap();
        assert!(basis.cycles.is_empty());
        assert_eq!(basis.tree_edges.len(), 4);
    }

    #[test]
    fn triangle_has_one_closed_cycle() {
        let case = ring(3, &[(3, 1)]);
        let basis = fundamental_cycles(&case).unwrap();
        assert_eq!(basis.cycles.len(), 1);
        let c = &basis.cycles[0];
        assert_eq!(c.edges.len(), 3);
        assert_eq!(c.buses.first(), c.buses.last());
        // a potential difference around the loop telescopes to zero
        let links = case.links().unwrap();
        let theta = [0.0, -0.1, 0.3];
        assert!(c.sum(&link_angles_theta(&theta, &links)).abs() < 1e-15);
    }

    #[test]
    fn explicit_cycle_matches_walk() {
        let case = ring(4, &[(4, 1), (2, 4)]);
        let links = case.links().unwrap();
        let c = cycle_from_buses(&case, &links, &[1, 2, 4, 1]).unwrap();
        assert_eq!(c.buses, vec![0, 1, 3, 0]);
        assert_eq!(c.edges[0], (0, 1));
        assert_eq!(c.edges[1], (4, 1));
        assert_eq!(c.reversed().edges[0], (3, -1));
        assert_eq!(
            cycle_from_buses(&case, &links, &[1, 3, 4, 1]),
            Err(CycleError::NoLink(1, 3))
        );
        assert_eq!(cycle_from_buses(&case, &links, &[1, 2, 4]), Err(CycleError::NotClosed));
    }
}

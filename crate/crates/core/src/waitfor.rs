//! Wait-for graph over controllers and its elementary cycles.

use std::collections::BTreeSet;

use crate::engine::World;
use crate::topology::{Coord, Place};

/// Longest cycle reported by [`wait_for_graph`].
pub const MAX_CYCLE_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WaitForGraph {
    pub nodes: Vec<Coord>,
    pub edges: Vec<(Coord, Coord)>,
    /// Elementary cycles, each starting at its smallest coordinate.
    pub cycles: Vec<Vec<Coord>>,
}

impl WaitForGraph {
    pub fn successors(&self, c: Coord) -> impl Iterator<Item = Coord> + '_ {
        self.edges
            .iter()
            .filter(move |(u, _)| *u == c)
            .map(|&(_, v)| v)
    }

    pub fn has_cycle_through(&self, members: &[Coord]) -> bool {
        let want: BTreeSet<_> = members.iter().copied().collect();
        self.cycles
            .iter()
            .any(|cy| cy.iter().copied().collect::<BTreeSet<_>>() == want)
    }
}

/// Edge `u -> v` when `u` holds a packet routed to `v` and `v` has no free
/// capacity. Only the slot packet can leave a non-parallel node; a parallel
/// node may also be waiting with any queued packet.
pub fn wait_for_graph(world: &World<'_>) -> WaitForGraph {
    let grid = world.grid();
    let v = grid.variant();
    let mut edges = BTreeSet::new();
    for node in world.nodes() {
        let waiting = node.packets().take(if v.parallel { usize::MAX } else { 1 });
        for p in waiting {
            let Some(axis) = p.output_at(node.coord) else {
                continue;
            };
            if let Place::Node(to) = grid.next_place(node.coord, axis) {
                if world.node(to).capacity_free(v) == 0 {
                    edges.insert((node.coord, to));
                }
            }
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    let nodes: Vec<Coord> = edges
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let cycles = elementary_cycles(&nodes, &edges, MAX_CYCLE_LEN);
    WaitForGraph {
        nodes,
        edges,
        cycles,
    }
}

/// Enumerates elementary cycles of length at most `max_len`, each rooted at
/// its minimum vertex so every cycle appears once.
pub fn elementary_cycles(
    nodes: &[Coord],
    edges: &[(Coord, Coord)],
    max_len: usize,
) -> Vec<Vec<Coord>> {
    let succ = |c: Coord| edges.iter().filter(move |(u, _)| *u == c).map(|&(_, v)| v);
    let mut cycles = Vec::new();
    for &root in nodes {
        let mut path = vec![root];
        let mut stack: Vec<Vec<Coord>> = vec![succ(root).collect()];
        while let Some(frontier) = stack.last_mut() {
            let Some(next) = frontier.pop() else {
                stack.pop();
                path.pop();
                continue;
            };
            if next == root {
                cycles.push(path.clone());
            } else if next > root && !path.contains(&next) && path.len() < max_len {
                path.push(next);
                stack.push(succ(next).collect());
            }
        }
    }
    cycles.sort();
    cycles
}

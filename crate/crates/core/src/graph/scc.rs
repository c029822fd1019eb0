use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::set_to_mask;
use crate::model::{Game, StateSet};

/// Strongly connected components in reverse topological order: a component
/// appears after every component it has an edge into. Among components that
/// are ready at the same time, the one holding the smallest state index
/// comes first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccDecomposition {
    pub components: Vec<Vec<usize>>,
    /// `None` for states outside the decomposed set.
    pub component_of: Vec<Option<usize>>,
}

impl SccDecomposition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// SCCs of the graph on `restrict_to` whose edges are the positive-probability
/// moves of all actions; edges leaving `restrict_to` are ignored.
pub fn sccs(game: &Game, restrict_to: &StateSet) -> SccDecomposition {
    let members = set_to_mask(restrict_to, game.len());
    decompose(game.len(), &members, |s, out| {
        out.extend(game.successors(s).into_iter().filter(|&t| members[t]));
    })
}

/// Iterative Tarjan followed by a deterministic topological ordering of the
/// condensation.
pub(crate) fn decompose<F>(n: usize, members: &[bool], mut successors: F) -> SccDecomposition
where
    F: FnMut(usize, &mut Vec<usize>),
{
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            let mut out = Vec::new();
            if members[s] {
                successors(s, &mut out);
                out.retain(|&t| members[t]);
                out.sort_unstable();
                out.dedup();
            }
            out
        })
        .collect();

    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut raw: Vec<Vec<usize>> = Vec::new();
    let mut comp = vec![None; n];

    for root in 0..n {
        if !members[root] || index[root] != UNVISITED {
            continue;
        }
        // (node, next child position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let id = raw.len();
                let mut members_of = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp[w] = Some(id);
                    members_of.push(w);
                    if w == v {
                        break;
                    }
                }
                members_of.sort_unstable();
                raw.push(members_of);
            }
        }
    }

    // Order the condensation: a component is ready once all components it
    // points to have been emitted.
    let k = raw.len();
    let mut pending = vec![0usize; k];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (c, states) in raw.iter().enumerate() {
        let mut outs: Vec<usize> = states
            .iter()
            .flat_map(|&s| adj[s].iter().map(|&t| comp[t].unwrap()))
            .filter(|&d| d != c)
            .collect();
        outs.sort_unstable();
        outs.dedup();
        pending[c] = outs.len();
        for d in outs {
            preds[d].push(c);
        }
    }
    let mut ready: BinaryHeap<Reverse<(usize, usize)>> = (0..k)
        .filter(|&c| pending[c] == 0)
        .map(|c| Reverse((raw[c][0], c)))
        .collect();
    let mut order = Vec::with_capacity(k);
    while let Some(Reverse((_, c))) = ready.pop() {
        order.push(c);
        for &p in &preds[c] {
            pending[p] -= 1;
            if pending[p] == 0 {
                ready.push(Reverse((raw[p][0], p)));
            }
        }
    }

    let mut renumber = vec![0; k];
    for (new, &old) in order.iter().enumerate() {
        renumber[old] = new;
    }
    let components = order.iter().map(|&c| raw[c].clone()).collect();
    let component_of = comp.into_iter().map(|c| c.map(|c| renumber[c])).collect();
    SccDecomposition {
        components,
        component_of,
    }
}

//! Brute-force enumeration of admissible event orderings, used to check the
//! scheduler. Loops are unrolled into copies of their body and the result is
//! the set of linear extensions of the unrolled precedence graph.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::dynamics::{BehaviorModel, EventId};

/// Largest unrolled instance the enumerator accepts.
pub const MAX_UNROLLED: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("unrolled behavior has {size} event firings (limit {MAX_UNROLLED})")]
    TooLarge { size: usize },
    #[error("cycle without a repeat bound through {0:?}")]
    UnboundedLoop(Vec<EventId>),
    #[error("unsupported loop structure at {from} -> {to}")]
    LoopShape { from: EventId, to: EventId },
    #[error("edge endpoint {0} is not an event of the behavior")]
    Undef(EventId),
}

impl OracleError {
    pub fn code(&self) -> &'static str {
        match self {
            OracleError::TooLarge { .. } => "TOO_LARGE",
            OracleError::UnboundedLoop(_) => "UNBOUNDED_LOOP",
            OracleError::LoopShape { .. } => "LOOP_SHAPE",
            OracleError::Undef(_) => "UNDEF",
        }
    }
}

/// All orderings with `[repeat]` loops unrolled once.
pub fn enumerate_orderings(
    behavior: &BehaviorModel,
    limit: usize,
) -> Result<BTreeSet<Vec<EventId>>, OracleError> {
    enumerate_orderings_with(behavior, limit, 1)
}

/// All orderings (at most `limit` of them), unrolling `[repeat]` loops
/// `default_bound` times.
pub fn enumerate_orderings_with(
    behavior: &BehaviorModel,
    limit: usize,
    default_bound: u32,
) -> Result<BTreeSet<Vec<EventId>>, OracleError> {
    let events: Vec<EventId> = {
        let set: BTreeSet<EventId> = behavior.events.iter().copied().collect();
        set.into_iter().collect()
    };
    let idx = |e: EventId| events.binary_search(&e).map_err(|_| OracleError::Undef(e));
    let n = events.len();

    let mut fwd: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut backs = Vec::new();
    for e in &behavior.edges {
        let (f, t) = (idx(e.from)?, idx(e.to)?);
        match e.repeat {
            None => fwd[f].push(t),
            Some(r) => backs.push((f, t, r.resolve(default_bound).max(1) as usize)),
        }
    }
    if let Some(cycle) = find_cycle(&fwd) {
        return Err(OracleError::UnboundedLoop(
            cycle.into_iter().map(|i| events[i]).collect(),
        ));
    }

    let reach: Vec<Vec<bool>> = (0..n).map(|s| descendants(&fwd, s)).collect();
    // loop index and copy count of every event
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut copies = vec![1usize; n];
    for (li, &(tail, head, k)) in backs.iter().enumerate() {
        if !reach[head][tail] {
            return Err(OracleError::LoopShape {
                from: events[tail],
                to: events[head],
            });
        }
        for v in 0..n {
            if reach[head][v] && reach[v][tail] {
                if owner[v].is_some() {
                    return Err(OracleError::LoopShape {
                        from: events[tail],
                        to: events[head],
                    });
                }
                owner[v] = Some(li);
                copies[v] = k;
            }
        }
    }

    let size: usize = copies.iter().sum();
    if size > MAX_UNROLLED {
        return Err(OracleError::TooLarge { size });
    }
    let mut base = vec![0usize; n];
    for v in 1..n {
        base[v] = base[v - 1] + copies[v - 1];
    }
    let node = |v: usize, i: usize| base[v] + i;
    let mut label = vec![EventId(0); size];
    for v in 0..n {
        for i in 0..copies[v] {
            label[node(v, i)] = events[v];
        }
    }

    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); size];
    for u in 0..n {
        for &v in &fwd[u] {
            if owner[u].is_some() && owner[u] == owner[v] {
                for i in 0..copies[u] {
                    succ[node(u, i)].push(node(v, i));
                }
            } else {
                succ[node(u, copies[u] - 1)].push(node(v, 0));
            }
        }
    }
    for &(tail, head, k) in &backs {
        for i in 0..k - 1 {
            succ[node(tail, i)].push(node(head, i + 1));
        }
    }

    let mut indeg = vec![0usize; size];
    for s in &succ {
        for &d in s {
            indeg[d] += 1;
        }
    }
    let mut found = BTreeSet::new();
    let mut prefix = Vec::with_capacity(size);
    extensions(
        &succ,
        &mut indeg,
        &mut vec![false; size],
        &mut prefix,
        &label,
        limit,
        &mut found,
    );
    Ok(found)
}

fn extensions(
    succ: &[Vec<usize>],
    indeg: &mut [usize],
    used: &mut [bool],
    prefix: &mut Vec<usize>,
    label: &[EventId],
    limit: usize,
    found: &mut BTreeSet<Vec<EventId>>,
) {
    if found.len() >= limit {
        return;
    }
    if prefix.len() == succ.len() {
        found.insert(prefix.iter().map(|&i| label[i]).collect());
        return;
    }
    for v in 0..succ.len() {
        if used[v] || indeg[v] != 0 {
            continue;
        }
        used[v] = true;
        prefix.push(v);
        for &d in &succ[v] {
            indeg[d] -= 1;
        }
        extensions(succ, indeg, used, prefix, label, limit, found);
        for &d in &succ[v] {
            indeg[d] += 1;
        }
        prefix.pop();
        used[v] = false;
    }
}

/// Vertices reachable from `s`, including `s` itself.
fn descendants(adj: &[Vec<usize>], s: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![s];
    while let Some(u) = stack.pop() {
        if !seen[u] {
            seen[u] = true;
            stack.extend(&adj[u]);
        }
    }
    seen
}

fn find_cycle(adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    // 0 = unvisited, 1 = on stack, 2 = done
    fn dfs(
        u: usize,
        adj: &[Vec<usize>],
        state: &mut [u8],
        stack: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        state[u] = 1;
        stack.push(u);
        for &v in &adj[u] {
            if state[v] == 1 {
                let at = stack.iter().position(|&x| x == v).unwrap();
                let mut cycle = stack[at..].to_vec();
                cycle.push(v);
                return Some(cycle);
            }
            if state[v] == 0 {
                if let Some(c) = dfs(v, adj, state, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        state[u] = 2;
        None
    }
    let mut state = vec![0u8; adj.len()];
    for s in 0..adj.len() {
        if state[s] == 0 {
            if let Some(c) = dfs(s, adj, &mut state, &mut Vec::new()) {
                return Some(c);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Repeat;

    fn e(i: usize) -> EventId {
        EventId(i)
    }

    #[test]
    fn chain_has_one_ordering() {
        let mut b = BehaviorModel::over(6);
        for i in 0..5 {
            b.precede(e(i), e(i + 1));
        }
        let all = enumerate_orderings(&b, usize::MAX).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(
            all.into_iter().next().unwrap(),
            (0..6).map(e).collect::<Vec<_>>()
        );
    }

    #[test]
    fn two_branches_under_a_source() {
        let mut b = BehaviorModel::over(3);
        b.precede(e(0), e(1)).precede(e(0), e(2));
        assert_eq!(enumerate_orderings(&b, usize::MAX).unwrap().len(), 2);
    }

    #[test]
    fn limit_caps_the_result() {
        let b = BehaviorModel::over(5);
        assert_eq!(enumerate_orderings(&b, 7).unwrap().len(), 7);
        assert_eq!(enumerate_orderings(&b, usize::MAX).unwrap().len(), 120);
    }

    #[test]
    fn loops_unroll() {
        let mut b = BehaviorModel::over(3);
        b.precede(e(0), e(1))
            .repeat(e(1), e(0), Repeat::Default)
            .precede(e(1), e(2));
        let all = enumerate_orderings_with(&b, usize::MAX, 3).unwrap();
        assert_eq!(all.len(), 1);
        let seq: Vec<usize> = all
            .into_iter()
            .next()
            .unwrap()
            .iter()
            .map(|x| x.0)
            .collect();
        assert_eq!(seq, [0, 1, 0, 1, 0, 1, 2]);
    }

    #[test]
    fn errors() {
        let mut b = BehaviorModel::over(2);
        b.precede(e(0), e(1)).precede(e(1), e(0));
        assert_eq!(
            enumerate_orderings(&b, 1).unwrap_err().code(),
            "UNBOUNDED_LOOP"
        );
        let b = BehaviorModel::over(13);
        assert_eq!(enumerate_orderings(&b, 1).unwrap_err().code(), "TOO_LARGE");
        let mut b = BehaviorModel::over(1);
        b.repeat(e(0), e(0), Repeat::AtMost(13));
        assert_eq!(enumerate_orderings(&b, 1).unwrap_err().code(), "TOO_LARGE");
    }
}

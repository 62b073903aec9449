//! Iterative Tarjan strongly-connected-component decomposition, shared by
//! chain classification and accepting-set detection.

/// Strongly connected components of the digraph on `0..n` whose out-edges are
/// produced by `edges`. Components are returned with ascending member lists,
/// ordered by their smallest member, which makes the output deterministic
/// regardless of traversal order.
pub(crate) fn strongly_connected_components<F>(n: usize, mut edges: F) -> Vec<Vec<usize>>
where
    F: FnMut(usize) -> Vec<usize>,
{
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut components: Vec<Vec<usize>> = Vec::new();

    // Explicit DFS frames: (node, out-neighbour list, cursor).
    let mut frames: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        frames.push((root, edges(root), 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(frame) = frames.last_mut() {
            let v = frame.0;
            if frame.2 < frame.1.len() {
                let w = frame.1[frame.2];
                frame.2 += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, edges(w), 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    components.push(comp);
                }
                frames.pop();
                if let Some(parent) = frames.last() {
                    let p = parent.0;
                    low[p] = low[p].min(low[v]);
                }
            }
        }
    }

    components.sort_by_key(|c| c[0]);
    components
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scc_of(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
        strongly_connected_components(n, |v| {
            edges
                .iter()
                .filter(|&&(a, _)| a == v)
                .map(|&(_, b)| b)
                .collect()
        })
    }

    #[test]
    fn singletons_without_edges() {
        assert_eq!(scc_of(3, &[]), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn one_cycle() {
        assert_eq!(scc_of(3, &[(0, 1), (1, 2), (2, 0)]), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn chain_splits_into_singletons() {
        assert_eq!(
            scc_of(3, &[(0, 1), (1, 2)]),
            vec![vec![0], vec![1], vec![2]]
        );
    }

    #[test]
    fn two_cycles_with_bridge() {
        let comps = scc_of(5, &[(0, 1), (1, 0), (1, 2), (2, 3), (3, 4), (4, 2)]);
        assert_eq!(comps, vec![vec![0, 1], vec![2, 3, 4]]);
    }

    #[test]
    fn self_loop_is_still_a_singleton() {
        assert_eq!(scc_of(2, &[(0, 0), (0, 1)]), vec![vec![0], vec![1]]);
    }

    #[test]
    fn components_partition_the_nodes() {
        let comps = scc_of(
            7,
            &[(0, 1), (1, 0), (2, 3), (3, 2), (4, 5), (5, 6), (6, 4), (1, 2)],
        );
        let mut all: Vec<usize> = comps.into_iter().flatten().collect();
        all.sort_unstable();
        assert_eq!(all, (0..7).collect::<Vec<_>>());
    }
}

//! K-leader selection by greedy post coverage.

use std::collections::BTreeSet;

use crate::graph::DiffusionNetwork;

/// Greedy hill climbing: repeatedly add the user acting on the most
/// uncovered posts, ties to the smaller id. Stops early once no user adds
/// coverage.
pub fn identify_leaders(users: usize, actions: &[(usize, usize)], k: usize) -> Vec<usize> {
    let mut posts_of: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); users];
    for &(u, s) in actions {
        posts_of[u].insert(s);
    }
    let mut covered = BTreeSet::new();
    let mut chosen = Vec::new();
    for _ in 0..k {
        let mut best: Option<(usize, usize)> = None;
        for (u, posts) in posts_of.iter().enumerate() {
            if chosen.contains(&u) {
                continue;
            }
            let gain = posts.difference(&covered).count();
            if gain > 0 && best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, u));
            }
        }
        let Some((_, u)) = best else { break };
        covered.extend(posts_of[u].iter().copied());
        chosen.push(u);
    }
    chosen
}

/// Number of distinct posts acted on by `set`.
pub fn coverage(actions: &[(usize, usize)], set: &[usize]) -> usize {
    actions.iter().filter(|(u, _)| set.contains(u)).map(|&(_, s)| s).collect::<BTreeSet<_>>().len()
}

/// User-post action edges from the engagements of a diffusion network.
pub fn actions_from_diffusion(net: &DiffusionNetwork) -> Vec<(usize, usize)> {
    let set: BTreeSet<(usize, usize)> = net.engagements.iter().map(|g| (g.user, g.post)).collect();
    set.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_user_covers_all() {
        let actions = [(1, 0), (1, 1), (1, 2), (0, 1)];
        assert_eq!(identify_leaders(2, &actions, 1), vec![1]);
    }

    #[test]
    fn disjoint_coverage() {
        // A = 0 on posts 0..3, B = 1 on 3,4, C = 2 on 4,5 overlapping B.
        let actions = [(0, 0), (0, 1), (0, 2), (1, 3), (1, 4), (2, 4), (2, 5)];
        assert_eq!(identify_leaders(3, &actions, 2), vec![0, 1]);
        assert_eq!(coverage(&actions, &[0, 1]), 5);
    }

    #[test]
    fn stops_without_gain() {
        assert_eq!(identify_leaders(3, &[(0, 0), (1, 0)], 3), vec![0]);
    }
}

//! Blocks users to contain an independent-cascade spread, comparing the
//! greedy choice with degree heuristics.

use std::collections::BTreeSet;

use misinfo_netkit::mitigate::icm::{exact_influence, greedy_block, heuristic_block, BlockCriterion, IcmInstance};
use misinfo_netkit::mitigate::Digraph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = Digraph::new(
        9,
        [(0, 1, 0.6), (0, 2, 0.6), (1, 3, 0.5), (2, 3, 0.5), (3, 4, 0.9), (4, 5, 0.8), (4, 6, 0.8), (2, 7, 0.3), (7, 8, 0.9)],
    );
    let inst = IcmInstance { reps: 5000, seed: 1, ..IcmInstance::new(g.clone(), vec![0]) };
    println!("influence without blocking {:.4}", exact_influence(&g, &[0], &BTreeSet::new()));
    let res = greedy_block(&inst, 1)?;
    println!("greedy blocks {:?}: {:.4} -> {:.4}", res.blocked, res.baseline.mean, res.influence.mean);
    for c in [BlockCriterion::OutDegree, BlockCriterion::InDegree, BlockCriterion::ProbabilityMass] {
        let pick: BTreeSet<usize> = heuristic_block(&inst, 1, c).into_iter().collect();
        println!("{c:?} blocks {pick:?}: {:.4}", exact_influence(&g, &[0], &pick));
    }
    Ok(())
}

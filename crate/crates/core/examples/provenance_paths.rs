//! Recovers the source of a cascade from the set of users who reposted.

use misinfo_netkit::mitigate::provenance::{find_provenance_paths, PathMetric, ProvenanceConfig};
use misinfo_netkit::mitigate::Digraph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // 0 seeds two branches; 9 is an unrelated user who follows 5.
    let g = Digraph::new(
        10,
        [(0, 1, 0.8), (0, 2, 0.7), (1, 3, 0.6), (1, 4, 0.5), (2, 5, 0.9), (5, 6, 0.4), (5, 7, 0.6), (9, 5, 0.2), (3, 8, 0.5)],
    );
    let reposted = [4, 6, 7, 8];
    for metric in [PathMetric::Hops, PathMetric::Probability] {
        let res = find_provenance_paths(&g, &reposted, &ProvenanceConfig { k: 1, transmitters: 4, metric })?;
        println!("{metric:?}: sources {:?}  utility {:.4}", res.sources, res.utility);
        for (u, v, p) in &res.edges {
            println!("  {u} -> {v}  p {p}");
        }
    }
    Ok(())
}

//! Allocates a mitigation budget over campaigners against a self-exciting
//! fake-news process.

use nalgebra::{DMatrix, DVector};
use misinfo_netkit::mitigate::hawkes::{greedy_campaign, hawkes_simulate, CampaignConfig, HawkesCampaign};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = 5;
    // adjacency[(i, j)] = 1 when user i follows user j.
    let mut adjacency = DMatrix::zeros(m, m);
    for i in 1..m {
        adjacency[(i, 0)] = 1.0;
        adjacency[(i, (i % (m - 1)) + 1)] = 1.0;
    }
    let excitation = adjacency.transpose() * 0.25;
    let c = HawkesCampaign {
        adjacency,
        base_fake: DVector::from_element(m, 0.2),
        base_mitigation: DVector::from_element(m, 0.02),
        excitation,
        decay: 1.0,
        horizon: 10.0,
        stages: 2,
    };
    c.validate()?;
    let trace = hawkes_simulate(&c, None, 4)?;
    println!("one rollout: {} fake events, {} mitigation events", trace.fake.events.len(), trace.mitigation.events.len());
    let plan = greedy_campaign(&c, &[0, 1, 2], &CampaignConfig { budget: 1.0, chunks: 4, rollouts: 20, seed: 4 })?;
    println!("baseline reward {:.4}  planned reward {:.4}", plan.baseline, plan.reward);
    for (stage, alloc) in plan.allocation.iter().enumerate() {
        println!("stage {stage}: {alloc:.2?}");
    }
    Ok(())
}

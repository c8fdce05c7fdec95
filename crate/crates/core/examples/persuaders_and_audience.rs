//! Picks opinion leaders by action coverage and estimates an audience size
//! from two independent samples.

use misinfo_netkit::graph::{generate_synthetic, SyntheticSpec};
use misinfo_netkit::mitigate::audience::{independent_samples, scale_up_estimate};
use misinfo_netkit::mitigate::leaders::{actions_from_diffusion, coverage, identify_leaders};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = generate_synthetic(&SyntheticSpec { seed: 13, users: 50, ..SyntheticSpec::default() })?;
    let actions = actions_from_diffusion(&bundle.diffusion);
    for k in 1..=4 {
        let leaders = identify_leaders(bundle.users.count, &actions, k);
        println!("k={k}  leaders {leaders:?}  coverage {}", coverage(&actions, &leaders));
    }

    let (a, b) = independent_samples(1000, 200, 13);
    let n = scale_up_estimate(&a, &b)?;
    println!("samples of 200 overlap in {}  estimated population {n:.1} (true 1000)", a.intersection(&b).count());
    Ok(())
}

//! First-order LINE vectors and MNMF communities on a planted friendship
//! network.

use misinfo_netkit::graph::{generate_synthetic, planted_community, SyntheticSpec};
use misinfo_netkit::social::{line_fit, mnmf_fit, modularity, modularity_matrix, symmetric_adjacency, LineConfig, MnmfConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SyntheticSpec { seed: 5, users: 40, communities: 2, p_intra: 0.35, p_inter: 0.02, ..SyntheticSpec::default() };
    let bundle = generate_synthetic(&spec)?;
    let net = &bundle.friendship;

    let (line, loss) = line_fit(net, &LineConfig { dim: 4, epochs: 150, seed: 5, ..LineConfig::default() })?;
    println!("LINE loss {:.3} -> {:.3}", loss.first().unwrap(), loss.last().unwrap());
    let &(a, b) = net.edges.first().unwrap();
    println!("p1 of edge ({a},{b}) = {:.3}", line.p1(a, b));

    let (model, terms) = mnmf_fit(net, &MnmfConfig { k: 4, communities: 2, iters: 200, seed: 5, ..MnmfConfig::default() })?;
    let found = model.communities();
    let planted: Vec<usize> = (0..spec.users).map(|i| planted_community(&spec, i)).collect();
    let b = modularity_matrix(net)?;
    let two_e = symmetric_adjacency(net).sum();
    println!("MNMF rounds {}  tr(H^T H) {:.6}", terms.len(), terms.last().unwrap().trace_hth);
    println!("modularity found {:.3}  planted {:.3}", modularity(&b, two_e, &found), modularity(&b, two_e, &planted));
    Ok(())
}

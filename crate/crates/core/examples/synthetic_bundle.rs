//! Generates a planted-partition bundle, saves it in both formats and
//! reloads it.

use misinfo_netkit::graph::{adjacency, generate_synthetic, load_networks, save_networks, BundleFormat, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SyntheticSpec { seed: 42, users: 40, news: 12, communities: 2, ..SyntheticSpec::default() };
    let bundle = generate_synthetic(&spec)?;
    println!(
        "users {}  news {}  posts {}  friendship edges {}  diffusion edges {}  kg triples {}",
        bundle.users.count,
        bundle.news.count,
        bundle.posts.count,
        bundle.friendship.edges.len(),
        bundle.diffusion.edges.len(),
        bundle.knowledge.triples.len()
    );
    let a = adjacency(&bundle.friendship);
    println!("adjacency symmetric: {}", a.transpose() == a);

    let dir = std::env::temp_dir().join("misinfo-netkit-example");
    std::fs::create_dir_all(&dir)?;
    let json = dir.join("bundle.json");
    save_networks(&bundle, &json, BundleFormat::Json)?;
    let back = load_networks(&json, BundleFormat::Json)?;
    println!("json round trip equal: {}", back == bundle);

    let tsv = dir.join("edges.tsv");
    save_networks(&bundle, &tsv, BundleFormat::EdgeTsv)?;
    let edges = load_networks(&tsv, BundleFormat::EdgeTsv)?;
    println!(
        "edge list reload: friendship equal {}  diffusion equal {}",
        edges.friendship.edges == bundle.friendship.edges,
        edges.diffusion.edges == bundle.diffusion.edges
    );
    Ok(())
}

//! Scores claims against a small knowledge graph with the single-path and
//! flow-based truth values.

use misinfo_netkit::graph::KnowledgeGraph;
use misinfo_netkit::kgcheck::{knowledge_flow, truth_value_path, CapacityRule, Claim, PathConfig};

const KG: &str = "\
barack_obama\tspouse\tmichelle_obama
barack_obama\tborn_in\thonolulu
honolulu\tlocated_in\thawaii
hawaii\tpart_of\tusa
michelle_obama\tborn_in\tchicago
chicago\tlocated_in\tillinois
illinois\tpart_of\tusa
barack_obama\tmember_of\tdemocratic_party
michelle_obama\tmember_of\tdemocratic_party
joe_biden\tmember_of\tdemocratic_party
joe_biden\tborn_in\tscranton
scranton\tlocated_in\tpennsylvania
pennsylvania\tpart_of\tusa
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kg = KnowledgeGraph::from_tsv(KG)?;
    let claims = [
        ("barack_obama", "nationality", "usa"),
        ("barack_obama", "born_in", "honolulu"),
        ("michelle_obama", "lives_in", "hawaii"),
        ("joe_biden", "born_in", "chicago"),
        ("barack_obama", "born_in", "atlantis"),
    ];
    println!("{:<48} {:>8} {:>6} {:>8}", "claim", "path", "paths", "flow");
    for (s, p, o) in claims {
        let c = Claim { subject: s.into(), predicate: p.into(), object: o.into() };
        let path = truth_value_path(&kg, &c, &PathConfig::default());
        let flow = knowledge_flow(&kg, &c, CapacityRule::Specificity, false);
        let note = path.warning.unwrap_or_default();
        println!("{:<48} {:>8.4} {:>6} {:>8.4} {}", format!("{s} {p} {o}"), path.tau, path.n_paths, flow.tau, note);
    }
    Ok(())
}

//! Joint news/user/publisher embedding, then a ridge classifier on the
//! news factors.

use misinfo_netkit::embed::{fit_joint, predict, train_classifier, EmbedConfig};
use misinfo_netkit::graph::{generate_synthetic, SyntheticSpec};
use misinfo_netkit::harness::evaluate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = generate_synthetic(&SyntheticSpec { seed: 7, news: 30, ..SyntheticSpec::default() })?;
    let labels = bundle.interaction.labels.clone();
    // Hide every third label from the fit and score those items afterwards.
    let hidden: Vec<usize> = (0..labels.len()).filter(|j| j % 3 == 0 && labels[*j] != 0).collect();
    let mut visible = bundle.interaction.clone();
    for &j in &hidden {
        visible.labels[j] = 0;
    }
    let cfg = EmbedConfig { dim: 6, max_iters: 300, seed: 7, ..EmbedConfig::default() };
    let fit = fit_joint(&visible, &bundle.friendship, &cfg)?;
    let first = fit.trace.first().unwrap().total;
    let last = fit.trace.last().unwrap().total;
    println!("objective {first:.3} -> {last:.3} in {} rounds (converged {})", fit.trace.len() - 1, fit.converged);

    let d = &fit.factors.news;
    let model = train_classifier(d, &visible.labels, 0.1)?;
    let preds: Vec<i8> = hidden.iter().map(|&j| predict(d.row(j).transpose().as_slice(), &model)).collect();
    let truth: Vec<i8> = hidden.iter().map(|&j| labels[j]).collect();
    let m = evaluate(&preds, &truth)?;
    println!("held-out items {}  accuracy {:.3}  f1 {:.3}", hidden.len(), m.accuracy, m.f1);
    Ok(())
}

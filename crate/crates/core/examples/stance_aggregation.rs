//! Beta-reputation aggregation of likes with a few labeled news items.

use misinfo_netkit::stance::{init, iterate, planted_stance, NewsVerdict, Priors};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = planted_stance(21, 30, 20, 0.2, 0.5, 0.05);
    println!("labeled fake {:?}  labeled true {:?}", p.labeled_fake, p.labeled_true);
    let mut table = init(&p.network, &p.labeled_fake, &p.labeled_true, Priors::default(), false)?;
    let out = iterate(&mut table, 500, 1e-10);
    println!("rounds {}  converged {}", out.rounds, out.converged);
    let mut right = 0;
    let mut total = 0;
    for j in 0..p.fake.len() {
        if p.labeled_fake.contains(&j) || p.labeled_true.contains(&j) {
            continue;
        }
        let (verdict, q) = table.predict(j)?;
        let ok = (verdict == NewsVerdict::Fake) == p.fake[j];
        right += usize::from(ok);
        total += 1;
        println!("news {j:>2}  q {q:+.3}  {verdict:?}  planted fake {}", p.fake[j]);
    }
    println!("unlabeled accuracy {:.3}", right as f64 / total as f64);
    Ok(())
}

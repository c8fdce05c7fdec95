//! Signed credibility propagation over posts about one news item.

use misinfo_netkit::credprop::{news_verdict, planted_instance, propagate};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mu = 0.6;
    let file = planted_instance(9, 30, 0.7, mu)?;
    let problem = file.to_problem(mu)?;
    let run = propagate(&problem, 1e-12, 10_000);
    let exact = problem.closed_form();
    println!("iterations {}  converged {}", run.iterations, run.converged);
    println!("max gap to the direct solve {:.2e}", (&run.credibility - &exact).amax());
    for (i, p) in file.posts.iter().enumerate().take(6) {
        println!("post {:>2}  t0 {:+.3}  T* {:+.3}", i, p.t0, run.credibility[i]);
    }
    let v = news_verdict(run.credibility.as_slice())?;
    println!("news score {:+.3}  fake {}", v.score, v.fake);
    Ok(())
}

//! Maximal coupling of two laws on four points: the coupling table, its
//! disagreement against the total variation distance, and samples.
//!
//! cargo run --example maximal_coupling

use gmeasure::coupling::{maximal_coupling, total_variation, FiniteDist, MaximalCoupling};
use gmeasure::rng::stream_rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mu = vec![0.4, 0.3, 0.2, 0.1];
    let nu = vec![0.1, 0.2, 0.3, 0.4];
    let (p, q) = (FiniteDist::new(mu.clone())?, FiniteDist::new(nu.clone())?);

    let table = maximal_coupling(&p, &q)?;
    for i in 0..table.size() {
        let row: Vec<String> = (0..table.size()).map(|j| format!("{:.3}", table.get(i, j))).collect();
        println!("  {}", row.join("  "));
    }
    println!("P(X != Y) = {:.4}, TV = {:.4}", table.disagreement(), total_variation(&mu, &nu));

    let sampler = MaximalCoupling::new(&p, &q)?;
    let mut rng = stream_rng(1, 0);
    let draws = 100_000;
    let differ = (0..draws).filter(|_| {
        let (x, y) = sampler.sample(&mut rng);
        x != y
    });
    println!("empirical P(X != Y) over {draws} draws = {:.4}", differ.count() as f64 / draws as f64);
    Ok(())
}

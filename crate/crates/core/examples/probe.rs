use toric_bath::dynamics::*;
use toric_bath::energetics::pair_creation_cost;
use toric_bath::stats::*;
use toric_bath::*;

fn main() {
    let l = 8;
    let base = Simulation::uniform(ModelParams::new(1.0, 1.0, 1.0, l)).unwrap();
    let c = base.lattice.center_stabilizer();
    let mu = base.kernel.mu(c);
    let d0 = pair_creation_cost(mu, 1.0, 1.0);
    println!("mu={mu} d0={d0} corner mu={}", base.kernel.mu(0));
    let mut xs = vec![];
    let mut ys = vec![];
    for bd in [6.0, 8.0, 10.0, 12.0] {
        let beta = bd / d0;
        let s = Simulation::uniform(ModelParams::new(1.0, 1.0, beta, l)).unwrap();
        let t0 = std::time::Instant::now();
        let opts = LifetimeOptions {
            horizon: 1e9,
            ..Default::default()
        };
        let tr = lifetime_ensemble(&s, &MatchingDecoder, &opts, 1, 64).unwrap();
        let lt: Vec<f64> = tr.iter().map(|t| t.lifetime).collect();
        let ev: Vec<f64> = tr.iter().map(|t| t.num_events as f64).collect();
        let m = median(&lt).unwrap();
        println!(
            "bd={bd} beta={beta:.4} median={m:.4} events={:.0} cens={} {:?}",
            median(&ev).unwrap(),
            tr.iter().filter(|t| t.censored).count(),
            t0.elapsed()
        );
        xs.push(bd);
        ys.push(m.ln());
    }
    println!("{:?}", linear_fit(&xs, &ys).unwrap());
}

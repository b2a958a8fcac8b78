use toric_bath::dynamics::*;
use toric_bath::stats::*;
use toric_bath::*;

fn main() {
    let l: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().unwrap())
        .unwrap_or(8);
    let bscale: f64 = std::env::args()
        .nth(2)
        .map(|s| s.parse().unwrap())
        .unwrap_or(10.0);
    let lat = CodeLattice::new(l).unwrap();
    let probe = Simulation::new(
        lat.clone(),
        build_pattern_square(&lat, 1.0, 0.5).unwrap(),
        ModelParams::new(1.0, 1.0, 1.0, l),
    )
    .unwrap();
    let bar_half = hindering_barrier(&probe);
    let beta = bscale / (2.0 * bar_half); // so that aw=0.0 -> bscale
    println!("barrier(0.5)={bar_half} beta={beta}");
    let mut xs = vec![];
    let mut ys = vec![];
    for aw in [0.8, 0.65, 0.5, 0.35] {
        let pat = build_pattern_square(&lat, 1.0, aw).unwrap();
        let s = Simulation::new(lat.clone(), pat, ModelParams::new(1.0, 1.0, beta, l)).unwrap();
        let bar = hindering_barrier(&s);
        let pairs = default_hindering_pairs(&lat);
        let t0 = std::time::Instant::now();
        let out = ensemble(64, |i| {
            run_hindering(&s, &pairs, &HinderOptions::default(), 9, i)
        })
        .unwrap();
        let times: Vec<f64> = out.iter().map(|o| o.time).collect();
        let m = median(&times).unwrap();
        let mut ends = std::collections::BTreeMap::new();
        for o in &out {
            *ends.entry(format!("{:?}", o.end)).or_insert(0) += 1;
        }
        println!(
            "aw={aw} bar={bar:.3} beta*bar={:.2} median={m:.4e} ev={} {:?} {:?}",
            beta * bar,
            median(&out.iter().map(|o| o.num_events as f64).collect::<Vec<_>>()).unwrap(),
            ends,
            t0.elapsed()
        );
        xs.push(bar);
        ys.push(m.ln());
    }
    println!("{:?} beta={beta}", linear_fit(&xs, &ys).unwrap());
    // relaxation from strong site adjacent to weak cluster
    for aw in [0.5, 0.35] {
        let pat = build_pattern_square(&lat, 1.0, aw).unwrap();
        let s = Simulation::new(lat.clone(), pat, ModelParams::new(1.0, 1.0, beta, l)).unwrap();
        let strong = lat.stabilizer_index(Species::S, l / 2 - 2, l / 2);
        let far = l / 2 - 3;
        let partner = lat.stabilizer_index(Species::S, far, far);
        let out = ensemble(200, |i| {
            run_tracked(&s, &[(strong, partner)], &HinderOptions::default(), 5, i)
        })
        .unwrap();
        let ok = out
            .iter()
            .filter(|o| o.end == TrackEnd::ReachedWeak && o.label == Some(0))
            .count();
        let mut ends = std::collections::BTreeMap::new();
        for o in &out {
            *ends.entry(format!("{:?}{:?}", o.end, o.label)).or_insert(0) += 1;
        }
        println!(
            "relax aw={aw} beta*bar={:.2} p={} {:?}",
            beta * hindering_barrier(&s),
            ok as f64 / 200.0,
            ends
        );
    }
}

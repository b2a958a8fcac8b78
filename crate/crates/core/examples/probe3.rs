use toric_bath::dynamics::*;
use toric_bath::energetics::*;
use toric_bath::*;

fn main() {
    let l = 8;
    let base = Simulation::uniform(ModelParams::new(1.0, 1.0, 1.0, l)).unwrap();
    let d0 = pair_creation_cost(base.kernel.mu(base.lattice.center_stabilizer()), 1.0, 1.0);
    for bd in [3.0, 5.0] {
        let s = Simulation::uniform(ModelParams::new(1.0, 1.0, bd / d0, l)).unwrap();
        let sol = solve_self_consistent(bd, 1e-13).unwrap();
        let eq = run_equilibrium(&s, 20000, 2000.0, 20, 3).unwrap();
        println!(
            "bd={bd} n*={} kmc={} se={} events={}",
            sol.n_star(),
            eq.mean_density,
            eq.std_error,
            eq.num_events
        );
    }
}

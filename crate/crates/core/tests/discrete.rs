use levysym::grid::{combine, BinaryOp};
use levysym::rearrange::{dominates, increasing_rearrange, rearrange_fn};
use levysym::trap_discrete::{
    brute_wn, compare_instances, random_instance, verify_ri, wn_eval, DiscreteInstance, InstanceShape, RandomInstance,
    DEFAULT_TOL_FACTOR,
};
use levysym::{Grid, GridField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, m: usize, steps: usize) -> DiscreteInstance<f64> {
    let g = Grid::new(1, 4.0, m).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_instance(&mut rng, &g, &InstanceShape::fitting(&g, steps)).unwrap()
}

fn with_traps(inst: &DiscreteInstance<f64>, traps: Vec<GridField<f64>>) -> DiscreteInstance<f64> {
    DiscreteInstance::new(inst.phi().clone(), traps, inst.kernels().to_vec(), inst.sigma()).unwrap()
}

/// `1 - (1 - a)(1 - b)`
fn either(a: &GridField<f64>, b: &GridField<f64>) -> GridField<f64> {
    let keep = combine(&a.complement_to(1.0).unwrap(), &b.complement_to(1.0).unwrap(), BinaryOp::Product).unwrap();
    keep.complement_to(1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn recursion_matches_brute_force(seed in any::<u64>(), steps in 0usize..=2, m in prop::sample::select(vec![8usize, 16, 32])) {
        let inst = instance(seed, m, steps);
        let a = wn_eval(&inst).unwrap();
        let b = brute_wn(&inst).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300), "{} vs {}", a, b);
    }

    #[test]
    fn larger_traps_kill_more(seed in any::<u64>(), steps in 1usize..=3) {
        let inst = instance(seed, 64, steps);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let i = rng.random_range(0..inst.traps().len());
        let mut traps = inst.traps().to_vec();
        let extra = levysym::trap_discrete::BoxField::random(&mut rng, 1, 1.0, 1.0, 0.2).sample(inst.grid());
        traps[i] = either(&traps[i], &extra);
        let before = wn_eval(&inst).unwrap();
        let after = wn_eval(&with_traps(&inst, traps)).unwrap();
        prop_assert!(after >= before - 1e-12 * inst.scale(), "{} < {}", after, before);
    }

    #[test]
    fn one_more_step_kills_more(seed in any::<u64>(), steps in 1usize..=3) {
        let g = Grid::new(1, 4.0, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let long = RandomInstance::draw(&mut rng, 1, &InstanceShape::fitting(&g, steps)).realize(&g).unwrap();
        let n = long.steps();
        let short = DiscreteInstance::new(long.phi().clone(), long.traps()[..n].to_vec(), long.kernels()[..n - 1].to_vec(), 1.0).unwrap();
        prop_assert!(wn_eval(&long).unwrap() >= wn_eval(&short).unwrap() - 1e-12 * long.scale());
    }

    #[test]
    fn factored_traps_rearranged_separately(seed in any::<u64>(), steps in 1usize..=2) {
        let inst = instance(seed, 128, steps);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let extra: Vec<GridField<f64>> = inst
            .traps()
            .iter()
            .map(|_| levysym::trap_discrete::BoxField::random(&mut rng, 1, 1.0, 1.0, 0.1).sample(inst.grid()))
            .collect();
        let raw = with_traps(&inst, inst.traps().iter().zip(&extra).map(|(a, b)| either(a, b)).collect());
        let star = inst.rearranged().unwrap();
        let star_traps = star
            .traps()
            .iter()
            .zip(&extra)
            .map(|(a, b)| either(a, &rearrange_fn(b).unwrap()))
            .collect();
        let rep = compare_instances(&raw, &with_traps(&star, star_traps), DEFAULT_TOL_FACTOR).unwrap();
        prop_assert!(rep.holds, "{:?}", rep);
    }

    #[test]
    fn any_dominating_start_with_the_same_deficit(seed in any::<u64>(), steps in 1usize..=2) {
        let inst = instance(seed, 128, steps);
        let sigma = inst.sigma();
        let base = increasing_rearrange(inst.phi(), sigma).unwrap();
        // move some deficit from an outer cell onto a cell nearer the centre
        let g = *inst.grid();
        let order = g.radial_order();
        let deficit: Vec<f64> = order.iter().map(|&c| sigma - base.value(c)).collect();
        let outer = deficit.iter().rposition(|&d| d > 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let inner = rng.random_range(0..=outer);
        let room = base.value(order[inner]);
        let delta = deficit[outer].min(room) * rng.random::<f64>();
        let mut values = base.values().to_vec();
        values[order[outer]] += delta;
        values[order[inner]] -= delta;
        let varphi = GridField::new(g, values, sigma).unwrap();
        prop_assume!(dominates(&varphi, inst.phi(), sigma).unwrap().holds);
        let star = inst.rearranged().unwrap().with_phi(varphi).unwrap();
        let rep = compare_instances(&inst, &star, DEFAULT_TOL_FACTOR).unwrap();
        prop_assert!(rep.holds, "{:?}", rep);
    }

    #[test]
    fn rearranged_instance_kills_less(seed in any::<u64>(), steps in 0usize..=3) {
        let rep = verify_ri(&instance(seed, 128, steps)).unwrap();
        prop_assert!(rep.holds, "{:?}", rep);
    }
}

use proptest::prelude::*;

use lossbound::analytics::{solve_phi, tau_pmf, Buffer, SystemModel};
use lossbound::distributions::ReliabilityClass;
use lossbound::ordering::{check_dominance, Claim, EmpiricalSample};
use lossbound::queue_sim::{run_busy_period, SimulationOptions};
use lossbound::streams::replication_stream;
use lossbound::DistributionSpec;

fn law() -> impl Strategy<Value = DistributionSpec> {
    prop_oneof![
        (0.2f64..5.0).prop_map(|r| DistributionSpec::exponential(r).unwrap()),
        (0.2f64..5.0).prop_map(|v| DistributionSpec::deterministic(v).unwrap()),
        (1u32..6, 0.5f64..5.0).prop_map(|(k, r)| DistributionSpec::erlang(k, r).unwrap()),
        (0.05f64..0.95, 0.2f64..2.0, 2.0f64..8.0)
            .prop_map(|(p, a, b)| DistributionSpec::hyperexponential(vec![p, 1.0 - p], vec![a, b]).unwrap()),
        (0.0f64..1.0, 0.1f64..2.0).prop_map(|(lo, w)| DistributionSpec::uniform(lo, lo + w).unwrap()),
        (0.3f64..4.0, 0.5f64..3.0).prop_map(|(k, r)| DistributionSpec::gamma(k, r).unwrap()),
        (0.5f64..3.0, 0.3f64..2.0).prop_map(|(k, s)| DistributionSpec::weibull(k, s).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lst_is_a_decreasing_map_into_unit_interval(b in law(), s in 0.0f64..5.0, ds in 0.01f64..2.0) {
        let at = b.lst(s).unwrap();
        let further = b.lst(s + ds).unwrap();
        prop_assert!(at > 0.0 && at <= 1.0 + 1e-12);
        prop_assert!(further <= at + 1e-12);
        prop_assert!((b.lst(0.0).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn class_sets_respect_containment(b in law()) {
        let c = b.classify();
        if c.contains(ReliabilityClass::Ihr) {
            prop_assert!(c.contains(ReliabilityClass::Nbu));
        }
        if c.contains(ReliabilityClass::Dhr) {
            prop_assert!(c.contains(ReliabilityClass::Nwu));
        }
    }

    #[test]
    fn cdf_is_monotone(b in law(), x in 0.0f64..10.0, dx in 0.0f64..3.0) {
        prop_assert!(b.cdf(x) <= b.cdf(x + dx) + 1e-15);
        prop_assert!((b.cdf(x) + b.survival(x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tau_pmf_sums_to_one(b in law(), lambda in 0.2f64..2.0) {
        // keep the mean count moderate so 600 terms cover the mass
        prop_assume!(lambda * b.mean() < 20.0);
        let total: f64 = (0..600).map(|k| tau_pmf(&b, lambda, k).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-7, "total {}", total);
    }

    #[test]
    fn phi_is_the_least_fixed_point(a in law(), load in 0.1f64..0.95) {
        let mu = 1.0 / (a.mean() * load);
        let phi = solve_phi(&a, mu).unwrap();
        prop_assert!((0.0..1.0).contains(&phi));
        let residual = a.lst(mu - mu * phi).unwrap() - phi;
        prop_assert!(residual.abs() < 1e-9, "residual {}", residual);
    }

    #[test]
    fn busy_period_records_conserve_customers(a in law(), b in law(), n in 0u32..5, seed in 0u64..1000) {
        let model = SystemModel::finite(a, b, n);
        let opts = SimulationOptions { event_cap: 5_000, collect_distances: true, collect_inserted_counts: true };
        let mut rng = replication_stream(seed, 0);
        let rec = run_busy_period(&model, &mut rng, &opts);
        prop_assert_eq!(rec.crossing_counts.len(), n as usize + 2);
        prop_assert_eq!(rec.crossing_counts[0], 1);
        prop_assert_eq!(rec.losses, rec.crossing_counts[n as usize + 1]);
        if !rec.truncated {
            prop_assert_eq!(rec.served, rec.crossing_counts[..=n as usize].iter().sum::<u64>());
            prop_assert_eq!(rec.inserted_counts.as_ref().unwrap().iter().sum::<u64>(), rec.arrivals() - 1);
            prop_assert_eq!(rec.level0_distances.as_ref().unwrap().len() as u64, rec.crossing(1));
            prop_assert!(rec.level0_distances.as_ref().unwrap().iter().all(|d| *d >= 0.0));
        }
        prop_assert!(rec.duration > 0.0);
    }

    #[test]
    fn infinite_buffer_never_loses(a in law(), load in 0.1f64..0.8, seed in 0u64..1000) {
        let mu = 1.0 / (a.mean() * load);
        let model = SystemModel::new(a, DistributionSpec::exponential(mu).unwrap(), Buffer::Infinite).unwrap();
        let mut rng = replication_stream(seed, 1);
        let rec = run_busy_period(&model, &mut rng, &SimulationOptions::default());
        prop_assert_eq!(rec.losses, 0);
        prop_assert_eq!(rec.served, rec.arrivals());
    }

    #[test]
    fn ecdf_is_a_distribution_function(values in prop::collection::vec(-100.0f64..100.0, 1..200), t in -120.0f64..120.0, dt in 0.0f64..50.0) {
        let s = EmpiricalSample::new("x", values, 0).unwrap();
        let f = s.ecdf().unwrap();
        prop_assert!(f.eval(t) <= f.eval(t + dt));
        prop_assert!((0.0..=1.0).contains(&f.eval(t)));
        prop_assert_eq!(f.eval(f.max()), 1.0);
    }

    #[test]
    fn shift_up_is_never_refuted(values in prop::collection::vec(0.0f64..10.0, 20..300), c in 0.0f64..3.0) {
        let x = EmpiricalSample::new("x", values, 0).unwrap();
        let y = x.map("x + c", |v| v + c).unwrap();
        prop_assert!(check_dominance(&x, &y, Claim::RightDominates, 0.01).unwrap().is_consistent());
        prop_assert!(check_dominance(&y, &x, Claim::LeftDominates, 0.01).unwrap().is_consistent());
    }

    #[test]
    fn verdicts_are_invariant_under_increasing_maps(
        xs in prop::collection::vec(0.0f64..5.0, 20..200),
        ys in prop::collection::vec(0.0f64..5.0, 20..200),
    ) {
        let x = EmpiricalSample::new("x", xs, 0).unwrap();
        let y = EmpiricalSample::new("y", ys, 0).unwrap();
        let tx = x.map("exp x", f64::exp).unwrap();
        let ty = y.map("exp y", f64::exp).unwrap();
        for claim in [Claim::LeftDominates, Claim::RightDominates] {
            let plain = check_dominance(&x, &y, claim, 0.05).unwrap();
            let mapped = check_dominance(&tx, &ty, claim, 0.05).unwrap();
            prop_assert_eq!(plain.decision, mapped.decision);
            prop_assert!((plain.max_violation - mapped.max_violation).abs() < 1e-12);
        }
    }

    #[test]
    fn swapping_sides_flips_the_claim(
        xs in prop::collection::vec(0.0f64..5.0, 20..200),
        ys in prop::collection::vec(0.0f64..5.0, 20..200),
    ) {
        let x = EmpiricalSample::new("x", xs, 0).unwrap();
        let y = EmpiricalSample::new("y", ys, 0).unwrap();
        let a = check_dominance(&x, &y, Claim::LeftDominates, 0.05).unwrap();
        let b = check_dominance(&y, &x, Claim::RightDominates, 0.05).unwrap();
        prop_assert_eq!(a.decision, b.decision);
        prop_assert!((a.max_violation - b.max_violation).abs() < 1e-12);
    }
}

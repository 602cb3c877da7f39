use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toast::constraints::{
    apply_reset, clock_set, entails, eval, future, future_over, is_sat, parse_constraint, past, reset_constraint, shift, Constraint,
    ResetSet, Valuation,
};
use toast::generate::{random_constraint, random_valuation};
use toast::Rational;

const CLOCKS: [&str; 2] = ["x", "y"];

fn quarters(upto: i128) -> impl Iterator<Item = Rational> {
    (0..=upto * 4).map(|k| Rational::new(k, 4))
}

/// Delay-sampling oracle for the past operator.
fn reachable(v: &Valuation, delta: &Constraint) -> bool {
    quarters(7).any(|d| eval(&shift(v, d).unwrap(), delta).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn past_matches_sampling(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let delta = random_constraint(&mut rng, &CLOCKS, 10, 3);
        let down = past(&delta);
        for _ in 0..40 {
            let v = random_valuation(&mut rng, &CLOCKS, 6, 2);
            prop_assert_eq!(eval(&v, &down).unwrap(), reachable(&v, &delta), "{} at {}", delta, v);
        }
    }

    #[test]
    fn future_matches_sampling(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let delta = random_constraint(&mut rng, &CLOCKS, 10, 3);
        let up = future_over(&delta, &clock_set(CLOCKS));
        for _ in 0..40 {
            let v = random_valuation(&mut rng, &CLOCKS, 6, 2);
            let lowest = v.iter().map(|(_, x)| *x).fold(Rational::integer(100), Rational::min);
            let oracle = quarters(7)
                .filter(|d| *d <= lowest)
                .any(|d| {
                    let back = Valuation::from_pairs(v.iter().map(|(c, x)| (c.name(), *x - d)));
                    eval(&back, &delta).unwrap()
                });
            prop_assert_eq!(eval(&v, &up).unwrap(), oracle, "{} at {}", delta, v);
        }
    }

    #[test]
    fn reset_is_the_image(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let delta = random_constraint(&mut rng, &CLOCKS, 10, 3);
        let lambda = ResetSet::of(["y"]);
        let image = reset_constraint(&delta, &lambda);
        for _ in 0..20 {
            let v = apply_reset(&random_valuation(&mut rng, &CLOCKS, 6, 2), &lambda);
            let x = v.get(&"x".into()).unwrap();
            let oracle = quarters(14).any(|y| eval(&Valuation::from_pairs([("x", x), ("y", y)]), &delta).unwrap());
            prop_assert_eq!(eval(&v, &image).unwrap(), oracle, "{} at {}", delta, v);
        }
    }

    #[test]
    fn entailment_agrees_with_points(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_constraint(&mut rng, &CLOCKS, 6, 2);
        let b = random_constraint(&mut rng, &CLOCKS, 6, 2);
        if entails(&a, &b) {
            for _ in 0..40 {
                let v = random_valuation(&mut rng, &CLOCKS, 4, 4);
                prop_assert!(!eval(&v, &a).unwrap() || eval(&v, &b).unwrap());
            }
        }
    }
}

#[test]
fn satisfiability_needs_a_witness() {
    for (src, sat) in [("x<1 and x>1", false), ("x-y>2 and y-x>1", false), ("x=1/2 and y-x<0", true), ("not (x>=0)", false)] {
        assert_eq!(is_sat(&parse_constraint(src).unwrap()), sat, "{src}");
    }
    assert!(is_sat(&parse_constraint("x-y=5/2").unwrap()));
}

#[test]
fn future_depends_on_the_clock_domain() {
    let d = parse_constraint("y<=7/2").unwrap();
    let v = Valuation::from_pairs([("x", Rational::integer(1)), ("y", Rational::integer(5))]);
    // Alone, y can come from anywhere below; with x=1 it was at least 4.
    assert!(eval(&v, &future(&d)).unwrap());
    assert!(!eval(&v, &future_over(&d, &clock_set(CLOCKS))).unwrap());
}

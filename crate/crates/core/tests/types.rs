use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toast::constraints::{clock_set, Valuation};
use toast::generate::TypeGen;
use toast::types::{check_well_formed, parse_type, Condition, Direction, TypeNode};

fn v0() -> Valuation {
    Valuation::zero(&clock_set(["x", "y"]))
}

fn directions(t: &TypeNode) -> Vec<Direction> {
    let mut out = Vec::new();
    t.visit_options(&mut |o| out.push(o.dir));
    out
}

#[test]
fn printing_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let gen = TypeGen {
        disjoint_mixing: false,
        ..TypeGen::default()
    };
    for _ in 0..300 {
        let t = gen.random_type(&mut rng);
        let back = parse_type(&t.to_string()).unwrap_or_else(|e| panic!("{t}: {e}"));
        assert_eq!(back, t);
    }
}

#[test]
fn dual_flips_every_direction() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let gen = TypeGen::default();
    for _ in 0..100 {
        let t = gen.random_type(&mut rng);
        let flipped: Vec<Direction> = directions(&t).into_iter().map(Direction::flip).collect();
        assert_eq!(directions(&t.dual()), flipped);
        assert_eq!(t.dual().clocks(), t.clocks());
    }
}

#[test]
fn duals_of_well_formed_types_are_well_formed() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let gen = TypeGen::default();
    for _ in 0..100 {
        let t = gen.well_formed(&mut rng);
        let rep = check_well_formed(&t.dual(), &v0());
        assert!(rep.verdict, "{t}: {:?}", rep.violations);
    }
}

#[test]
fn violating_types_report_one_condition() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let gen = TypeGen::default();
    for cond in [Condition::Feasibility, Condition::MixedChoice].into_iter().cycle().take(20) {
        let t = gen.violating(&mut rng, cond);
        let rep = check_well_formed(&t, &v0());
        assert!(!rep.verdict);
        assert!(rep.violations.iter().all(|v| v.condition == cond), "{t}: {:?}", rep.violations);
    }
}

#[test]
fn mixed_choice_depends_on_reachable_valuations() {
    // Overlap at x=0 only matters if x=0 can be reached.
    let t = parse_type("{ ?a(x<5).end, !b(x=0).end }").unwrap();
    assert!(check_well_formed(&t, &v0()).has(Condition::MixedChoice));
    let late = Valuation::from_pairs([("x", 1.into()), ("y", 0.into())]);
    assert!(check_well_formed(&t, &late).verdict);
    let nested = parse_type("!go(1<x<3).{ ?a(x<5).end, !b(x=0).end }").unwrap();
    assert!(!check_well_formed(&nested, &v0()).has(Condition::MixedChoice));
    let reset = parse_type("!go(x>1, {x}).{ ?a(x<5).end, !b(x=0).end }").unwrap();
    let rep = check_well_formed(&reset, &v0());
    assert_eq!(rep.violations.len(), 1);
    assert_eq!(rep.violations[0].path_string(), "!go");
}

#[test]
fn other_clocks_narrow_the_context() {
    // After !go, y = x + 2, so y<2 and x=0 cannot meet.
    let t = parse_type("!go(x=2, {x}).{ ?a(y<2).end, !b(x=0).end }").unwrap();
    let rep = check_well_formed(&t, &v0());
    assert!(!rep.has(Condition::MixedChoice), "{:?}", rep.violations);
}

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toast::constraints::{clock_set, Valuation};
use toast::generate::TypeGen;
use toast::semantics::{
    all_steps, compatible, dual_equivalent, qconfig_time, system_steps, Message, QConfig, Refusal, Rule, System,
};
use toast::types::{parse_type, PayloadSort};
use toast::Rational;

fn r(n: i128) -> Rational {
    Rational::integer(n)
}

#[test]
fn random_walks_stay_compatible() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let gen = TypeGen::default();
    let clocks = clock_set(["x", "y"]);
    for _ in 0..60 {
        let t = gen.well_formed(&mut rng);
        let mut sys = System::new(t.clone(), t.dual(), &clocks);
        for _ in 0..25 {
            assert!(compatible(&sys).compatible, "{t}: {sys}");
            if sys.is_final() {
                break;
            }
            let horizon = sys.max_constant() + r(2);
            let steps = all_steps(&sys, horizon).unwrap();
            for s in &steps {
                if s.rule == Rule::Wait {
                    assert!(sys.left.queue.is_empty() && sys.right.queue.is_empty(), "{t}: wait at {sys}");
                }
            }
            let Some(next) = steps.choose(&mut rng) else {
                panic!("{t}: stuck at {sys}")
            };
            sys = next.target.clone();
        }
    }
}

#[test]
fn refusals_name_their_premise() {
    let v = Valuation::zero(&clock_set(["x"]));
    let send_only = QConfig::new(v.clone(), parse_type("!a(x<3).end").unwrap());
    assert_eq!(qconfig_time(&send_only, r(4)), Err(Refusal::Persistency));
    assert!(qconfig_time(&send_only, r(2)).is_ok());
    let waiting = QConfig::new(v.clone(), parse_type("?a(x<3).end").unwrap()).with_queue([Message::new("a", PayloadSort::None)]);
    assert_eq!(qconfig_time(&waiting, r(1)), Err(Refusal::Urgency));
    // A message that becomes receivable only later does not block time.
    let early = QConfig::new(v.clone(), parse_type("?a(x>2).end").unwrap()).with_queue([Message::new("a", PayloadSort::None)]);
    assert_eq!(qconfig_time(&early, r(2)).unwrap().valuation.get(&"x".into()), Some(r(2)));
    assert_eq!(qconfig_time(&early, r(3)), Err(Refusal::Urgency));
    assert_eq!(qconfig_time(&send_only, r(-1)), Err(Refusal::Configuration));
}

#[test]
fn one_send_then_one_receive() {
    let t = parse_type("!a(x<2).?b.end").unwrap();
    let sys = System::new(t.clone(), t.dual(), &clock_set(["x"]));
    let steps = system_steps(&sys).unwrap();
    assert_eq!(steps.len(), 1);
    assert_eq!(steps[0].describe(), "comm-L(!a)");
    let after = &steps[0].target;
    assert!(compatible(after).compatible);
    let next = system_steps(after).unwrap();
    assert_eq!(next.len(), 1);
    assert_eq!(next[0].describe(), "par-R(?a)");
    assert!(dual_equivalent(&next[0].target.left.ty, &next[0].target.right.ty));
}

#[test]
fn crossed_queues_are_incompatible() {
    let t = parse_type("!a.end").unwrap();
    let mut sys = System::new(t.clone(), t.dual(), &clock_set(["x"]));
    sys.left.queue.push_back(Message::new("b", PayloadSort::None));
    sys.right.queue.push_back(Message::new("a", PayloadSort::None));
    assert!(!compatible(&sys).compatible);
}

use paramsep::field::{BitVec, Fe};
use paramsep::learners::*;
use paramsep::learners::Strategy;
use paramsep::tasks::*;
use paramsep::Exec;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c1(name: &str) -> Task1 {
    match Preset::get(name).unwrap() {
        Preset::C1(p) => Task1::new(p).unwrap(),
        _ => unreachable!(),
    }
}

fn c2(name: &str) -> Task2 {
    match Preset::get(name).unwrap() {
        Preset::C2(p) => Task2::new(p).unwrap(),
        _ => unreachable!(),
    }
}

fn draw1(t: &Task1, s: &Secret1, n: usize, rng: &mut ChaCha8Rng) -> Vec<(Instance1, bool)> {
    (0..n).map(|_| sample_c1(t, s, rng)).collect()
}

fn risk1(t: &Task1, c: &Classifier1, s: &Secret1, n: usize, rng: &mut ChaCha8Rng) -> f64 {
    let errs = (0..n).filter(|_| {
        let (x, y) = sample_c1(t, s, rng);
        c.predict(t, &x).is_error(y)
    });
    errs.count() as f64 / n as f64
}

/// ⟨m, P′|samp₁(u₁)⟩ computed bit by bit.
fn consistent(t: &Task1, p: &BitVec, x: &Instance1, y: bool) -> bool {
    let ell = t.field().ell() as usize;
    let idx = t.samp1().samp_u64(t.decode_u1(x).unwrap());
    let v = idx.iter().enumerate().fold(false, |a, (j, &i)| a ^ ((x.m[j / ell].0 >> (j % ell)) & 1 == 1 && p.get(i as usize)));
    v == y
}

#[test]
fn efficient_learner_fits_and_generalizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = c1("c1-small");
    let s = Secret1::draw(&t, Fixture1::UniformP, &mut rng);
    let samples = draw1(&t, &s, 399, &mut rng);
    let model = learn_efficient_c1(&t, &samples).unwrap();
    assert_eq!(model.kind, ModelKind::Pq);
    assert_eq!(model.param_bits(), t.alpha() + t.beta());
    let c = Classifier1::from_model(&t, &model).unwrap();
    assert!(samples.iter().all(|(x, y)| consistent(&t, &c.p, x, *y)));
    assert_eq!(c.q, s.q, "Q is covered at this sample size");
    assert!(risk1(&t, &c, &s, 2000, &mut rng) <= 0.01);
}

#[test]
fn empty_samples_give_the_zero_model() {
    let t = c1("c1-tiny");
    let m = learn_efficient_c1(&t, &[]).unwrap();
    assert_eq!(m.param_bits(), 96);
    assert!(m.params.is_zero());
}

#[test]
fn contradictory_samples_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let t = c1("c1-tiny");
    let s = Secret1::draw(&t, Fixture1::Prg, &mut rng);
    let (mut x, y) = sample_c1(&t, &s, &mut rng);
    x.m = vec![Fe(1), Fe(0)];
    let samples = vec![(x.clone(), y), (x, !y)];
    assert_eq!(learn_efficient_c1(&t, &samples), Err(LearnError::InconsistentSamples));
}

#[test]
fn seed_search_learns_with_two_lambda_bits() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t = c1("c1-tiny");
    let s = Secret1::draw(&t, Fixture1::Prg, &mut rng);
    let samples = draw1(&t, &s, 111, &mut rng);
    let m = learn_it_c1(&t, &samples, u64::MAX, Exec::Parallel).unwrap();
    assert_eq!(m.kind, ModelKind::Seed);
    assert_eq!(m.param_bits(), 16);
    assert_eq!(m, learn_it_c1(&t, &samples, u64::MAX, Exec::Sequential).unwrap());
    let c = Classifier1::from_model(&t, &m).unwrap();
    assert!(samples.iter().all(|(x, y)| consistent(&t, &c.p, x, *y)));
    assert!(risk1(&t, &c, &s, 2000, &mut rng) <= 0.01);
    // a cap at the found seed stops the search just short of it
    let found = m.params.slice(0, 8).to_u64();
    if found > 0 {
        assert_eq!(learn_it_c1(&t, &samples, found, Exec::Sequential), Err(LearnError::EffortExceeded { effort: found }));
    }
}

#[test]
fn seed_search_refuses_wide_seeds() {
    let t = c1("c1-small");
    let Preset::C1(p) = Preset::get("c1-small").unwrap() else { unreachable!() };
    let wide = Task1::new(TaskParams1 { lambda: 32, ..p }).unwrap();
    assert!(learn_it_c1(&t, &[], 1, Exec::Sequential).is_ok());
    assert!(learn_it_c1(&wide, &[], 1, Exec::Sequential).is_err());
}

#[test]
fn zero_model_is_a_coin_flip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let t = c1("c1-tiny");
    let s = Secret1::draw(&t, Fixture1::Prg, &mut rng);
    let z = Model::new(ModelKind::Truncate, BitVec::zeros(0));
    let c = Classifier1::from_model(&t, &z).unwrap();
    assert!(c.p.is_zero() && c.q.is_zero());
    let r = risk1(&t, &c, &s, 10_000, &mut rng);
    assert!((r - 0.5).abs() <= 0.03, "{r}");
}

#[test]
fn truncation_at_full_size_is_the_efficient_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let t = c1("c1-tiny");
    let s = Secret1::draw(&t, Fixture1::UniformP, &mut rng);
    let samples = draw1(&t, &s, 111, &mut rng);
    let full = t.alpha() + t.beta();
    let e = learn_efficient_c1(&t, &samples).unwrap();
    let tr = learn_compressed(&t, &samples, full, Strategy::Truncate).unwrap();
    assert_eq!(tr.params, e.params);
    assert_eq!(Classifier1::from_model(&t, &tr).unwrap(), Classifier1::from_model(&t, &e).unwrap());
    assert!(matches!(
        learn_compressed(&t, &samples, full + 1, Strategy::Truncate),
        Err(LearnError::BudgetTooLarge { .. })
    ));
    for st in Strategy::ALL {
        for bits in [0, 1, 17, full] {
            let m = learn_compressed(&t, &samples, bits, st).unwrap();
            assert_eq!(m.param_bits(), bits, "{st}");
            assert!(Classifier1::from_model(&t, &m).is_ok());
        }
    }
}

#[test]
fn sketch_decodes_to_a_solution_of_its_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let t = c1("c1-tiny");
    let s = Secret1::draw(&t, Fixture1::Prg, &mut rng);
    let samples = draw1(&t, &s, 111, &mut rng);
    let e = learn_efficient_c1(&t, &samples).unwrap();
    let sk = learn_compressed(&t, &samples, 40, Strategy::Sketch).unwrap();
    let c = Classifier1::from_model(&t, &sk).unwrap();
    let decoded = c.p.concat(&c.q);
    let rows = paramsep::crypto::ToyPrg::new(32, t.alpha() + t.beta(), "paramsep/learners/sketch").unwrap();
    for i in 0..40 {
        let r = rows.expand_u64(i);
        assert_eq!(r.inner(&decoded).unwrap(), r.inner(&e.params).unwrap());
        assert_eq!(r.inner(&e.params).unwrap(), sk.params.get(i as usize));
    }
}

#[test]
fn dictionary_picks_the_fewest_training_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let t = c1("c1-tiny");
    let s = Secret1::draw(&t, Fixture1::Prg, &mut rng);
    let samples = draw1(&t, &s, 60, &mut rng);
    let m = learn_compressed(&t, &samples, 5, Strategy::Dictionary).unwrap();
    let errs = |idx: u64| {
        let mm = Model::new(ModelKind::Dictionary, BitVec::from_u64(idx, 5));
        let c = Classifier1::from_model(&t, &mm).unwrap();
        samples.iter().filter(|(x, y)| c.predict(&t, x).is_error(*y)).count()
    };
    let chosen = m.params.to_u64();
    let best = (0..32).map(errs).min().unwrap();
    assert_eq!(errs(chosen), best);
    assert!((0..chosen).all(|i| errs(i) > best), "ties go to the smallest index");
    // wide budgets still search only 2^8 entries
    let w = learn_compressed(&t, &samples, 20, Strategy::Dictionary).unwrap();
    assert_eq!(w.param_bits(), 20);
    assert_eq!(w.params.to_u64() >> DICT_MAX_BITS, 0);
}

#[test]
fn wrapper_failure_abstains() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let t = c1("c1-tiny");
    let s = Secret1::draw(&t, Fixture1::Prg, &mut rng);
    let c = Classifier1::from_model(&t, &Model::new(ModelKind::Pq, s.p.concat(&s.q))).unwrap();
    let (mut x, y) = sample_c1(&t, &s, &mut rng);
    assert_eq!(c.predict(&t, &x), Prediction::Label(y));
    let undecodable = (0..10_000)
        .map(|_| (0..x.u1_enc.len()).map(|_| Fe(rng.random_range(0..8))).collect::<Vec<_>>())
        .find(|w| t.wrap_u1().decode(w).is_err())
        .expect("a random word off the wrapper code");
    x.u1_enc = undecodable;
    assert_eq!(c.predict(&t, &x), Prediction::Abstain);
    assert!(Prediction::Abstain.is_error(true) && Prediction::Abstain.is_error(false));
}

#[test]
fn model_records_round_trip() {
    let m = Model::new(ModelKind::Sketch, BitVec::from_u64(0xdead_beef, 37));
    let json = serde_json::to_value(&m).unwrap();
    assert_eq!(json["kind"], "sketch");
    assert_eq!(json["param_bits"], 37);
    assert_eq!(serde_json::from_value::<Model>(json).unwrap(), m);
    assert_eq!(Model::list_decode().param_bits(), 0);
    assert!("bogus".parse::<Strategy>().is_err());
    assert_eq!("sketch".parse::<Strategy>().unwrap(), Strategy::Sketch);
}

#[test]
fn wrong_model_kinds_are_rejected() {
    let t1 = c1("c1-tiny");
    let t2 = c2("c2-small");
    assert!(matches!(
        Classifier1::from_model(&t1, &Model::new(ModelKind::S, BitVec::zeros(3))),
        Err(LearnError::WrongKind(ModelKind::S))
    ));
    assert!(matches!(
        ClassifierS::from_model(&t2, &Model::new(ModelKind::Pq, BitVec::zeros(3))),
        Err(LearnError::WrongKind(ModelKind::Pq))
    ));
    assert!(matches!(
        Classifier1::from_model(&t1, &Model::new(ModelKind::Pq, BitVec::zeros(3))),
        Err(LearnError::ParamBits { .. })
    ));
}

#[test]
fn list_decoder_labels_honest_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let t = c2("c2-small");
    let s = Secret2::draw(&t, &mut rng);
    for _ in 0..1000 {
        let (x, b, _) = sample_c2(&t, &s, &mut rng);
        assert_eq!(classify_listdecode_c2(&t, &x, &mut rng), b);
        let (_, pairs) = verifying_pairs(&t, &x).unwrap();
        assert!(pairs.iter().any(|&(pb, _)| pb == b));
    }
}

#[test]
fn s_learner_recovers_the_channel() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let t = c2("c2-small");
    let s = Secret2::draw(&t, &mut rng);
    let samples: Vec<_> = (0..4 * t.alpha()).map(|_| {
        let (x, b, _) = sample_c2(&t, &s, &mut rng);
        (x, b)
    }).collect();
    let m = learn_it_c2(&t, &samples).unwrap();
    assert_eq!(m.param_bits(), t.alpha());
    assert_eq!(m.params, s.s, "4α samples give full rank");
    let c = ClassifierS::from_model(&t, &m).unwrap();
    for _ in 0..500 {
        let (x, b, _) = sample_c2(&t, &s, &mut rng);
        assert_eq!(c.predict(&t, &x), Prediction::Label(b));
    }
    let half = truncate_s(&m, t.alpha() / 2).unwrap();
    assert_eq!(half.param_bits(), t.alpha() / 2);
    let ch = ClassifierS::from_model(&t, &half).unwrap();
    assert_eq!(ch.s.slice(0, t.alpha() / 2), s.s.slice(0, t.alpha() / 2));
    assert!(ch.s.slice(t.alpha() / 2, t.alpha() / 2).is_zero());
    assert!(truncate_s(&m, t.alpha() + 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn efficient_model_is_consistent(seed in any::<u64>(), n in 0usize..80) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = c1("c1-tiny");
        let s = Secret1::draw(&t, Fixture1::Prg, &mut rng);
        let samples = draw1(&t, &s, n, &mut rng);
        let m = learn_efficient_c1(&t, &samples).unwrap();
        let c = Classifier1::from_model(&t, &m).unwrap();
        for (x, y) in &samples {
            prop_assert!(consistent(&t, &c.p, x, *y));
            prop_assert_eq!(c.predict(&t, x), Prediction::Label(*y));
        }
    }
}

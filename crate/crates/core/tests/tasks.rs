use paramsep::coding::RsCode;
use paramsep::crypto::{ots_verify, Signature};
use paramsep::field::{BitVec, Fe};
use paramsep::tasks::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c1(name: &str) -> Task1 {
    match Preset::get(name).unwrap() {
        Preset::C1(p) => Task1::new(p).unwrap(),
        _ => panic!("{name} is not a first-task preset"),
    }
}

fn c2(name: &str) -> Task2 {
    match Preset::get(name).unwrap() {
        Preset::C2(p) => Task2::new(p).unwrap(),
        _ => panic!("{name} is not a second-task preset"),
    }
}

/// Bit j of m: symbol j/ℓ, bit j%ℓ.
fn m_bit(m: &[Fe], ell: u32, j: usize) -> bool {
    (m[j / ell as usize].0 >> (j % ell as usize)) & 1 == 1
}

fn label_oracle(task: &Task1, secret: &Secret1, u1: u64, m: &[Fe]) -> bool {
    let ell = task.field().ell();
    let idx = task.samp1().samp_u64(u1);
    idx.iter().enumerate().fold(false, |acc, (j, &i)| acc ^ (m_bit(m, ell, j) & secret.p.get(i as usize)))
}

fn c1_fields(x: &Instance1) -> Vec<(&'static str, Vec<Fe>)> {
    vec![("u1", x.u1_enc.clone()), ("u2", x.u2_enc.clone()), ("m", x.m.clone()), ("masked", x.masked.clone())]
}

fn c2_fields(x: &Instance2) -> Vec<(&'static str, Vec<Fe>)> {
    vec![
        ("u", x.u_enc.clone()),
        ("v", x.v_enc.clone()),
        ("vk", x.vk_enc.clone()),
        ("sig", x.sig_block.clone()),
        ("bit", x.bit_enc.clone()),
    ]
}

#[test]
fn presets_build_and_round_trip() {
    for name in PRESETS {
        let p = Preset::get(name).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<Preset>(&json).unwrap(), p);
        match p {
            Preset::C1(p) => assert!(Task1::new(p).is_ok()),
            Preset::C2(p) => assert!(Task2::new(p).is_ok()),
        }
    }
    assert!(matches!(Preset::get("c9"), Err(TaskError::UnknownPreset(_))));
}

#[test]
fn infeasible_parameters_rejected() {
    let Preset::C1(p) = Preset::get("c1-tiny").unwrap() else { unreachable!() };
    assert!(Task1::new(TaskParams1 { k: 3, ..p.clone() }).is_err()); // 3k ≥ n
    assert!(Task1::new(TaskParams1 { lambda: 4, ..p.clone() }).is_err()); // n > λ
    assert!(Task1::new(TaskParams1 { beta: 16, ..p }).is_err()); // β < α
    let Preset::C2(p) = Preset::get("c2-small").unwrap() else { unreachable!() };
    assert!(Task2::new(TaskParams2 { k: 4, ..p.clone() }).is_err()); // 4k ≥ n
    assert!(Task2::new(TaskParams2 { hash_bits: 12, ..p }).is_err()); // 1 + h > kℓ
}

#[test]
fn budget_arithmetic() {
    let t = c1("c1-small");
    assert_eq!((t.budget(), t.noise_positions()), (5, 1));
    let t = c1("c1-tiny");
    assert_eq!((t.budget(), t.noise_positions()), (2, 0));
    for (name, want) in [("c2-small", 9), ("c2-medium", 18)] {
        let t = c2(name);
        let p = t.params();
        let float = ((1.0 - (p.k as f64 / p.n as f64).sqrt()) * p.n as f64).floor() as usize;
        assert_eq!(t.budget(), want);
        assert_eq!(t.budget(), float);
        assert!(t.budget() <= t.lenc().list_radius());
    }
}

#[test]
fn flatten_round_trip_on_a_thousand_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t1 = c1("c1-small");
    let s1 = Secret1::draw(&t1, Fixture1::Prg, &mut rng);
    let t2 = c2("c2-small");
    let s2 = Secret2::draw(&t2, &mut rng);
    for _ in 0..1000 {
        let (x, _) = sample_c1(&t1, &s1, &mut rng);
        let v = t1.flatten(&x);
        assert_eq!(v.len(), t1.layout().len);
        assert_eq!(t1.unflatten(&v).unwrap(), x);
        let (y, _, _) = sample_c2(&t2, &s2, &mut rng);
        let v = t2.flatten(&y);
        assert_eq!(v.len(), t2.layout().len);
        assert_eq!(t2.unflatten(&v).unwrap(), y);
    }
}

#[test]
fn unflatten_rejects_malformed_vectors() {
    let t = c1("c1-tiny");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = Secret1::draw(&t, Fixture1::Prg, &mut rng);
    let (x, _) = sample_c1(&t, &s, &mut rng);
    let mut v = t.flatten(&x);
    v.pop();
    assert!(matches!(t.unflatten(&v), Err(TaskError::Length { .. })));
    let mut v = t.flatten(&x);
    v[3] = Fe(8); // outside GF(8)
    assert!(matches!(t.unflatten(&v), Err(TaskError::Symbol { pos: 3, value: 8 })));
}

#[test]
fn single_symbol_corruption_lands_in_exactly_one_segment() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t = c1("c1-small");
    let s = Secret1::draw(&t, Fixture1::Prg, &mut rng);
    let (x, _) = sample_c1(&t, &s, &mut rng);
    let base = t.flatten(&x);
    for p in 0..base.len() {
        let mut v = base.clone();
        v[p] = Fe(v[p].0 ^ 1);
        let y = t.unflatten(&v).unwrap();
        let changed: Vec<_> = c1_fields(&x).into_iter().zip(c1_fields(&y)).filter(|(a, b)| a.1 != b.1).map(|(a, _)| a.0).collect();
        assert_eq!(changed, vec![t.layout().locate(p).unwrap().name.as_str()], "position {p}");
    }
    let t = c2("c2-small");
    let s = Secret2::draw(&t, &mut rng);
    let (x, _, _) = sample_c2(&t, &s, &mut rng);
    let base = t.flatten(&x);
    for p in 0..base.len() {
        let mut v = base.clone();
        v[p] = Fe(v[p].0 ^ 1);
        let y = t.unflatten(&v).unwrap();
        let changed: Vec<_> = c2_fields(&x).into_iter().zip(c2_fields(&y)).filter(|(a, b)| a.1 != b.1).map(|(a, _)| a.0).collect();
        assert_eq!(changed, vec![t.layout().locate(p).unwrap().name.as_str()], "position {p}");
    }
}

#[test]
fn layout_segments_tile_the_instance() {
    let t = c1("c1-small");
    let l = t.layout();
    let names: Vec<_> = l.segments.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(names, ["u1", "u2", "m", "masked"]);
    assert_eq!(l.segment("m").unwrap().len, 4);
    assert_eq!(l.segment("masked").unwrap().len, 15);
    let mut off = 0;
    for s in &l.segments {
        assert_eq!(s.offset, off);
        off += s.len;
    }
    assert_eq!(off, l.len);
    assert!(l.locate(l.len).is_none());
}

#[test]
fn c1_labels_match_the_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let t = c1("c1-small");
    let s = Secret1::draw(&t, Fixture1::Prg, &mut rng);
    assert_eq!(s.p, t.f1().expand_u64(s.seed.unwrap()));
    assert_eq!(s.q, t.f2().expand_u64(s.seed.unwrap()));
    for _ in 0..300 {
        let (x, y) = sample_c1(&t, &s, &mut rng);
        let u1 = t.decode_u1(&x).unwrap();
        assert_eq!(y, label_oracle(&t, &s, u1, &x.m));
        assert_eq!(y, label_c1(&t, &x, &s).unwrap());
        // masked − Q|samp₂(u₂) is the codeword of m
        let u2 = t.decode_u2(&x).unwrap();
        let word: Vec<Fe> = x.masked.iter().zip(t.mask(&s.q, u2)).map(|(&a, b)| a + b).collect();
        assert_eq!(word, t.enc().encode(&x.m).unwrap());
    }
}

#[test]
fn zero_message_gives_label_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let t = c1("c1-tiny");
    let s = Secret1::draw(&t, Fixture1::Prg, &mut rng);
    for _ in 0..100 {
        let (mut x, _) = sample_c1(&t, &s, &mut rng);
        x.m = vec![Fe(0); 2];
        assert!(!label_c1(&t, &x, &s).unwrap());
    }
}

#[test]
fn c1_tiny_labels_are_balanced() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let t = c1("c1-tiny");
    let s = Secret1::draw(&t, Fixture1::Prg, &mut rng);
    let ones = (0..10_000).filter(|_| sample_c1(&t, &s, &mut rng).1).count();
    assert!((ones as f64 / 1e4 - 0.5).abs() <= 0.02, "{ones}");
}

#[test]
fn fixtures_replace_one_string() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let t = c1("c1-small");
    let s = Secret1::draw(&t, Fixture1::UniformP, &mut rng);
    assert_eq!(s.q, t.f2().expand_u64(s.seed.unwrap()));
    assert_ne!(s.p, t.f1().expand_u64(s.seed.unwrap()));
    let s = Secret1::draw(&t, Fixture1::UniformQ, &mut rng);
    assert_eq!(s.p, t.f1().expand_u64(s.seed.unwrap()));
    assert_ne!(s.q, t.f2().expand_u64(s.seed.unwrap()));
}

#[test]
fn c2_instances_are_honest() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for name in ["c2-small", "c2-medium"] {
        let t = c2(name);
        let s = Secret2::draw(&t, &mut rng);
        for _ in 0..100 {
            let (x, b, sk) = sample_c2(&t, &s, &mut rng);
            assert_eq!(label_c2(&t, &x).unwrap(), b);
            let vk = t.decode_vk(&x).unwrap();
            assert!(ots_verify(&vk, b, Signature(sk.x[b as usize])));
            let (b2, sig) = unpack_sig(&t, &t.lenc().unique_decode(&x.sig_block).unwrap()).unwrap();
            assert_eq!(b2, b);
            assert!(ots_verify(&vk, b, sig));
            // payload = b ⊕ ⟨v, s|samp(u)⟩, recomputed bit by bit
            let u = t.wrap_u().decode(&x.u_enc).unwrap().to_u64();
            let v = t.wrap_v().decode(&x.v_enc).unwrap();
            let idx = t.samp().samp_u64(u);
            let ip = idx.iter().enumerate().fold(false, |a, (j, &i)| a ^ (v.get(j) & s.s.get(i as usize)));
            assert_eq!(t.wrap_bit().decode(&x.bit_enc).unwrap().get(0), b ^ ip);
        }
    }
}

#[test]
fn wrappers_survive_budget_plus_one_corruptions() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let t = c1("c1-small");
    let r = t.budget() + 1;
    for w in [t.wrap_u1(), t.wrap_u2()] {
        assert!(w.correct_radius() >= r);
        for _ in 0..200 {
            let payload = BitVec::from_u64(rng.random(), w.payload_bits());
            let mut cw = w.encode(&payload).unwrap();
            for p in rand::seq::index::sample(&mut rng, cw.len(), r) {
                cw[p] = Fe((cw[p].0 + rng.random_range(1..16)) % 16);
            }
            assert_eq!(w.decode(&cw).unwrap(), payload);
        }
    }
    let t = c2("c2-medium");
    let r = t.budget() + 1;
    for w in [t.wrap_u(), t.wrap_v(), t.wrap_vk(), t.wrap_bit()] {
        assert!(w.correct_radius() >= r);
        for _ in 0..100 {
            let words: Vec<u64> = (0..w.payload_bits().div_ceil(64)).map(|_| rng.random()).collect();
            let payload = BitVec::from_words(words, w.payload_bits());
            let mut cw = w.encode(&payload).unwrap();
            for p in rand::seq::index::sample(&mut rng, cw.len(), r) {
                cw[p] = Fe(cw[p].0 ^ rng.random_range(1..256u32) as u16);
            }
            assert_eq!(w.decode(&cw).unwrap(), payload);
        }
    }
}

#[test]
fn sig_packing_rejects_padding() {
    let t = c2("c2-small");
    let msg = pack_sig(&t, true, Signature(0x5a5));
    assert_eq!(msg.len(), 3);
    assert_eq!(unpack_sig(&t, &msg), Some((true, Signature(0x5a5))));
    let t = c2("c2-medium").with_hash_bits(16).unwrap();
    let msg = pack_sig(&t, false, Signature(0xbeef));
    let mut bad = msg.clone();
    bad[5] = Fe(1);
    assert_eq!(unpack_sig(&t, &msg), Some((false, Signature(0xbeef))));
    assert_eq!(unpack_sig(&t, &bad), None);
}

#[test]
fn masking_composition_at_micro_scale() {
    // Enc(m) + Q|S over GF(8), n=5, k=1: every nonzero mask shifts the word off the code
    let f = paramsep::field::Field::with_ell(3).unwrap();
    let code = RsCode::new(&f, 5, 1).unwrap();
    for m in 0..8u16 {
        let cw = code.encode(&[Fe(m)]).unwrap();
        for z in 0..8u16.pow(5) {
            let mask: Vec<Fe> = (0..5).map(|i| Fe((z >> (3 * i)) & 7)).collect();
            let w: Vec<Fe> = cw.iter().zip(&mask).map(|(&a, &b)| a + b).collect();
            let unmasked: Vec<Fe> = w.iter().zip(&mask).map(|(&a, &b)| a + b).collect();
            assert_eq!(code.unique_decode(&unmasked).unwrap(), vec![Fe(m)]);
            let wt = mask.iter().filter(|s| s.0 != 0).count();
            if wt <= code.unique_radius() {
                assert_eq!(code.unique_decode(&w).unwrap(), vec![Fe(m)]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn c1_tiny_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = c1("c1-tiny");
        let s = Secret1::draw(&t, Fixture1::Prg, &mut rng);
        let (x, y) = sample_c1(&t, &s, &mut rng);
        prop_assert_eq!(t.unflatten(&t.flatten(&x)).unwrap(), x.clone());
        prop_assert_eq!(label_c1(&t, &x, &s).unwrap(), y);
        let json = serde_json::to_string(&x).unwrap();
        prop_assert_eq!(serde_json::from_str::<Instance1>(&json).unwrap(), x);
    }

    #[test]
    fn pack_round_trip(b in any::<bool>(), sig in 0u64..(1 << 11)) {
        let t = c2("c2-small");
        prop_assert_eq!(unpack_sig(&t, &pack_sig(&t, b, Signature(sig))), Some((b, Signature(sig))));
    }
}

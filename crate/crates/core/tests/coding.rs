use paramsep::coding::{hamming, CodingError, RsCode, WrapCode};
use paramsep::field::{BitVec, Fe, Field};
use proptest::prelude::*;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn all_messages(q: usize, k: usize) -> impl Iterator<Item = Vec<Fe>> {
    (0..q.pow(k as u32)).map(move |mut v| {
        (0..k)
            .map(|_| {
                let s = Fe((v % q) as u16);
                v /= q;
                s
            })
            .collect()
    })
}

/// Hamming ball by exhaustive enumeration, ordered by packed value.
fn brute_ball(code: &RsCode, w: &[Fe], radius: usize) -> Vec<Vec<Fe>> {
    all_messages(code.field().order(), code.k())
        .filter(|m| hamming(&code.encode(m).unwrap(), w) <= radius)
        .collect()
}

fn random_msg(rng: &mut ChaCha8Rng, f: &Field, k: usize) -> Vec<Fe> {
    (0..k).map(|_| f.elem(rng.random())).collect()
}

/// Replace `errs` distinct positions with different symbols.
fn corrupt(rng: &mut ChaCha8Rng, f: &Field, w: &mut [Fe], errs: usize) {
    for i in sample(rng, w.len(), errs) {
        w[i] += f.elem(rng.random_range(1..f.order() as u64));
    }
}

#[test]
fn brute_ball_orders_like_packed_values() {
    let f = Field::with_ell(2).unwrap();
    let ms: Vec<Vec<Fe>> = all_messages(4, 2).collect();
    assert_eq!(ms[1], vec![Fe(1), Fe(0)]);
    assert_eq!(ms[4], vec![Fe(0), Fe(1)]);
    let code = RsCode::new(&f, 3, 1).unwrap();
    assert_eq!(brute_ball(&code, &[Fe(0); 3], 3).len(), 4);
}

#[test]
fn unique_decode_matches_nearest_codeword_oracle() {
    let f = Field::with_ell(3).unwrap();
    let code = RsCode::new(&f, 7, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..3000 {
        let w: Vec<Fe> = if trial % 2 == 0 {
            (0..7).map(|_| f.elem(rng.random())).collect()
        } else {
            let mut w = code.encode(&random_msg(&mut rng, &f, 2)).unwrap();
            let errs = rng.random_range(0..=4);
            corrupt(&mut rng, &f, &mut w, errs);
            w
        };
        let ball = brute_ball(&code, &w, 2);
        match code.unique_decode(&w) {
            Ok(m) => assert_eq!(ball, vec![m]),
            Err(e) => {
                assert_eq!(e, CodingError::DecodeFailure);
                assert!(ball.is_empty());
            }
        }
    }
}

#[test]
fn unique_decode_lands_on_the_other_codeword() {
    let f = Field::with_ell(3).unwrap();
    let code = RsCode::new(&f, 7, 2).unwrap();
    let m1 = vec![Fe(3), Fe(5)];
    // differ by (a + b·x) with a/b a nonzero point: codewords agree exactly once
    let m2 = vec![m1[0] + Fe(1), m1[1] + Fe(1)];
    let c1 = code.encode(&m1).unwrap();
    let c2 = code.encode(&m2).unwrap();
    assert_eq!(hamming(&c1, &c2), 6);
    let mut w = c1.clone();
    let diff: Vec<usize> = (0..7).filter(|&i| c1[i] != c2[i]).take(4).collect();
    for &i in &diff {
        w[i] = c2[i];
    }
    assert_eq!(hamming(&w, &c1), 4);
    assert_eq!(code.unique_decode(&w).unwrap(), m2);
    assert_eq!(brute_ball(&code, &w, 2), vec![m2]);
}

#[test]
fn unique_decode_preset_round_trips() {
    let f = Field::with_ell(4).unwrap();
    let code = RsCode::new(&f, 15, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5000 {
        let m = random_msg(&mut rng, &f, 4);
        let mut w = code.encode(&m).unwrap();
        corrupt(&mut rng, &f, &mut w, 5);
        assert_eq!(code.unique_decode(&w).unwrap(), m);
    }
}

#[test]
fn list_decode_equals_brute_ball() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (ell, n, k) in [(4, 16, 3), (4, 16, 2), (4, 12, 2), (3, 8, 2), (3, 7, 1), (3, 5, 2)] {
        let f = Field::with_ell(ell).unwrap();
        let code = RsCode::new(&f, n, k).unwrap();
        let radius = code.list_radius();
        for trial in 0..60 {
            let w: Vec<Fe> = match trial % 3 {
                0 => (0..n).map(|_| f.elem(rng.random())).collect(),
                1 => {
                    let mut w = code.encode(&random_msg(&mut rng, &f, k)).unwrap();
                    corrupt(&mut rng, &f, &mut w, radius);
                    w
                }
                _ => {
                    // splice two codewords
                    let a = code.encode(&random_msg(&mut rng, &f, k)).unwrap();
                    let b = code.encode(&random_msg(&mut rng, &f, k)).unwrap();
                    let cut = rng.random_range(0..=n);
                    a[..cut].iter().chain(&b[cut..]).copied().collect()
                }
            };
            for r in [0, radius / 2, radius] {
                assert_eq!(code.list_decode(&w, r).unwrap(), brute_ball(&code, &w, r), "ℓ={ell} n={n} k={k} r={r}");
            }
        }
    }
}

#[test]
fn list_decode_half_and_half() {
    let f = Field::with_ell(4).unwrap();
    let code = RsCode::new(&f, 16, 3).unwrap();
    let m1 = vec![Fe(1), Fe(2), Fe(3)];
    let m2 = vec![Fe(9), Fe(0), Fe(14)];
    let c1 = code.encode(&m1).unwrap();
    let c2 = code.encode(&m2).unwrap();
    let w: Vec<Fe> = c1[..8].iter().chain(&c2[8..]).copied().collect();
    let list = code.list_decode(&w, 8).unwrap();
    assert!(list.contains(&m1) && list.contains(&m2));
    assert_eq!(list, brute_ball(&code, &w, 8));
}

#[test]
fn list_decode_radius_limits() {
    let f = Field::with_ell(4).unwrap();
    let code = RsCode::new(&f, 16, 3).unwrap();
    let m = vec![Fe(4), Fe(4), Fe(1)];
    let c = code.encode(&m).unwrap();
    assert_eq!(code.list_decode(&c, 0).unwrap(), vec![m]);
    assert_eq!(
        code.list_decode(&c, 10),
        Err(CodingError::RadiusOutOfRange { radius: 10, max: 9 })
    );
    assert!(code.list_decode(&c[..3], 2).is_err());
}

#[test]
fn list_decode_large_field_contains_sent() {
    let f = Field::with_ell(8).unwrap();
    let code = RsCode::new(&f, 32, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..40 {
        let m = random_msg(&mut rng, &f, 6);
        let mut w = code.encode(&m).unwrap();
        corrupt(&mut rng, &f, &mut w, 18);
        let list = code.list_decode(&w, 18).unwrap();
        assert!(list.contains(&m));
        for c in &list {
            assert!(hamming(&code.encode(c).unwrap(), &w) <= 18);
        }
    }
}

#[test]
fn k_wise_independence() {
    let f = Field::with_ell(2).unwrap();
    let code = RsCode::new(&f, 3, 2).unwrap();
    let words: Vec<Vec<Fe>> = all_messages(4, 2).map(|m| code.encode(&m).unwrap()).collect();
    for i in 0..3 {
        for j in 0..3 {
            let mut hist = [[0u32; 4]; 4];
            for w in &words {
                hist[w[i].0 as usize][w[j].0 as usize] += 1;
            }
            if i == j {
                for a in 0..4 {
                    assert_eq!(hist[a][a], 4);
                }
            } else {
                assert!(hist.iter().flatten().all(|&c| c == 1));
            }
        }
    }
}

#[test]
fn wrapper_examples() {
    let f = Field::with_ell(4).unwrap();
    let wc = WrapCode::for_radius(&f, 8, 6).unwrap();
    assert!(wc.correct_radius() >= 6);
    let zero = BitVec::zeros(8);
    assert_eq!(wc.decode(&wc.encode(&zero).unwrap()).unwrap(), zero);

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let v = BitVec::from_u64(0b1011_0010, 8);
    let mut w = wc.encode(&v).unwrap();
    corrupt(&mut rng, &f, &mut w, 6);
    assert_eq!(wc.decode(&w).unwrap(), v);

    // one step past the radius, pushed toward the nearest other codeword
    let c = wc.encode(&v).unwrap();
    let (other, dist) = (0..256u64)
        .filter(|&u| u != 0b1011_0010)
        .map(|u| {
            let cw = wc.encode(&BitVec::from_u64(u, 8)).unwrap();
            (cw.clone(), hamming(&cw, &c))
        })
        .min_by_key(|(_, d)| *d)
        .unwrap();
    let r = wc.correct_radius();
    assert!(dist > 2 * r);
    let mut w = c.clone();
    for i in (0..c.len()).filter(|&i| c[i] != other[i]).take(r + 1) {
        w[i] = other[i];
    }
    assert_ne!(wc.decode(&w).ok(), Some(v));
}

#[test]
fn wrapper_rejects_bad_padding() {
    let f = Field::with_ell(4).unwrap();
    let wc = WrapCode::new(&f, 6, 2, 8, 1).unwrap();
    // a valid inner codeword whose message sets a padding bit
    let cw = wc.inner().encode(&[Fe(0), Fe(0b1100)]).unwrap();
    assert_eq!(wc.decode(&cw), Err(CodingError::DecodeFailure));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn unique_decode_round_trip(seed in any::<u64>(), errs in 0usize..=5) {
        let f = Field::with_ell(4).unwrap();
        let code = RsCode::new(&f, 15, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_msg(&mut rng, &f, 4);
        let mut w = code.encode(&m).unwrap();
        corrupt(&mut rng, &f, &mut w, errs);
        prop_assert_eq!(code.unique_decode(&w).unwrap(), m);
    }

    #[test]
    fn wrapper_round_trip(seed in any::<u64>(), bits in 1usize..90, radius in 1usize..12, concentrate in any::<bool>()) {
        let f = Field::with_ell(4).unwrap();
        let wc = WrapCode::for_radius(&f, bits, radius).unwrap();
        prop_assert!(wc.correct_radius() >= radius);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = BitVec::from_bools(&(0..bits).map(|_| rng.random()).collect::<Vec<bool>>());
        let mut w = wc.encode(&v).unwrap();
        let r = wc.correct_radius();
        if concentrate {
            // all errors in the first block, copy-major
            let span = w.len().min(wc.inner().n() * wc.layout().rep);
            let errs = r.min(span);
            corrupt(&mut rng, &f, &mut w[..span], errs);
        } else {
            corrupt(&mut rng, &f, &mut w, r.min(wc.len()));
        }
        prop_assert_eq!(wc.decode(&w).unwrap(), v);
    }
}

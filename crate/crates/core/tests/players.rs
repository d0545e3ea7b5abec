use gdro_core::mirror_descent::stability_bound;
use gdro_core::sleeping_bandit::{ix_estimate, schedule_for};
use gdro_core::{DomainSpec, MaxPlayerState, MinPlayerState, RateMode};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn active_set(rng: &mut ChaCha8Rng, k: usize, min: usize) -> Vec<usize> {
    let size = rng.random_range(min..=k);
    let mut all: Vec<usize> = (0..k).collect();
    for i in 0..size {
        let j = rng.random_range(i..k);
        all.swap(i, j);
    }
    let mut a = all[..size].to_vec();
    a.sort_unstable();
    a
}

proptest! {
    #[test]
    fn distribution_lives_on_the_active_set(seed in 0u64..1000, k in 1usize..8, rounds in 1usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut max = MaxPlayerState::new(k, 0.01).unwrap();
        for _ in 0..rounds {
            let active = active_set(&mut rng, k, 1);
            let q = max.begin_round(&active).unwrap();
            let sum: f64 = q.probs().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            for (i, &p) in q.probs().iter().enumerate() {
                prop_assert!(p >= 0.0);
                if !active.contains(&i) {
                    prop_assert_eq!(p, 0.0);
                }
            }
            let chosen = q.sample(&mut rng);
            prop_assert!(active.contains(&chosen));
            max.update(&active, &q, chosen, rng.random::<f64>()).unwrap();
        }
    }

    #[test]
    fn schedule_is_non_increasing(k in 1usize..100, delta in 0.001f64..0.5, s in 1u64..1_000_000) {
        let (a, ga) = schedule_for(k, delta, s);
        let (b, gb) = schedule_for(k, delta, s + 1);
        prop_assert!(b <= a && gb <= ga);
        prop_assert!((ga - a / 2.0).abs() < 1e-15);
    }
}

#[test]
fn sleeping_regret_stays_within_bound() {
    let k = 5;
    let delta = 0.01;
    let horizon = 10_000;
    let means: Vec<f64> = (0..k).map(|i| 0.2 + 0.6 * i as f64 / (k - 1) as f64).collect();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut adversary = ChaCha8Rng::seed_from_u64(1000 + seed);
        let mut max = MaxPlayerState::new(k, delta).unwrap();
        let mut regret = vec![0.0; k];
        let mut active_total = 0u64;
        for _ in 0..horizon {
            let active = active_set(&mut adversary, k, 2);
            active_total += active.len() as u64;
            let h: Vec<f64> = means.iter().map(|&m| if rng.random::<f64>() < m { 1.0 } else { 0.0 }).collect();
            let q = max.begin_round(&active).unwrap();
            let chosen = q.sample(&mut rng);
            for &a in &active {
                regret[a] += h[chosen] - h[a];
            }
            max.update(&active, &q, chosen, h[chosen]).unwrap();
        }
        let worst = regret.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let bound = 3.0 * ((3.0 * k as f64 / delta).ln() * active_total as f64).sqrt();
        assert!(worst <= bound, "seed {seed}: regret {worst} > {bound}");
    }
}

#[test]
fn ix_estimates_are_biased_downward() {
    let q = [0.5, 0.3, 0.15, 0.05];
    let means = [0.9, 0.5, 0.7, 0.3];
    let gamma = 0.05;
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sum = [0.0; 4];
    let mut sq = [0.0; 4];
    for _ in 0..n {
        let u: f64 = rng.random();
        let chosen = q
            .iter()
            .scan(0.0, |c, p| {
                *c += p;
                Some(*c)
            })
            .position(|c| u < c)
            .unwrap_or(3);
        let h = if rng.random::<f64>() < means[chosen] { 1.0 } else { 0.0 };
        for i in 0..4 {
            let e = ix_estimate(h, q[i], gamma, i == chosen);
            sum[i] += e;
            sq[i] += e * e;
        }
    }
    for i in 0..4 {
        let mean = sum[i] / n as f64;
        let se = ((sq[i] / n as f64 - mean * mean).max(0.0) / n as f64).sqrt();
        let expected = means[i] * q[i] / (q[i] + gamma);
        assert!(mean <= means[i] + 3.0 * se, "group {i}: {mean} vs {}", means[i]);
        assert!((mean - expected).abs() <= 3.0 * se + 1e-12, "group {i}: {mean} vs {expected}");
    }
}

#[test]
fn large_cumulative_sums_stay_finite() {
    let sums = vec![1.0e5, -1.0e5, 3.0e4, 0.0, 1.0e5 - 1e-3];
    let max = MaxPlayerState::from_parts(sums, 400_000, 1_000_000, 0.01).unwrap();
    let q = max.action_distribution(&[0, 1, 2, 3, 4]).unwrap();
    assert!(q.probs().iter().all(|p| p.is_finite() && *p >= 0.0));
    assert!((q.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(q.prob(0) > 0.49 && q.prob(4) > 0.49);
}

#[test]
fn omd_regret_on_linear_losses() {
    let radius = 2.0;
    let g = 1.5;
    let c = [g * 0.6, -g * 0.8];
    for &horizon in &[100u64, 10_000] {
        for signs_seed in [None, Some(3u64)] {
            let mut rng = signs_seed.map(ChaCha8Rng::seed_from_u64);
            let domain = DomainSpec::ball(2, radius).unwrap();
            let mut min = MinPlayerState::init(domain, RateMode::time_varying(2.0 * radius, g), g).unwrap();
            let mut total = 0.0;
            let mut net = 0.0;
            for _ in 0..horizon {
                let s = match rng.as_mut() {
                    Some(r) => {
                        if r.random::<bool>() {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                    None => 1.0,
                };
                let ct = [s * c[0], s * c[1]];
                let th = min.theta();
                total += ct[0] * th[0] + ct[1] * th[1];
                net += s;
                min.step(&ct).unwrap();
            }
            // Best fixed point on the ball: -radius * G * |sum of signs|.
            let best = -radius * g * f64::abs(net);
            let regret = total - best;
            let bound = 3.0 * radius * g * (horizon as f64).sqrt();
            assert!(regret <= bound, "T={horizon}: regret {regret} > {bound}");
        }
    }
}

#[test]
fn iterates_are_feasible_and_average_is_exact() {
    let domain = DomainSpec::ball_and_box(1.0, vec![(-0.5, 1.0), (0.0, 2.0)]).unwrap();
    let mut min = MinPlayerState::init(domain.clone(), RateMode::time_varying(2.0, 1.0), 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut seen = vec![min.theta().to_vec()];
    for _ in 0..500 {
        let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        min.step(&[a.cos(), a.sin()]).unwrap();
        assert!(domain.contains(min.theta(), 1e-9));
        seen.push(min.theta().to_vec());
    }
    for d in 0..2 {
        let mean = seen.iter().map(|x| x[d]).sum::<f64>() / seen.len() as f64;
        assert!((mean - min.running_average()[d]).abs() < 1e-12);
    }
    assert_eq!(min.round(), 501);
}

#[test]
fn fixed_rate_steps_move_at_most_sigma_eta_g() {
    let domain = DomainSpec::ball(3, 1.0).unwrap();
    let rate = RateMode::fixed_for_horizon(2.0, 1.0, 1_000_000);
    let eta = rate.eta(1);
    assert!((eta - 0.004).abs() < 1e-15);
    let mut min = MinPlayerState::init(domain, rate, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut steps = 0u64;
    let start = min.theta().to_vec();
    for _ in 0..50 {
        let v: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        min.step(&v.iter().map(|x| x / n).collect::<Vec<_>>()).unwrap();
        steps += 1;
        let moved = min.theta().iter().zip(&start).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        assert!(moved <= stability_bound(eta, 1.0, steps) + 1e-12);
    }
}

#[test]
fn gradients_beyond_twice_lipschitz_abort() {
    let mut min = MinPlayerState::init(DomainSpec::unit_interval(), RateMode::time_varying(1.0, 1.0), 1.0).unwrap();
    assert!(matches!(min.step(&[2.5]), Err(gdro_core::Error::Logic(_))));
}

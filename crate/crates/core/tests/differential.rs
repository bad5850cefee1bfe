mod common;

use common::{close, e1, e1_profile, random_config, random_profile, random_size};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ranlat::model::SR_PERIODS;
use ranlat::oracle::simulate_slot_timeline;
use ranlat::sr::{schedule_slot_set, schedule_slot_set_oracle};
use ranlat::train::{packet_train_latency, run_packet_train, ByteState};
use ranlat::{Direction, Duplexing, Evaluator, Mode, Packet, PacketTrace, TddPattern};

fn single(o1: f64, size: u64) -> PacketTrace {
    PacketTrace::new(vec![Packet { arrival_ms: o1, size_bytes: size }])
}

#[test]
fn sr_set_examples() {
    let set = |t, d, p, o| schedule_slot_set(&TddPattern::common(t, d), p, o);
    assert_eq!(set(4, 3, 1, 0).set_a, vec![3]);
    assert_eq!(set(5, 3, 1, 0).set_a, vec![3, 4]);
    let s = set(10, 7, 4, 1);
    assert_eq!(s.set_a, vec![2, 4, 7, 9]);
    assert_eq!(s.set_b, vec![7, 9]);
}

#[test]
fn sr_set_matches_brute_force_on_small_periods() {
    for t in [2u32, 4, 5, 6, 8, 10, 12, 16, 20] {
        for d in 1..t {
            let pat = TddPattern::common(t, d);
            for p in SR_PERIODS {
                for o in 0..p {
                    assert_eq!(
                        schedule_slot_set(&pat, p, o),
                        schedule_slot_set_oracle(&pat, p, o),
                        "T={t} d={d} P={p} O={o}"
                    );
                }
            }
        }
    }
}

#[test]
fn sr_set_matches_brute_force_for_every_duplexing() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..3000 {
        let cfg = random_config(&mut rng);
        let (p, o) = (cfg.ctrl.sr_period, cfg.ctrl.sr_offset);
        assert_eq!(
            schedule_slot_set(&cfg.pattern, p, o),
            schedule_slot_set_oracle(&cfg.pattern, p, o),
            "{cfg:?}"
        );
    }
}

/// An evaluator whose slot capacity exists for `mode`.
fn usable(cfg: &ranlat::SystemConfig, mode: Mode) -> Option<Evaluator> {
    let ev = Evaluator::new(cfg, mode).ok()?;
    let cap = match mode.direction {
        Direction::Uplink => ev.ul_capacity(),
        Direction::Downlink => ev.dl_capacity(),
    };
    cap.is_ok_and(|c| c > 0).then_some(ev)
}

#[test]
fn closed_forms_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut compared = 0usize;
    let mut per_dup = [0usize; 3];
    while compared < 12_000 {
        let cfg = random_config(&mut rng);
        let dr = random_profile(&mut rng);
        for mode in [Mode::UL, Mode::GRANT_FREE, Mode::DL] {
            let Some(ev) = usable(&cfg, mode) else { continue };
            for _ in 0..4 {
                let o1 = rng.gen_range(0.0..50.0);
                let size = random_size(&mut rng, &cfg);
                let closed = ev.evaluate(&dr, o1, size);
                let walked = simulate_slot_timeline(&cfg, mode, &[dr], &single(o1, size))
                    .unwrap()
                    .pop()
                    .unwrap();
                match (&closed, &walked) {
                    (Ok(a), Ok(b)) => {
                        assert!(
                            close(a.total, b.total),
                            "{mode:?} {cfg:?} {dr:?} o1={o1} size={size}: {} vs {}",
                            a.total,
                            b.total
                        );
                        assert!(a.components().all(|(_, v)| v >= -1e-12), "{a:?}");
                        compared += 1;
                        per_dup[cfg.pattern.duplexing as usize] += 1;
                    }
                    (Err(_), Err(_)) => {}
                    _ => panic!("{mode:?} {cfg:?} {dr:?} o1={o1} size={size}: {closed:?} vs {walked:?}"),
                }
            }
        }
    }
    assert!(per_dup.iter().all(|&n| n > 1000), "{per_dup:?}");
}

#[test]
fn e1_matches_oracle_over_arrival_phase() {
    let cfg = e1();
    let dr = e1_profile();
    for mode in [Mode::UL, Mode::GRANT_FREE, Mode::DL] {
        let ev = Evaluator::new(&cfg, mode).unwrap();
        for i in 0..500 {
            let o1 = f64::from(i) * 0.013;
            for size in [1, 100, 101, 2000, 9000] {
                let a = ev.evaluate(&dr, o1, size).unwrap().total;
                let b = simulate_slot_timeline(&cfg, mode, &[dr], &single(o1, size)).unwrap()[0]
                    .as_ref()
                    .unwrap()
                    .total;
                assert!(close(a, b), "{mode:?} o1={o1} size={size}: {a} vs {b}");
            }
        }
    }
}

/// Sizes are capped at a few hundred slots of capacity to bound the oracle walk.
fn random_trace(rng: &mut ChaCha8Rng, ev: &Evaluator, n: usize) -> PacketTrace {
    let cfg = ev.config();
    let cap = match ev.mode().direction {
        Direction::Uplink => ev.ul_capacity(),
        Direction::Downlink => ev.dl_capacity(),
    }
    .unwrap();
    let mut t = rng.gen_range(0.0..5.0);
    let mut packets = Vec::with_capacity(n);
    for _ in 0..n {
        let size = random_size(rng, cfg).min(cfg.ctrl.initial_grant_bytes + 300 * cap);
        packets.push(Packet { arrival_ms: t, size_bytes: size });
        t += if rng.gen_bool(0.7) { rng.gen_range(0.0..2.0) } else { rng.gen_range(0.0..20.0) };
    }
    PacketTrace::new(packets)
}

#[test]
fn packet_train_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mut traces = 0;
    while traces < 400 {
        let cfg = random_config(&mut rng);
        let Some(ev) = usable(&cfg, Mode::UL) else { continue };
        let n = rng.gen_range(2..30);
        let trace = random_trace(&mut rng, &ev, n);
        let draws: Vec<_> = (0..n).map(|_| random_profile(&mut rng)).collect();
        let run = run_packet_train(&ev, &draws, &trace).unwrap();
        let walked = simulate_slot_timeline(&cfg, Mode::UL, &draws, &trace).unwrap();
        for (i, (a, b)) in run.results.iter().zip(&walked).enumerate() {
            match (a, b) {
                (Ok(a), Ok(b)) => assert!(
                    close(a.total, b.total),
                    "packet {i}: {} vs {}\n{cfg:?}\n{trace:?}",
                    a.total,
                    b.total
                ),
                (Err(_), Err(_)) => {}
                _ => panic!("packet {i}: {a:?} vs {b:?}\n{cfg:?}"),
            }
        }

        let buffered: u64 = trace
            .packets
            .iter()
            .zip(&run.results)
            .filter(|(_, r)| r.is_ok())
            .map(|(p, _)| p.size_bytes)
            .sum();
        let sent = run.entered[ByteState::Sent as usize];
        assert_eq!(run.entered[ByteState::Idle as usize], buffered);
        assert_eq!(sent, buffered);
        assert_eq!(run.slots.iter().map(|s| s.served).sum::<u64>(), sent);
        let bi = ev.ul_capacity().unwrap();
        for s in &run.slots {
            assert!(s.large_bytes <= bi, "{s:?}");
            assert!(s.served <= s.initial_bytes + s.large_bytes, "{s:?}");
            assert!(ev.config().pattern.is_ul(s.slot), "{s:?}");
        }
        traces += 1;
    }
}

#[test]
fn single_packet_train_equals_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut done = 0;
    while done < 2000 {
        let cfg = random_config(&mut rng);
        let Some(ev) = usable(&cfg, Mode::UL) else { continue };
        let dr = random_profile(&mut rng);
        let o1 = rng.gen_range(0.0..30.0);
        let size = random_size(&mut rng, &cfg);
        let a = ev.evaluate(&dr, o1, size);
        let b = packet_train_latency(&cfg, &[dr], &single(o1, size)).unwrap().pop().unwrap();
        match (a, b) {
            (Ok(a), Ok(b)) => {
                assert!(close(a.total, b.total));
                assert!(a.components().eq(b.components()), "{a:?} vs {b:?}");
            }
            (Err(_), Err(_)) => {}
            (a, b) => panic!("{a:?} vs {b:?}"),
        }
        done += 1;
    }
}

#[test]
fn second_packet_rides_first_grant() {
    // Both arrive before the SR slot; the second waits in the buffer and
    // leaves with the first on the initial grant.
    let mut cfg = e1();
    cfg.ctrl.sr_period = 5;
    cfg.ctrl.sr_offset = 3;
    let dr = e1_profile();
    let trace = PacketTrace::new(vec![
        Packet { arrival_ms: 0.2, size_bytes: 20 },
        Packet { arrival_ms: 0.6, size_bytes: 20 },
    ]);
    let run = run_packet_train(&Evaluator::new(&cfg, Mode::UL).unwrap(), &[dr, dr], &trace).unwrap();
    let first = run.results[0].as_ref().unwrap().total;
    let second = run.results[1].as_ref().unwrap().total;
    assert!(close(first, 4.7));
    assert!(close(second, 4.7 - 0.4));
    assert_eq!(run.slots.len(), 1);
    assert_eq!(run.slots[0].slot, 8);
    assert_eq!(run.slots[0].served, 40);
    let walked = simulate_slot_timeline(&cfg, Mode::UL, &[dr, dr], &trace).unwrap();
    assert!(close(walked[1].as_ref().unwrap().total, second));
}

#[test]
fn fdd_and_mini_slot_match_oracle_on_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut done = 0;
    while done < 300 {
        let cfg = random_config(&mut rng);
        if cfg.pattern.duplexing == Duplexing::TddCommon {
            continue;
        }
        for mode in [Mode::GRANT_FREE, Mode::DL] {
            let Some(ev) = usable(&cfg, mode) else { continue };
            let n = 10;
            let trace = random_trace(&mut rng, &ev, n);
            let draws: Vec<_> = (0..n).map(|_| random_profile(&mut rng)).collect();
            let walked = simulate_slot_timeline(&cfg, mode, &draws, &trace).unwrap();
            for ((p, dr), w) in trace.packets.iter().zip(&draws).zip(&walked) {
                let c = ev.evaluate(dr, p.arrival_ms, p.size_bytes);
                match (&c, w) {
                    (Ok(a), Ok(b)) => assert!(close(a.total, b.total)),
                    (Err(_), Err(_)) => {}
                    _ => panic!("{c:?} vs {w:?}"),
                }
            }
            done += 1;
        }
    }
}

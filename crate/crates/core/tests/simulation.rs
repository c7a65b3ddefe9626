use eesaa_core::{
    compute_summary, run_batch, run_simulation, BatchJob, Mode, NetworkConfig, NodeState, Position, ProtocolKind,
    RoundRecord, Simulation,
};

fn cfg(seed: u64) -> NetworkConfig {
    NetworkConfig {
        rng_seed: seed,
        ..Default::default()
    }
}

/// Steps a run to completion, handing each round's before/after node states
/// and record to `check`.
fn observe(cfg: NetworkConfig, kind: ProtocolKind, mut check: impl FnMut(&[NodeState], &RoundRecord, &[NodeState])) {
    let mut sim = Simulation::new(cfg, kind).unwrap();
    loop {
        let before = sim.nodes().to_vec();
        let Some(record) = sim.step() else { break };
        check(&before, &record, sim.nodes());
    }
}

fn total(nodes: &[NodeState]) -> f64 {
    nodes.iter().map(|n| n.residual_energy).sum()
}

fn check_common(before: &[NodeState], rec: &RoundRecord, after: &[NodeState]) {
    let n = after.len() as u32;
    assert_eq!(rec.alive + rec.dead, n);
    let alive_before = before.iter().filter(|x| x.is_alive()).count() as u32;
    assert!(rec.alive <= alive_before);
    assert!(rec.ch_count <= alive_before);
    assert!(rec.packets_to_bs <= u64::from(rec.ch_count));
    if rec.alive == alive_before {
        assert_eq!(rec.packets_to_bs, u64::from(rec.ch_count), "round {}", rec.round);
    }

    let spent = total(before) - total(after);
    assert!(
        (spent - rec.energy_dissipated).abs() <= 1e-12 * total(before).max(1.0),
        "round {}",
        rec.round
    );
    assert_eq!(rec.total_residual, total(after));

    for (b, a) in before.iter().zip(after) {
        assert!(a.residual_energy <= b.residual_energy);
        assert!(a.residual_energy >= 0.0);
        assert_eq!(a.mode == Mode::Dead, a.residual_energy == 0.0);
        if !a.is_alive() {
            assert!(!a.is_ch && !a.cch_flag);
        }
        if !b.is_alive() {
            assert_eq!(a.residual_energy, 0.0);
            assert!(a.cluster_of.is_none() && !a.is_ch);
        }
        // every awake node either transmits or heads a cluster
        if b.is_active() && rec.ch_count > 0 {
            assert!(a.residual_energy < b.residual_energy, "node {} idle while awake", a.id);
        }
        // roles only go to nodes that were awake when the round started
        if a.is_ch || a.cluster_of.is_some() || a.cch_flag {
            assert!(b.is_active(), "node {} took a role while {:?}", a.id, b.mode);
        }
    }
}

#[test]
fn eesaa_round_invariants() {
    for seed in [1, 2, 3, 11, 99] {
        observe(cfg(seed), ProtocolKind::Eesaa, |before, rec, after| {
            check_common(before, rec, after);

            for node in after {
                let Some(p) = node.partner else { continue };
                let partner = &after[p.index()];
                assert_eq!(partner.partner, Some(node.id));
                assert_eq!(partner.app_type, node.app_type);
                if node.is_alive() && partner.is_alive() {
                    assert_ne!(node.mode, partner.mode, "pair {} {} round {}", node.id, p, rec.round);
                }
                if node.is_alive() && !partner.is_alive() {
                    assert_eq!(node.mode, Mode::Active);
                }
                if node.partner.is_none() && node.is_alive() {
                    assert_eq!(node.mode, Mode::Active);
                }
            }

            let handed_over: Vec<_> = before
                .iter()
                .filter(|n| n.is_alive() && n.cch_flag)
                .map(|n| n.id)
                .collect();
            if !handed_over.is_empty() {
                assert_eq!(rec.ch_count as usize, handed_over.len(), "round {}", rec.round);
                for n in after.iter().filter(|n| n.is_ch) {
                    assert!(handed_over.contains(&n.id));
                }
            } else if before.iter().any(NodeState::is_active) {
                assert!(rec.ch_count >= 1);
            }
        });
    }
}

#[test]
fn baseline_round_invariants() {
    for kind in [ProtocolKind::Leach, ProtocolKind::Sep, ProtocolKind::Deec] {
        for seed in [4, 5] {
            observe(cfg(seed), kind, |before, rec, after| {
                check_common(before, rec, after);
                assert!(after.iter().all(|n| n.mode != Mode::Sleep));
            });
        }
    }
}

#[test]
fn heterogeneous_sep_conserves_energy() {
    let c = NetworkConfig {
        sep_advanced_fraction: 0.2,
        sep_energy_factor: 1.0,
        ..cfg(8)
    };
    let sim = Simulation::new(c.clone(), ProtocolKind::Sep).unwrap();
    let start = sim.initial_total_energy();
    assert!((start - (80.0 * 0.5 + 20.0 * 1.0)).abs() < 1e-12);
    let s = sim.run();
    let spent: f64 = s.per_round.iter().map(|r| r.energy_dissipated).sum();
    let left = s.per_round.last().unwrap().total_residual;
    assert!(((start - left) - spent).abs() <= 1e-9 * start);
    observe(c, ProtocolKind::Sep, check_common);
}

#[test]
fn global_conservation_and_monotone_series() {
    for kind in ProtocolKind::ALL {
        for seed in 0..3 {
            let c = cfg(seed);
            let s = run_simulation(&c, kind).unwrap();
            let start = f64::from(c.n_nodes) * c.initial_energy;
            let spent: f64 = s.per_round.iter().map(|r| r.energy_dissipated).sum();
            let left = s.per_round.last().unwrap().total_residual;
            assert!(((start - left) - spent).abs() <= 1e-9 * start, "{kind} seed {seed}");
            for w in s.per_round.windows(2) {
                assert!(w[1].alive <= w[0].alive);
                assert!(w[1].total_residual <= w[0].total_residual);
                assert_eq!(w[1].round, w[0].round + 1);
            }
            let (f, l) = (s.first_death_round.unwrap(), s.last_death_round.unwrap());
            assert!(f <= l && l <= s.rounds_simulated);
            assert_eq!(s.instability, Some(l - f));
        }
    }
}

#[test]
fn runs_are_deterministic() {
    for kind in ProtocolKind::ALL {
        let a = run_simulation(&cfg(7), kind).unwrap();
        let b = run_simulation(&cfg(7), kind).unwrap();
        assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());
        let c = run_simulation(&cfg(8), kind).unwrap();
        assert_ne!(a, c);
    }
}

#[test]
fn sep_without_advanced_nodes_is_leach() {
    for seed in 0..3 {
        let leach = run_simulation(&cfg(seed), ProtocolKind::Leach).unwrap();
        let sep = run_simulation(&cfg(seed), ProtocolKind::Sep).unwrap();
        assert_eq!(leach, sep);
    }
}

#[test]
fn leach_epoch_serves_each_node_once() {
    for seed in 0..5 {
        let mut sim = Simulation::new(cfg(seed), ProtocolKind::Leach).unwrap();
        let mut served = vec![0u32; 100];
        for round in 1..=19 {
            sim.step().unwrap();
            if round >= 10 {
                for n in sim.nodes().iter().filter(|n| n.is_ch) {
                    served[n.id.index()] += 1;
                }
            }
        }
        assert!(served.iter().all(|&c| c <= 1), "seed {seed}: {served:?}");
    }
}

#[test]
fn leach_first_death_band_is_narrow() {
    let jobs: Vec<BatchJob> = (0..10)
        .map(|s| BatchJob {
            config: NetworkConfig::default(),
            protocol: ProtocolKind::Leach,
            seed: s,
        })
        .collect();
    let report = run_batch(&jobs);
    let fnd = report.aggregates[0].first_death_round;
    assert_eq!(fnd.count, 10);
    assert!((fnd.max - fnd.min) < 0.4 * fnd.mean, "{fnd:?}");
}

#[test]
fn lone_node_heads_every_round() {
    for kind in ProtocolKind::ALL {
        let c = NetworkConfig { n_nodes: 1, ..cfg(3) };
        let s = run_simulation(&c, kind).unwrap();
        assert!(s.per_round.iter().all(|r| r.ch_count == 1 && r.packets_to_ch == 0));
        assert_eq!(s.first_death_round, s.last_death_round);
        assert!(s.first_death_round.is_some());
        assert_eq!(s.instability, Some(0));
    }
}

#[test]
fn zero_rounds() {
    let c = NetworkConfig {
        max_rounds: 0,
        ..cfg(3)
    };
    for kind in ProtocolKind::ALL {
        let s = run_simulation(&c, kind).unwrap();
        assert!(s.per_round.is_empty());
        assert_eq!(s.first_death_round, None);
        assert_eq!(s.last_death_round, None);
        assert_eq!(s.rounds_simulated, 0);
    }
}

#[test]
fn lone_pair_keeps_the_self_reselecting_head_awake() {
    // Both nodes fit in a 10 m field, so they always pair. The awake node is
    // elected, heads an empty cluster, and is the only handover candidate, so
    // it keeps the role and its partner sleeps until it dies.
    let c = NetworkConfig {
        n_nodes: 2,
        field_width: 10.0,
        field_height: 10.0,
        bs_position: Position::new(5.0, 80.0),
        ..cfg(5)
    };
    let mut sim = Simulation::new(c, ProtocolKind::Eesaa).unwrap();
    assert_eq!(sim.pairing().unwrap().pairs.len(), 1);
    let awake = sim.nodes().iter().find(|n| n.is_active()).unwrap().id;
    let asleep = sim.nodes().iter().find(|n| n.mode == Mode::Sleep).unwrap().id;
    for _ in 0..4 {
        sim.step().unwrap();
        assert_eq!(sim.nodes()[awake.index()].mode, Mode::Active);
        assert_eq!(sim.nodes()[asleep.index()].mode, Mode::Sleep);
        assert_eq!(sim.nodes()[asleep.index()].residual_energy, 0.5);
    }
    // once the head dies the sleeper takes over
    while sim.nodes()[awake.index()].is_alive() {
        sim.step().unwrap();
    }
    assert_eq!(sim.nodes()[asleep.index()].mode, Mode::Active);
    sim.step().unwrap();
    assert!(sim.nodes()[asleep.index()].residual_energy < 0.5);
}

#[test]
fn invalid_config_rejected_before_running() {
    let c = NetworkConfig {
        n_nodes: 0,
        ..Default::default()
    };
    assert_eq!(run_simulation(&c, ProtocolKind::Eesaa).unwrap_err().key(), "n_nodes");
}

#[test]
fn batch_keeps_input_order_and_shapes() {
    let mut jobs = Vec::new();
    for protocol in [ProtocolKind::Eesaa, ProtocolKind::Leach] {
        for seed in 0..10 {
            jobs.push(BatchJob {
                config: NetworkConfig::default(),
                protocol,
                seed,
            });
        }
    }
    jobs.push(jobs[3].clone());
    jobs.push(BatchJob {
        config: NetworkConfig {
            p_desired: 2.0,
            ..Default::default()
        },
        protocol: ProtocolKind::Leach,
        seed: 0,
    });
    let report = run_batch(&jobs);
    assert_eq!(report.results.len(), 22);
    assert_eq!(report.aggregates.len(), 2);
    assert_eq!(report.aggregates[0].protocol, ProtocolKind::Eesaa);
    assert_eq!(report.aggregates[0].runs, 11);
    assert_eq!(report.results[3], report.results[20]);
    assert_eq!(report.results[21].as_ref().unwrap_err().key(), "p_desired");
    for (job, result) in jobs.iter().zip(&report.results).take(20) {
        let direct = run_simulation(
            &NetworkConfig {
                rng_seed: job.seed,
                ..job.config.clone()
            },
            job.protocol,
        )
        .unwrap();
        assert_eq!(result.as_ref().unwrap(), &direct);
    }
}

#[test]
fn summary_matches_records() {
    let s = run_simulation(&cfg(12), ProtocolKind::Eesaa).unwrap();
    let again = compute_summary(s.per_round.clone());
    assert_eq!(s, again);
    assert_eq!(s.per_round[0].round, 1);
    assert_eq!(s.per_round[0].alive, 100);
}

use satr::bernoulli::{sample, ProbVector, SeedTag};
use satr::error::Error;
use satr::rng::Stream;
use satr::rsnn::{DenseNetwork, LifState, Network, SpikingPolicy, Topology};

fn topo(d_in: usize, d_h: usize, d_out: usize, k: usize) -> Topology {
    Topology {
        substeps: k,
        ..Topology::new(d_in, d_h, d_out)
    }
}

fn run_traced(net: &dyn SpikingPolicy, obs_seq: &[Vec<f32>]) -> (Vec<Vec<u8>>, Vec<Vec<f32>>) {
    let mut state = net.initial_state();
    let mut spikes = Vec::new();
    let mut actions = Vec::new();
    for obs in obs_seq {
        let a = net
            .policy_step_traced(&mut state, obs, &mut |_, s| spikes.push(s.to_vec()))
            .unwrap();
        actions.push(a);
    }
    (spikes, actions)
}

#[test]
fn zero_connectivity_is_silent() {
    let t = topo(3, 16, 2, 10);
    let net = Network::from_bits(&t, &vec![0; t.synapse_count()]).unwrap();
    let mut st = net.initial_state();
    for k in 0..20 {
        let obs = [100.0 * k as f32, -50.0, 3.0];
        assert_eq!(net.policy_step(&mut st, &obs).unwrap(), vec![0.0, 0.0]);
    }
    assert_eq!(st.spike_total, 0);
}

#[test]
fn zero_input_from_reset_is_silent() {
    let t = topo(4, 32, 2, 33);
    let rho = ProbVector::uniform(t.synapse_count(), 0.5, 1e-3).unwrap();
    for m in 0..10 {
        let theta = sample(&rho, SeedTag::train(2, 0, m));
        let net = Network::instantiate(&t, &theta).unwrap();
        let mut st = net.initial_state();
        for _ in 0..5 {
            assert_eq!(net.policy_step(&mut st, &[0.0; 4]).unwrap(), vec![0.0, 0.0]);
        }
        assert!(st.is_zero());
    }
}

#[test]
fn threshold_crossing_matches_scalar_recurrence() {
    let (d_in, k) = (5usize, 40usize);
    let t = topo(d_in, 8, 1, k);
    let mut bits = vec![0u8; t.synapse_count()];
    for i in 0..d_in {
        bits[3 * d_in + i] = 1; // only neuron 3 hears the input
    }
    let net = Network::from_bits(&t, &bits).unwrap();
    for level in [0.2f32, 0.5, 1.0, 3.0] {
        // closed form v_k = R_in I dt (1 - a^k) / (1 - a)
        let a = (-t.dt / t.tau_m).exp();
        let drive = t.r_in() * (d_in as f64 * f64::from(level)) * t.dt;
        let expected = (1..=k).find(|&n| drive * (1.0 - a.powi(n as i32)) / (1.0 - a) >= t.v_th);
        if let Some(n) = expected {
            let margin = drive * (1.0 - a.powi(n as i32)) / (1.0 - a) - t.v_th;
            let prev = drive * (1.0 - a.powi(n as i32 - 1)) / (1.0 - a);
            assert!(margin > 1e-4 && t.v_th - prev > 1e-4, "borderline level {level}");
        }
        let mut st = net.initial_state();
        let mut first = None;
        net.policy_step_traced(&mut st, &[level; 5], &mut |sub, s| {
            if first.is_none() && s[3] == 1 {
                first = Some(sub + 1);
            }
            assert!(s.iter().enumerate().all(|(j, &b)| j == 3 || b == 0));
        })
        .unwrap();
        assert_eq!(first, expected, "level {level}");
    }
}

#[test]
fn bitset_and_dense_engines_agree() {
    let s = Stream::new(1234);
    let mut active = 0;
    for pair in 0..100u64 {
        let p = s.derive(pair);
        let d_in = 1 + p.range_at(0, 0.0, 10.0) as usize;
        let d_h = 2 + p.range_at(1, 0.0, 70.0) as usize;
        let d_out = 1 + p.range_at(2, 0.0, 3.0) as usize;
        let k = 1 + p.range_at(3, 0.0, 12.0) as usize;
        let t = Topology {
            exc_ratio: p.range_at(4, 0.2, 0.8),
            ..topo(d_in, d_h, d_out, k)
        };
        let rho = ProbVector::uniform(t.synapse_count(), p.range_at(5, 0.1, 0.9), 1e-3).unwrap();
        let theta = sample(&rho, SeedTag::train(pair, 0, 0));
        let obs: Vec<Vec<f32>> = (0..50u64)
            .map(|step| {
                (0..d_in)
                    .map(|i| (3.0 * p.derive(step + 10).normal_at(i as u64)) as f32)
                    .collect()
            })
            .collect();
        let bit = Network::instantiate(&t, &theta).unwrap();
        let dense = DenseNetwork::from_bits(&t, &theta.bits).unwrap();
        let (sb, ab) = run_traced(&bit, &obs);
        let (sd, ad) = run_traced(&dense, &obs);
        assert_eq!(sb, sd, "spike trains differ for pair {pair}");
        assert_eq!(ab, ad, "actions differ for pair {pair}");
        active += sb.iter().flatten().filter(|&&x| x == 1).count();
    }
    assert!(active > 0);
}

#[test]
fn same_theta_same_behaviour() {
    let t = topo(3, 24, 1, 8);
    let rho = ProbVector::uniform(t.synapse_count(), 0.4, 1e-3).unwrap();
    let theta = sample(&rho, SeedTag::train(9, 3, 1));
    let a = Network::instantiate(&t, &theta).unwrap();
    let b = Network::instantiate(&t, &sample(&rho, SeedTag::train(9, 3, 1))).unwrap();
    assert_eq!(a, b);
    let obs: Vec<Vec<f32>> = (0..30).map(|k| vec![k as f32 * 0.3, -1.0, 2.0]).collect();
    assert_eq!(run_traced(&a, &obs), run_traced(&b, &obs));
}

#[test]
fn dale_sign_probes() {
    let t = topo(2, 20, 1, 4);
    let rho = ProbVector::uniform(t.synapse_count(), 0.6, 1e-3).unwrap();
    let net = Network::instantiate(&t, &sample(&rho, SeedTag::train(4, 0, 0))).unwrap();
    for j in 0..t.d_h {
        let mut s = vec![0u8; t.d_h];
        s[j] = 1;
        let drive = net.recurrent_drive(&s).unwrap();
        if t.is_excitatory(j) {
            assert!(drive.iter().all(|&x| x >= 0), "excitatory {j}: {drive:?}");
        } else {
            assert!(drive.iter().all(|&x| x <= 0), "inhibitory {j}: {drive:?}");
        }
        assert!(drive.iter().any(|&x| x != 0));
    }
}

#[test]
fn readout_bounded_under_saturation() {
    let t = topo(4, 32, 2, 33);
    let net = Network::from_bits(&t, &vec![1; t.synapse_count()]).unwrap();
    let dense = DenseNetwork::from_bits(&t, &vec![1; t.synapse_count()]).unwrap();
    let bound = t.readout_bound() as f32;
    for policy in [&net as &dyn SpikingPolicy, &dense] {
        let mut st = policy.initial_state();
        for _ in 0..200 {
            let y = policy.policy_step(&mut st, &[1e6; 4]).unwrap();
            assert!(y.iter().all(|v| v.is_finite() && v.abs() <= bound));
        }
    }
    // an excitatory-only readout drives y towards the bound without crossing it
    let t = Topology {
        exc_ratio: 1.0,
        ..t
    };
    let net = Network::from_bits(&t, &vec![1; t.synapse_count()]).unwrap();
    let mut st = net.initial_state();
    let mut y = vec![0.0];
    for _ in 0..200 {
        y = net.policy_step(&mut st, &[1e6; 4]).unwrap();
    }
    assert!(y.iter().all(|&v| v > 0.0 && v <= t.readout_bound() as f32));
}

#[test]
fn all_ones_cancels_recurrent_drive() {
    // 2 excitatory + 2 inhibitory with identical input: all fire together
    let t = topo(2, 4, 1, 6);
    let net = Network::from_bits(&t, &vec![1; t.synapse_count()]).unwrap();
    let mut st = net.initial_state();
    let mut fired = 0;
    net.policy_step_traced(&mut st, &[50.0, 50.0], &mut |_, s| {
        assert!(s.iter().all(|&b| b == s[0]));
        fired += usize::from(s[0]);
    })
    .unwrap();
    assert!(fired >= 2);
    assert!(st.i_syn.iter().all(|&i| i == 0.0));
    assert_eq!(st.y, vec![0.0]);
    assert_eq!(net.recurrent_drive(&[1, 1, 1, 1]).unwrap(), vec![0, 0, 0, 0]);
}

#[test]
fn reset_zeroes_and_is_idempotent() {
    let t = topo(2, 16, 1, 33);
    let net = Network::from_bits(&t, &vec![1; t.synapse_count()]).unwrap();
    let mut st = net.initial_state();
    net.policy_step(&mut st, &[5.0, 1.0]).unwrap();
    assert!(!st.is_zero());
    st.reset();
    assert!(st.is_zero());
    assert_eq!(st.spike_total, 0);
    st.reset();
    assert!(st.is_zero());
    let mut fresh = LifState::new(&t);
    let a = net.policy_step(&mut st, &[2.0, 2.0]).unwrap();
    let b = net.policy_step(&mut fresh, &[2.0, 2.0]).unwrap();
    assert_eq!(a, b);
}

#[test]
fn input_validation() {
    let t = topo(3, 8, 1, 4);
    let net = Network::from_bits(&t, &vec![1; t.synapse_count()]).unwrap();
    let mut st = net.initial_state();
    assert!(matches!(
        net.policy_step(&mut st, &[1.0, f32::NAN, 0.0]),
        Err(Error::NonFiniteObservation(1))
    ));
    assert!(net.policy_step(&mut st, &[1.0, 0.0]).is_err());
    assert!(Network::from_bits(&t, &[1, 0, 1]).is_err());
    assert!(DenseNetwork::from_weights(&t, &vec![f64::INFINITY; t.synapse_count()]).is_err());
}

#[test]
fn synapse_count_matches_layout() {
    let t = topo(7, 11, 3, 2);
    assert_eq!(t.synapse_count(), 7 * 11 + 11 * 11 + 11 * 3);
    assert_eq!(t.n_exc(), 5);
    let theta: Vec<u32> = (0..t.synapse_count() as u32).collect();
    let (a, b, c) = t.split(&theta).unwrap();
    assert_eq!((a.len(), b.len(), c.len()), (77, 121, 33));
    assert_eq!(b[0], 77);
}

//! Sample a connectivity, build both engines and drive them with the same
//! observation sequence.

use satr::bernoulli::{sample, ProbVector, SeedTag};
use satr::rsnn::{DenseNetwork, Network, SpikingPolicy, Topology};

fn main() -> satr::Result<()> {
    let topo = Topology {
        substeps: 16,
        ..Topology::new(4, 64, 2)
    };
    let rho = ProbVector::uniform(topo.synapse_count(), 0.3, 1e-3)?;
    let theta = sample(&rho, SeedTag::train(1, 0, 0));
    println!("{} synapses, {} present, {} excitatory neurons", theta.len(), theta.count_ones(), topo.n_exc());

    let bitset = Network::instantiate(&topo, &theta)?;
    let dense = DenseNetwork::from_bits(&topo, &theta.bits)?;
    let mut sb = bitset.initial_state();
    let mut sd = dense.initial_state();
    for step in 0..10 {
        let x = (step as f32 * 0.7).sin() * 2.0;
        let obs = [x.max(0.0), (-x).max(0.0), 1.0, 0.5];
        let a = bitset.policy_step(&mut sb, &obs)?;
        let b = dense.policy_step(&mut sd, &obs)?;
        assert_eq!(a, b);
        println!("step {step}: action [{:+.4}, {:+.4}]  spikes so far {}", a[0], a[1], sb.spike_total);
    }
    println!("hidden spike rate {:.4}", sb.spike_rate());
    Ok(())
}

//! Training energy for a spiking policy population, at the default spike
//! rate and at a measured one.

use satr::energy::{energy_per_rollout, format_energy_table, EnergyParams};

fn main() {
    let base = EnergyParams::default();
    println!("one rollout: {:.3} mJ", energy_per_rollout(&base) * 1e3);
    println!(
        "  neuron updates {:.3} mJ, synaptic events {:.3} mJ",
        base.update_energy() * 1e3,
        base.synaptic_energy() * 1e3
    );
    println!();
    print!("{}", format_energy_table(&base, &[1024, 2048, 4096, 8192], Some(0.01)));
}

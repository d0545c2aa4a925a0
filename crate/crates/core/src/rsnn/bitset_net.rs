use crate::bernoulli::ConnectivitySample;
use crate::bitset::{iter_ones, signed_integrate_into, PackedBitMatrix};
use crate::error::Result;

use super::{impl_policy, Scratch, Synapses, Topology};

/// Binary-connectivity network executed with packed AND+popcount kernels.
///
/// All matrices are built once from a connectivity sample and never change
/// during the episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    topology: Topology,
    readin: PackedBitMatrix<u64>,
    rec_exc: PackedBitMatrix<u64>,
    rec_inh: PackedBitMatrix<u64>,
    out_exc: PackedBitMatrix<u64>,
    out_inh: PackedBitMatrix<u64>,
}

impl Network {
    pub fn instantiate(topology: &Topology, theta: &ConnectivitySample) -> Result<Self> {
        Self::from_bits(topology, &theta.bits)
    }

    pub fn from_bits(topology: &Topology, bits: &[u8]) -> Result<Self> {
        topology.validate()?;
        let (readin, rec, out) = topology.split(bits)?;
        let (d_in, d_h, d_out) = (topology.d_in, topology.d_h, topology.d_out);
        let n_exc = topology.n_exc();
        let on = |v: &[u8], cols: usize, r: usize, c: usize| v[r * cols + c] != 0;
        Ok(Self {
            topology: topology.clone(),
            readin: PackedBitMatrix::from_rows(readin, d_h, d_in)?,
            rec_exc: PackedBitMatrix::from_fn(d_h, d_h, |r, c| c < n_exc && on(rec, d_h, r, c)),
            rec_inh: PackedBitMatrix::from_fn(d_h, d_h, |r, c| c >= n_exc && on(rec, d_h, r, c)),
            out_exc: PackedBitMatrix::from_fn(d_out, d_h, |r, c| c < n_exc && on(out, d_h, r, c)),
            out_inh: PackedBitMatrix::from_fn(d_out, d_h, |r, c| c >= n_exc && on(out, d_h, r, c)),
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    /// Signed recurrent input each hidden neuron receives from `spikes`.
    pub fn recurrent_drive(&self, spikes: &[u8]) -> Result<Vec<i32>> {
        let packed = crate::bitset::PackedBitVector::pack(spikes);
        crate::bitset::signed_integrate(&self.rec_exc, &self.rec_inh, &packed)
    }

    pub fn readin_matrix(&self) -> &PackedBitMatrix<u64> {
        &self.readin
    }
}

impl Synapses for Network {
    fn topology(&self) -> &Topology {
        &self.topology
    }

    fn readin(&self, obs: &[f32], out: &mut [f32]) {
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0f32;
            for k in iter_ones(self.readin.row_words(j)) {
                acc += obs[k];
            }
            *o = acc;
        }
    }

    fn load_spikes(&self, s: &[u8], scratch: &mut Scratch) {
        scratch.packed.repack(s);
    }

    fn recurrent(&self, scratch: &mut Scratch) {
        signed_integrate_into(&self.rec_exc, &self.rec_inh, &scratch.packed, &mut scratch.ints)
            .expect("state sized from topology");
        for (d, &i) in scratch.drive.iter_mut().zip(&scratch.ints) {
            *d = i as f32;
        }
    }

    fn readout(&self, scratch: &mut Scratch) {
        signed_integrate_into(&self.out_exc, &self.out_inh, &scratch.packed, &mut scratch.ints_out)
            .expect("state sized from topology");
        for (o, &i) in scratch.out.iter_mut().zip(&scratch.ints_out) {
            *o = i as f32;
        }
    }
}

impl_policy!(Network);

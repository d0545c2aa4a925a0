use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

use super::{impl_policy, Scratch, Synapses, Topology};

/// Dense `f32` engine. Built either from binary connectivity (weights in
/// `{0, +1, -1}` by presynaptic type) or from arbitrary real weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNetwork {
    topology: Topology,
    w_in: DenseMatrix,
    w_rec: DenseMatrix,
    w_out: DenseMatrix,
}

impl DenseNetwork {
    pub fn from_bits(topology: &Topology, bits: &[u8]) -> Result<Self> {
        topology.validate()?;
        let (readin, rec, out) = topology.split(bits)?;
        let (d_in, d_h, d_out) = (topology.d_in, topology.d_h, topology.d_out);
        let n_exc = topology.n_exc();
        let signed = |v: &[u8], r: usize, c: usize| {
            let w = f32::from(v[r * d_h + c]);
            if c < n_exc {
                w
            } else {
                -w
            }
        };
        Ok(Self {
            topology: topology.clone(),
            w_in: DenseMatrix::from_fn(d_h, d_in, |r, c| f32::from(readin[r * d_in + c])),
            w_rec: DenseMatrix::from_fn(d_h, d_h, |r, c| signed(rec, r, c)),
            w_out: DenseMatrix::from_fn(d_out, d_h, |r, c| signed(out, r, c)),
        })
    }

    /// Real-valued weights in the connectivity layout; no sign constraint.
    pub fn from_weights(topology: &Topology, weights: &[f64]) -> Result<Self> {
        topology.validate()?;
        let (readin, rec, out) = topology.split(weights)?;
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite weight at index {i}")));
        }
        let to32 = |v: &[f64]| v.iter().map(|&w| w as f32).collect::<Vec<_>>();
        let (d_in, d_h, d_out) = (topology.d_in, topology.d_h, topology.d_out);
        Ok(Self {
            topology: topology.clone(),
            w_in: DenseMatrix::from_vec(d_h, d_in, to32(readin))?,
            w_rec: DenseMatrix::from_vec(d_h, d_h, to32(rec))?,
            w_out: DenseMatrix::from_vec(d_out, d_h, to32(out))?,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }
}

impl Synapses for DenseNetwork {
    fn topology(&self) -> &Topology {
        &self.topology
    }

    fn readin(&self, obs: &[f32], out: &mut [f32]) {
        self.w_in.matvec_into(obs, out).expect("checked by caller");
    }

    fn load_spikes(&self, s: &[u8], scratch: &mut Scratch) {
        for (f, &b) in scratch.s_f32.iter_mut().zip(s) {
            *f = f32::from(b);
        }
    }

    fn recurrent(&self, scratch: &mut Scratch) {
        self.w_rec
            .matvec_into(&scratch.s_f32, &mut scratch.drive)
            .expect("state sized from topology");
    }

    fn readout(&self, scratch: &mut Scratch) {
        self.w_out
            .matvec_into(&scratch.s_f32, &mut scratch.out)
            .expect("state sized from topology");
    }
}

impl_policy!(DenseNetwork);

//! Seeded generation of channel pairs, either degradable by construction
//! (`second = ψ ∘ first`) or drawn independently.

use rand::Rng;

use crate::channels::{random_channel_with, ClassicalChannel};
use crate::document::AnyChannel;
use crate::rng::seeded;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    Classical,
    Quantum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairSpec {
    pub kind: PairKind,
    pub d_in: usize,
    pub d_out: usize,
    pub d_out2: usize,
    pub degradable: bool,
}

impl PairSpec {
    fn max_dim(&self) -> usize {
        match self.kind {
            PairKind::Classical => 16,
            PairKind::Quantum => 4,
        }
    }
}

pub fn random_pair(spec: PairSpec, seed: u64) -> Result<(AnyChannel, AnyChannel)> {
    let dims = [spec.d_in, spec.d_out, spec.d_out2];
    if dims.iter().any(|&d| d < 2 || d > spec.max_dim()) {
        return Err(Error::InvalidArgument(format!(
            "dimensions must lie in 2..={} for {:?} pairs",
            spec.max_dim(),
            spec.kind
        )));
    }
    let mut rng = seeded(seed);
    random_pair_with(spec, &mut rng)
}

pub fn random_pair_with<R: Rng + ?Sized>(spec: PairSpec, rng: &mut R) -> Result<(AnyChannel, AnyChannel)> {
    let PairSpec { d_in, d_out, d_out2, .. } = spec;
    match spec.kind {
        PairKind::Classical => {
            let first = ClassicalChannel::random(d_in, d_out, rng);
            let second = if spec.degradable {
                ClassicalChannel::random(d_out, d_out2, rng).after(&first)?
            } else {
                ClassicalChannel::random(d_in, d_out2, rng)
            };
            Ok((AnyChannel::Classical(first), AnyChannel::Classical(second)))
        }
        PairKind::Quantum => {
            let r1 = rng.random_range(1..=d_in * d_out);
            let first = random_channel_with(d_in, d_out, r1, rng)?;
            let second = if spec.degradable {
                let r2 = rng.random_range(1..=d_out * d_out2);
                random_channel_with(d_out, d_out2, r2, rng)?.after(&first)?
            } else {
                let r2 = rng.random_range(1..=d_in * d_out2);
                random_channel_with(d_in, d_out2, r2, rng)?
            };
            Ok((AnyChannel::Quantum(first), AnyChannel::Quantum(second)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_pair() {
        let spec = PairSpec { kind: PairKind::Quantum, d_in: 2, d_out: 3, d_out2: 2, degradable: true };
        assert_eq!(random_pair(spec, 5).unwrap(), random_pair(spec, 5).unwrap());
        assert_ne!(random_pair(spec, 5).unwrap(), random_pair(spec, 6).unwrap());
    }

    #[test]
    fn rejects_oversized_dims() {
        let spec = PairSpec { kind: PairKind::Quantum, d_in: 5, d_out: 2, d_out2: 2, degradable: false };
        assert!(random_pair(spec, 0).is_err());
        let spec = PairSpec { kind: PairKind::Classical, d_in: 16, d_out: 16, d_out2: 2, degradable: false };
        assert!(random_pair(spec, 0).is_ok());
    }
}

//! Contact-sensor acquisition.

use artemis_core::data::{Feature, NoiseSigmas};
use artemis_core::{seed, VitalSigns};
use rand_distr::{Distribution, Normal};

/// Per-vital Gaussian noise, clamped to the plausible range of each vital.
pub fn sense_vitals(truth: &VitalSigns, sigmas: &NoiseSigmas, seed: u64) -> VitalSigns {
    let mut rng = seed::rng(seed);
    let mut out = truth.clone();
    for f in Feature::ALL {
        let sigma = sigmas.get(f);
        let noise = if sigma > 0.0 {
            Normal::new(0.0, sigma).expect("finite sigma").sample(&mut rng)
        } else {
            0.0
        };
        out.set(f, f.clamp(truth.get(f) + noise));
    }
    out
}

/// Source of vital-sign readings for a robot at a victim.
pub trait Sensor {
    fn read(&self, truth: &VitalSigns, seed: u64) -> VitalSigns;
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisySensor {
    pub sigmas: NoiseSigmas,
}

impl Sensor for NoisySensor {
    fn read(&self, truth: &VitalSigns, seed: u64) -> VitalSigns {
        sense_vitals(truth, &self.sigmas, seed)
    }
}

//! Stochastic vehicle arrivals: Poisson per approach with scheduled
//! injection bursts and a configurable heavy-vehicle mix.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::types::{Approach, Turn, VehicleClass};

/// Road axis an injection burst applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Ns,
    Ew,
}

impl Axis {
    pub fn covers(self, approach: Approach) -> bool {
        match self {
            Axis::Ns => matches!(approach, Approach::North | Approach::South),
            Axis::Ew => matches!(approach, Approach::East | Approach::West),
        }
    }
}

/// One scheduled demand burst on top of the base rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Injection {
    pub start_step: u64,
    pub extra_rate: f64,
    pub duration_steps: u64,
    pub axis: Axis,
}

impl Injection {
    pub fn active_at(&self, step: u64) -> bool {
        step >= self.start_step && step < self.start_step + self.duration_steps
    }
}

/// Arrival model: base rate per approach per control step plus bursts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalProcess {
    /// Expected vehicles per control step per approach.
    pub base_rate: f64,
    pub injections: Vec<Injection>,
    /// Fraction of non-car vehicles, split equally between HDV, Bus, LDV.
    pub mix_ratio: f64,
    /// Probabilities of through / left / right movements.
    pub turn_probs: [f64; 3],
}

impl Default for ArrivalProcess {
    fn default() -> Self {
        ArrivalProcess {
            base_rate: 0.08,
            injections: Vec::new(),
            mix_ratio: 0.0,
            turn_probs: [0.70, 0.15, 0.15],
        }
    }
}

/// One arrival drawn from the process, not yet placed in a lane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arrival {
    pub approach: Approach,
    pub turn: Turn,
    pub class: VehicleClass,
}

impl ArrivalProcess {
    /// Expected arrivals per step on one approach at the given step.
    pub fn rate(&self, approach: Approach, step: u64) -> f64 {
        let mut rate = self.base_rate;
        for inj in &self.injections {
            if inj.axis.covers(approach) && inj.active_at(step) {
                rate += inj.extra_rate;
            }
        }
        rate
    }

    /// Draws the arrivals for one control step across all four approaches.
    /// Counts are Poisson with the per-approach rate; turn and class are
    /// drawn per vehicle.
    pub fn draw_arrivals<R: Rng>(&self, step: u64, rng: &mut R) -> Vec<Arrival> {
        let mut out = Vec::new();
        for approach in Approach::ALL {
            let lambda = self.rate(approach, step);
            let n = sample_poisson(lambda, rng);
            for _ in 0..n {
                out.push(Arrival {
                    approach,
                    turn: self.draw_turn(rng),
                    class: self.draw_class(rng),
                });
            }
        }
        out
    }

    fn draw_turn<R: Rng>(&self, rng: &mut R) -> Turn {
        let u: f64 = rng.gen();
        if u < self.turn_probs[0] {
            Turn::Through
        } else if u < self.turn_probs[0] + self.turn_probs[1] {
            Turn::Left
        } else {
            Turn::Right
        }
    }

    fn draw_class<R: Rng>(&self, rng: &mut R) -> VehicleClass {
        let u: f64 = rng.gen();
        if u >= self.mix_ratio {
            VehicleClass::Car
        } else {
            // Equal split of the non-car share.
            match (u / self.mix_ratio * 3.0) as usize {
                0 => VehicleClass::Hdv,
                1 => VehicleClass::Bus,
                _ => VehicleClass::Ldv,
            }
        }
    }
}

/// Knuth's multiplicative Poisson sampler; exact for the small rates used here.
fn sample_poisson<R: Rng>(lambda: f64, rng: &mut R) -> u32 {
    if lambda <= 0.0 {
        return 0;
    }
    let l = (-lambda).exp();
    let mut k = 0u32;
    let mut p = 1.0f64;
    loop {
        p *= rng.gen::<f64>();
        if p <= l {
            return k;
        }
        k += 1;
    }
}

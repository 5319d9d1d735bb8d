//! Core domain types: vehicle classes, vehicles, lanes, and movements.

use serde::{Deserialize, Serialize};

/// The four vehicle classes, ordered by emission rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VehicleClass {
    Car,
    Ldv,
    Bus,
    Hdv,
}

impl VehicleClass {
    pub const ALL: [VehicleClass; 4] = [
        VehicleClass::Car,
        VehicleClass::Ldv,
        VehicleClass::Bus,
        VehicleClass::Hdv,
    ];

    pub fn index(self) -> usize {
        match self {
            VehicleClass::Car => 0,
            VehicleClass::Ldv => 1,
            VehicleClass::Bus => 2,
            VehicleClass::Hdv => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VehicleClass::Car => "car",
            VehicleClass::Ldv => "ldv",
            VehicleClass::Bus => "bus",
            VehicleClass::Hdv => "hdv",
        }
    }
}

/// Physical and emission parameters of one vehicle class.
///
/// The emission rate of a vehicle is
/// `idle_rate + speed_coeff * v + accel_coeff * v * max(a, 0)` in g CO2/s,
/// so idling dominates at stops and acceleration bursts are expensive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    /// Vehicle length in meters.
    pub length: f64,
    /// Desired cruise speed in m/s.
    pub free_speed: f64,
    /// Ordinal fuel-inefficiency category, 1..=emission_rank_max.
    pub emission_rank: u8,
    /// g CO2 per second while standing.
    pub idle_rate: f64,
    /// g CO2 per meter traveled.
    pub speed_coeff: f64,
    /// g CO2 per (m * m/s^2) of positive acceleration work.
    pub accel_coeff: f64,
}

/// Per-class parameter table indexed by [`VehicleClass::index`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassTable(pub [ClassSpec; 4]);

impl ClassTable {
    pub fn spec(&self, class: VehicleClass) -> &ClassSpec {
        &self.0[class.index()]
    }

    /// Highest emission rank in the table (the most inefficient permitted class).
    pub fn rank_max(&self) -> u8 {
        self.0.iter().map(|s| s.emission_rank).max().unwrap_or(1)
    }

    /// Largest idle rate across classes; normalizer for adaptive weights.
    pub fn max_idle_rate(&self) -> f64 {
        self.0.iter().map(|s| s.idle_rate).fold(0.0, f64::max)
    }

    pub fn max_free_speed(&self) -> f64 {
        self.0.iter().map(|s| s.free_speed).fold(0.0, f64::max)
    }

    /// Checks rank ordering and coefficient positivity.
    pub fn validate(&self) -> Result<(), String> {
        for class in VehicleClass::ALL {
            let s = self.spec(class);
            if s.idle_rate <= 0.0 || s.speed_coeff <= 0.0 || s.accel_coeff <= 0.0 {
                return Err(format!("non-positive emission coefficient for {}", class.name()));
            }
            if s.length <= 0.0 || s.free_speed <= 0.0 {
                return Err(format!("non-positive geometry for {}", class.name()));
            }
            if s.emission_rank < 1 {
                return Err(format!("emission rank below 1 for {}", class.name()));
            }
        }
        let ranks: Vec<u8> = VehicleClass::ALL
            .iter()
            .map(|c| self.spec(*c).emission_rank)
            .collect();
        if !(ranks[0] < ranks[1] && ranks[1] < ranks[2] && ranks[2] < ranks[3]) {
            return Err("emission ranks must be strictly increasing car < ldv < bus < hdv".into());
        }
        let car = self.spec(VehicleClass::Car).idle_rate;
        let hdv = self.spec(VehicleClass::Hdv).idle_rate;
        if hdv < 2.5 * car {
            return Err("hdv idle rate must be at least 2.5x the car idle rate".into());
        }
        Ok(())
    }
}

impl Default for ClassTable {
    fn default() -> Self {
        ClassTable([
            // car
            ClassSpec {
                length: 5.0,
                free_speed: 13.9,
                emission_rank: 3,
                idle_rate: 2.0,
                speed_coeff: 0.15,
                accel_coeff: 0.30,
            },
            // ldv
            ClassSpec {
                length: 6.0,
                free_speed: 13.9,
                emission_rank: 4,
                idle_rate: 2.8,
                speed_coeff: 0.20,
                accel_coeff: 0.40,
            },
            // bus
            ClassSpec {
                length: 12.0,
                free_speed: 12.5,
                emission_rank: 5,
                idle_rate: 4.5,
                speed_coeff: 0.35,
                accel_coeff: 0.70,
            },
            // hdv
            ClassSpec {
                length: 15.0,
                free_speed: 11.1,
                emission_rank: 6,
                idle_rate: 6.0,
                speed_coeff: 0.45,
                accel_coeff: 0.90,
            },
        ])
    }
}

/// Compass approach of the intersection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Approach {
    North,
    South,
    East,
    West,
}

impl Approach {
    pub const ALL: [Approach; 4] = [
        Approach::North,
        Approach::South,
        Approach::East,
        Approach::West,
    ];

    pub fn index(self) -> usize {
        match self {
            Approach::North => 0,
            Approach::South => 1,
            Approach::East => 2,
            Approach::West => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Approach::North => "north",
            Approach::South => "south",
            Approach::East => "east",
            Approach::West => "west",
        }
    }
}

/// Turning movement of a vehicle at the stop line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Turn {
    Through,
    Left,
    Right,
}

/// One vehicle in the network. Positions are front-bumper meters from lane entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub id: u64,
    pub class: VehicleClass,
    pub turn: Turn,
    pub pos: f64,
    pub speed: f64,
    /// Cumulative seconds spent below the halting threshold.
    pub wait_accum: f64,
    /// Cumulative grams of CO2 emitted.
    pub co2_accum: f64,
    /// Emission rate (g/s) over the most recent sub-step.
    pub co2_rate: f64,
    pub spawn_step: u64,
}

/// One directed lane: an ordered queue of vehicles, front of the lane first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lane {
    pub vehicles: Vec<Vehicle>,
}

impl Lane {
    pub fn len(&self) -> usize {
        self.vehicles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vehicles.is_empty()
    }

    pub fn front(&self) -> Option<&Vehicle> {
        self.vehicles.first()
    }

    pub fn rearmost(&self) -> Option<&Vehicle> {
        self.vehicles.last()
    }
}

/// Number of incoming (and outgoing) lanes: 4 approaches x 2 lanes.
pub const NUM_LANES: usize = 8;

/// Flat lane index for an (approach, lane) pair. Lane 0 carries through and
/// right movements, lane 1 carries left turns.
pub fn lane_index(approach: Approach, lane: usize) -> usize {
    approach.index() * 2 + lane
}

/// Approach and in-approach lane number for a flat index.
pub fn lane_of_index(index: usize) -> (Approach, usize) {
    (Approach::ALL[index / 2], index % 2)
}

/// Incoming lane a spawning vehicle with this turn uses.
pub fn lane_for_turn(turn: Turn) -> usize {
    match turn {
        Turn::Through | Turn::Right => 0,
        Turn::Left => 1,
    }
}

/// Destination (approach, outgoing lane) of a movement.
///
/// Through traffic exits on the opposite side; rights and lefts follow
/// right-hand driving geometry. Lefts land in outgoing lane 1, everything
/// else in lane 0.
pub fn destination(from: Approach, turn: Turn) -> (Approach, usize) {
    use Approach::*;
    let to = match (from, turn) {
        (North, Turn::Through) => South,
        (North, Turn::Right) => West,
        (North, Turn::Left) => East,
        (South, Turn::Through) => North,
        (South, Turn::Right) => East,
        (South, Turn::Left) => West,
        (East, Turn::Through) => West,
        (East, Turn::Right) => North,
        (East, Turn::Left) => South,
        (West, Turn::Through) => East,
        (West, Turn::Right) => South,
        (West, Turn::Left) => North,
    };
    let lane = if turn == Turn::Left { 1 } else { 0 };
    (to, lane)
}

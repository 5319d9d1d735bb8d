//! Signal phase state machine: three green phases with yellow and all-red
//! clearance between conflicting greens.

use serde::{Deserialize, Serialize};

use super::types::{lane_of_index, Approach};

/// A green phase. `Ns` serves north-south through plus the north-to-west /
/// south-to-east right turns, `Ew` the east-west movements (including the
/// permissive east/west left turns, which have no protected phase of their
/// own), and `Ne` the protected north-to-east / south-to-west left turns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Ns,
    Ew,
    Ne,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Ns, Phase::Ew, Phase::Ne];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        match self {
            Phase::Ns => 0,
            Phase::Ew => 1,
            Phase::Ne => 2,
        }
    }

    pub fn from_index(i: usize) -> Phase {
        Phase::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::Ns => "ns",
            Phase::Ew => "ew",
            Phase::Ne => "ne",
        }
    }

    /// Next phase in the fixed cycle order NS -> EW -> NE -> NS.
    pub fn next_in_cycle(self) -> Phase {
        match self {
            Phase::Ns => Phase::Ew,
            Phase::Ew => Phase::Ne,
            Phase::Ne => Phase::Ns,
        }
    }
}

/// Phase serving a given incoming lane (flat index). Every vehicle in a lane
/// shares the lane's phase: lane 0 is through+right, lane 1 is left-only.
pub fn phase_of_lane(lane: usize) -> Phase {
    let (approach, idx) = lane_of_index(lane);
    match (approach, idx) {
        (Approach::North | Approach::South, 0) => Phase::Ns,
        (Approach::North | Approach::South, 1) => Phase::Ne,
        (Approach::East | Approach::West, _) => Phase::Ew,
        _ => unreachable!(),
    }
}

/// Current light configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalMode {
    Green(Phase),
    Yellow { from: Phase, to: Phase },
    AllRed { to: Phase },
}

/// Outcome of a phase request at a control decision point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseChange {
    /// Same phase requested; green continues.
    Extended,
    /// Different phase requested and the minimum green has elapsed;
    /// a yellow + all-red transition begins.
    TransitionStarted,
    /// Change requested before the minimum green; held.
    HeldMinGreen,
    /// Request arrived mid-transition; ignored.
    InTransition,
}

/// Signal controller state advanced in one-second ticks.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalState {
    mode: SignalMode,
    /// Seconds spent in the current mode.
    mode_elapsed_s: u32,
    /// Seconds of green served in the current green period.
    green_elapsed_s: u32,
    yellow_s: u32,
    all_red_s: u32,
    /// Count of phase-change requests ignored because the minimum green had
    /// not elapsed.
    pub held_requests: u64,
}

impl SignalState {
    pub fn new(initial: Phase, yellow_s: u32, all_red_s: u32) -> Self {
        SignalState {
            mode: SignalMode::Green(initial),
            mode_elapsed_s: 0,
            green_elapsed_s: 0,
            yellow_s,
            all_red_s,
            held_requests: 0,
        }
    }

    pub fn mode(&self) -> SignalMode {
        self.mode
    }

    /// The active green phase, if any.
    pub fn green(&self) -> Option<Phase> {
        match self.mode {
            SignalMode::Green(p) => Some(p),
            _ => None,
        }
    }

    /// The phase that is or will next be green (transitions know their target).
    pub fn current_or_target(&self) -> Phase {
        match self.mode {
            SignalMode::Green(p) => p,
            SignalMode::Yellow { to, .. } => to,
            SignalMode::AllRed { to } => to,
        }
    }

    pub fn is_green_for(&self, phase: Phase) -> bool {
        self.mode == SignalMode::Green(phase)
    }

    pub fn green_elapsed_s(&self) -> u32 {
        self.green_elapsed_s
    }

    /// Green time served, in whole control steps of `step_s` seconds.
    pub fn green_elapsed_steps(&self, step_s: u32) -> u32 {
        self.green_elapsed_s / step_s
    }

    /// Handles a controller decision. `min_green_s` is the minimum green in
    /// seconds; requests that would cut a green short are held.
    pub fn request(&mut self, action: Phase, min_green_s: u32) -> PhaseChange {
        match self.mode {
            SignalMode::Green(current) => {
                if action == current {
                    PhaseChange::Extended
                } else if self.green_elapsed_s >= min_green_s {
                    self.mode = SignalMode::Yellow { from: current, to: action };
                    self.mode_elapsed_s = 0;
                    PhaseChange::TransitionStarted
                } else {
                    self.held_requests += 1;
                    PhaseChange::HeldMinGreen
                }
            }
            _ => PhaseChange::InTransition,
        }
    }

    /// Advances the light by one second.
    pub fn tick(&mut self) {
        self.mode_elapsed_s += 1;
        match self.mode {
            SignalMode::Green(_) => {
                self.green_elapsed_s += 1;
            }
            SignalMode::Yellow { to, .. } => {
                if self.mode_elapsed_s >= self.yellow_s {
                    self.mode = SignalMode::AllRed { to };
                    self.mode_elapsed_s = 0;
                }
            }
            SignalMode::AllRed { to } => {
                if self.mode_elapsed_s >= self.all_red_s {
                    self.mode = SignalMode::Green(to);
                    self.mode_elapsed_s = 0;
                    self.green_elapsed_s = 0;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_phase_extends() {
        let mut s = SignalState::new(Phase::Ns, 3, 2);
        for _ in 0..5 {
            s.tick();
        }
        assert_eq!(s.request(Phase::Ns, 50), PhaseChange::Extended);
        assert_eq!(s.green(), Some(Phase::Ns));
    }

    #[test]
    fn change_before_min_green_is_held() {
        let mut s = SignalState::new(Phase::Ns, 3, 2);
        for _ in 0..10 {
            s.tick();
        }
        assert_eq!(s.request(Phase::Ew, 50), PhaseChange::HeldMinGreen);
        assert_eq!(s.green(), Some(Phase::Ns));
        assert_eq!(s.held_requests, 1);
    }

    #[test]
    fn transition_passes_through_yellow_and_all_red() {
        let mut s = SignalState::new(Phase::Ns, 3, 2);
        for _ in 0..50 {
            s.tick();
        }
        assert_eq!(s.request(Phase::Ew, 50), PhaseChange::TransitionStarted);
        // 3 s yellow
        for _ in 0..3 {
            assert!(matches!(s.mode(), SignalMode::Yellow { from: Phase::Ns, to: Phase::Ew }));
            s.tick();
        }
        // 2 s all-red
        for _ in 0..2 {
            assert!(matches!(s.mode(), SignalMode::AllRed { to: Phase::Ew }));
            s.tick();
        }
        assert_eq!(s.green(), Some(Phase::Ew));
        assert_eq!(s.green_elapsed_s(), 0);
    }

    #[test]
    fn lane_phase_table() {
        use super::super::types::{lane_index, Approach};
        assert_eq!(phase_of_lane(lane_index(Approach::North, 0)), Phase::Ns);
        assert_eq!(phase_of_lane(lane_index(Approach::North, 1)), Phase::Ne);
        assert_eq!(phase_of_lane(lane_index(Approach::South, 0)), Phase::Ns);
        assert_eq!(phase_of_lane(lane_index(Approach::South, 1)), Phase::Ne);
        assert_eq!(phase_of_lane(lane_index(Approach::East, 0)), Phase::Ew);
        assert_eq!(phase_of_lane(lane_index(Approach::East, 1)), Phase::Ew);
        assert_eq!(phase_of_lane(lane_index(Approach::West, 0)), Phase::Ew);
        assert_eq!(phase_of_lane(lane_index(Approach::West, 1)), Phase::Ew);
    }
}

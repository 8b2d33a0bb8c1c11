use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// The shape primitives segments are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PatternId {
    Sine,
    Square,
    Triangle,
    Sawtooth,
    LinearRamp,
    ExponentialRise,
    ExponentialDecay,
    GaussianBump,
    Step,
    DampedOscillation,
    Chirp,
    RandomWalk,
}

/// Coarse grouping of patterns by the kind of shape they produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PatternFamily {
    Periodic,
    Monotone,
    Irregular,
}

const EXP_RATE: f64 = 4.0;
const BUMP_WIDTH: f64 = 0.08;

impl PatternId {
    pub const ALL: [PatternId; 12] = [
        PatternId::Sine,
        PatternId::Square,
        PatternId::Triangle,
        PatternId::Sawtooth,
        PatternId::LinearRamp,
        PatternId::ExponentialRise,
        PatternId::ExponentialDecay,
        PatternId::GaussianBump,
        PatternId::Step,
        PatternId::DampedOscillation,
        PatternId::Chirp,
        PatternId::RandomWalk,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn family(self) -> PatternFamily {
        use PatternId::*;
        match self {
            Sine | Square | Triangle | Sawtooth | DampedOscillation | Chirp => {
                PatternFamily::Periodic
            }
            LinearRamp | ExponentialRise | ExponentialDecay | Step => PatternFamily::Monotone,
            GaussianBump | RandomWalk => PatternFamily::Irregular,
        }
    }

    /// Whether the shape is a deterministic function of position. `RandomWalk` draws its
    /// increments from the segment's random stream instead.
    pub fn is_deterministic(self) -> bool {
        self != PatternId::RandomWalk
    }

    /// Unit-amplitude value at relative position `t ∈ [0, 1)`.
    ///
    /// `frequency` is in cycles per segment. For the transient shapes (`Step`,
    /// `GaussianBump`) the phase places the event at `0.5 + 0.3·sin(phase)`.
    /// `RandomWalk` evaluates to 0 here; see [`PatternId::is_deterministic`].
    pub fn eval(self, t: f64, frequency: f64, phase: f64) -> f64 {
        let cycles = frequency * t + phase / (2.0 * PI);
        match self {
            PatternId::Sine => (2.0 * PI * cycles).sin(),
            PatternId::Square => {
                if (2.0 * PI * cycles).sin() >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            PatternId::Triangle => {
                let u = cycles.rem_euclid(1.0);
                1.0 - 4.0 * (u - 0.5).abs()
            }
            PatternId::Sawtooth => 2.0 * cycles.rem_euclid(1.0) - 1.0,
            PatternId::LinearRamp => t,
            PatternId::ExponentialRise => (EXP_RATE * t).exp_m1() / EXP_RATE.exp_m1(),
            PatternId::ExponentialDecay => (-EXP_RATE * t).exp(),
            PatternId::GaussianBump => {
                let d = t - event_position(phase);
                (-d * d / (2.0 * BUMP_WIDTH * BUMP_WIDTH)).exp()
            }
            PatternId::Step => {
                if t >= event_position(phase) {
                    1.0
                } else {
                    0.0
                }
            }
            PatternId::DampedOscillation => (-3.0 * t).exp() * (2.0 * PI * cycles).sin(),
            PatternId::Chirp => {
                // instantaneous frequency sweeps from f to 3f across the segment
                (2.0 * PI * (frequency * (t + t * t) + phase / (2.0 * PI))).sin()
            }
            PatternId::RandomWalk => 0.0,
        }
    }
}

fn event_position(phase: f64) -> f64 {
    0.5 + 0.3 * phase.sin()
}

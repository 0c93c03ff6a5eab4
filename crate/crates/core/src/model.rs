//! Domain types shared across the pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const KMH_PER_MS: f64 = 3.6;

/// One row of vehicle telemetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelemetrySample {
    pub frame: u64,
    pub t_sec: f64,
    pub speed_kmh: f64,
    pub lat: f64,
    pub lon: f64,
    pub heading_deg: f64,
}

impl TelemetrySample {
    pub fn speed_ms(&self) -> f64 {
        self.speed_kmh / KMH_PER_MS
    }
}

/// Eye-movement event class attached to a gaze sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GazeEvent {
    Fixation,
    Saccade,
    Blink,
    InVehicle,
    Offscreen,
}

impl GazeEvent {
    pub const ALL: [GazeEvent; 5] = [
        GazeEvent::Fixation,
        GazeEvent::Saccade,
        GazeEvent::Blink,
        GazeEvent::InVehicle,
        GazeEvent::Offscreen,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GazeEvent::Fixation => "fixation",
            GazeEvent::Saccade => "saccade",
            GazeEvent::Blink => "blink",
            GazeEvent::InVehicle => "in_vehicle",
            GazeEvent::Offscreen => "offscreen",
        }
    }
}

impl fmt::Display for GazeEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GazeEvent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GazeEvent::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown gaze event `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    pub frame: u64,
    pub x: f64,
    pub y: f64,
    pub event: GazeEvent,
}

/// A fixation located in scene-image pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixation<T> {
    pub frame: u64,
    pub x: T,
    pub y: T,
    pub duration_ms: Option<T>,
}

impl<T: Scalar> Fixation<T> {
    pub fn new(frame: u64, x: T, y: T) -> Self {
        Fixation {
            frame,
            x,
            y,
            duration_ms: None,
        }
    }

    /// Inside the frame under the pixel-centre convention (pixel `i` covers `[i-0.5, i+0.5)`).
    pub fn is_in_frame(&self, width: usize, height: usize) -> bool {
        let half = T::lit(0.5);
        self.x >= -half
            && self.y >= -half
            && self.x < T::from_usize_lossy(width) - half
            && self.y < T::from_usize_lossy(height) - half
    }

    /// Nearest pixel, if the fixation is in frame.
    pub fn pixel(&self, width: usize, height: usize) -> Option<(usize, usize)> {
        if !self.is_in_frame(width, height) {
            return None;
        }
        let half = T::lit(0.5);
        let x = (self.x + half).floor().to_usize()?.min(width - 1);
        let y = (self.y + half).floor().to_usize()?.min(height - 1);
        Some((x, y))
    }
}

/// Longitudinal action derived from the speed signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Longitudinal {
    SpeedUp,
    SlowDown,
    Maintain,
    Stopped,
}

/// Manually labeled lateral action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LateralAction {
    Turn,
    LaneChange,
    UTurn,
    Reverse,
}

/// Six-way driving task taxonomy plus an exclusion marker for U-turns and reversing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActionLabel {
    SpeedUp,
    SlowDown,
    Lateral,
    LatLon,
    Maintain,
    Stopped,
    Excluded,
}

impl ActionLabel {
    /// The six reportable categories, in benchmark column order.
    pub const REPORTED: [ActionLabel; 6] = [
        ActionLabel::Maintain,
        ActionLabel::SpeedUp,
        ActionLabel::SlowDown,
        ActionLabel::Lateral,
        ActionLabel::LatLon,
        ActionLabel::Stopped,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActionLabel::SpeedUp => "SpeedUp",
            ActionLabel::SlowDown => "SlowDown",
            ActionLabel::Lateral => "Lateral",
            ActionLabel::LatLon => "LatLon",
            ActionLabel::Maintain => "Maintain",
            ActionLabel::Stopped => "Stopped",
            ActionLabel::Excluded => "Excluded",
        }
    }

    /// Short column name used in benchmark tables.
    pub fn short_name(self) -> &'static str {
        match self {
            ActionLabel::Maintain => "None",
            ActionLabel::SpeedUp => "Acc",
            ActionLabel::SlowDown => "Dec",
            ActionLabel::Lateral => "Lat",
            ActionLabel::LatLon => "Lat/lon",
            ActionLabel::Stopped => "Stop",
            ActionLabel::Excluded => "Excluded",
        }
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<Longitudinal> for ActionLabel {
    fn from(l: Longitudinal) -> Self {
        match l {
            Longitudinal::SpeedUp => ActionLabel::SpeedUp,
            Longitudinal::SlowDown => ActionLabel::SlowDown,
            Longitudinal::Maintain => ActionLabel::Maintain,
            Longitudinal::Stopped => ActionLabel::Stopped,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntersectionType {
    Signalized,
    Unsignalized,
    Roundabout,
    HighwayRamp,
}

impl IntersectionType {
    pub const ALL: [IntersectionType; 4] = [
        IntersectionType::Unsignalized,
        IntersectionType::Signalized,
        IntersectionType::Roundabout,
        IntersectionType::HighwayRamp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IntersectionType::Signalized => "signalized",
            IntersectionType::Unsignalized => "unsignalized",
            IntersectionType::Roundabout => "roundabout",
            IntersectionType::HighwayRamp => "highway_ramp",
        }
    }
}

impl fmt::Display for IntersectionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ego-vehicle priority when crossing an intersection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Priority {
    RightOfWay,
    Yield,
}

impl Priority {
    pub const ALL: [Priority; 2] = [Priority::RightOfWay, Priority::Yield];

    pub fn as_str(self) -> &'static str {
        match self {
            Priority::RightOfWay => "right_of_way",
            Priority::Yield => "yield",
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Priority::RightOfWay => "RoW",
            Priority::Yield => "Yield",
        }
    }
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An intersection crossing. `priority` stays empty until a human assigns it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextEvent {
    pub crossing_frame: u64,
    pub intersection_type: IntersectionType,
    #[serde(default)]
    pub priority: Option<Priority>,
    #[serde(default)]
    pub yield_onset_frame: Option<u64>,
}

impl ContextEvent {
    pub fn validate(&self, num_frames: u64) -> Result<()> {
        if self.crossing_frame >= num_frames {
            return Err(Error::RangeMismatch(format!(
                "crossing_frame {} outside video of {num_frames} frames",
                self.crossing_frame
            )));
        }
        if let Some(onset) = self.yield_onset_frame {
            if onset > self.crossing_frame {
                return Err(Error::InvalidParameter(format!(
                    "yield_onset_frame {onset} is after crossing_frame {}",
                    self.crossing_frame
                )));
            }
        }
        Ok(())
    }
}

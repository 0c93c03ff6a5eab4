use crate::error::Result;
use crate::model::{ContextEvent, IntersectionType, Priority};

/// Frames evaluated for one intersection crossing; bounds are inclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioWindow {
    pub video_id: String,
    pub start_frame: u64,
    pub end_frame: u64,
    pub priority: Priority,
    pub intersection_type: IntersectionType,
    /// The one-second lead-in ran past the start of the video.
    pub clipped: bool,
}

impl ScenarioWindow {
    pub fn contains(&self, frame: u64) -> bool {
        (self.start_frame..=self.end_frame).contains(&frame)
    }
}

/// Right-of-way windows cover the second before the crossing. Yield windows start at
/// the yield onset when one is annotated, else follow the same rule. Events without
/// an assigned priority produce no window.
pub fn build_scenario_windows(
    video_id: &str,
    events: &[ContextEvent],
    fps: f64,
    num_frames: u64,
) -> Result<Vec<ScenarioWindow>> {
    let lead = fps.round() as u64;
    let mut out = Vec::new();
    for e in events {
        e.validate(num_frames)?;
        let Some(priority) = e.priority else {
            continue;
        };
        let (start, clipped) = match (priority, e.yield_onset_frame) {
            (Priority::Yield, Some(onset)) => (onset, false),
            _ => match e.crossing_frame.checked_sub(lead) {
                Some(s) => (s, false),
                None => (0, true),
            },
        };
        out.push(ScenarioWindow {
            video_id: video_id.to_string(),
            start_frame: start,
            end_frame: e.crossing_frame,
            priority,
            intersection_type: e.intersection_type,
            clipped,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(crossing: u64, priority: Option<Priority>, onset: Option<u64>) -> ContextEvent {
        ContextEvent {
            crossing_frame: crossing,
            intersection_type: IntersectionType::Unsignalized,
            priority,
            yield_onset_frame: onset,
        }
    }

    #[test]
    fn one_second_rule() {
        let w = build_scenario_windows("v", &[ev(100, Some(Priority::RightOfWay), None)], 25.0, 200).unwrap();
        assert_eq!((w[0].start_frame, w[0].end_frame, w[0].clipped), (75, 100, false));
        let w = build_scenario_windows("v", &[ev(100, Some(Priority::Yield), None)], 29.97, 200).unwrap();
        assert_eq!(w[0].start_frame, 70);
    }

    #[test]
    fn yield_onset() {
        let w = build_scenario_windows("v", &[ev(100, Some(Priority::Yield), Some(60))], 25.0, 200).unwrap();
        assert_eq!((w[0].start_frame, w[0].end_frame), (60, 100));
    }

    #[test]
    fn clipped_at_start() {
        let w = build_scenario_windows("v", &[ev(10, Some(Priority::RightOfWay), None)], 25.0, 200).unwrap();
        assert_eq!((w[0].start_frame, w[0].end_frame, w[0].clipped), (0, 10, true));
        assert!(w[0].contains(0) && w[0].contains(10) && !w[0].contains(11));
    }

    #[test]
    fn unassigned_and_invalid() {
        assert!(build_scenario_windows("v", &[ev(10, None, None)], 25.0, 200).unwrap().is_empty());
        assert!(build_scenario_windows("v", &[ev(300, Some(Priority::Yield), None)], 25.0, 200).is_err());
    }
}

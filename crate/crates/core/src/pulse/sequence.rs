use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Segment duration: fixed, or an affine function `scale * tau + offset` of the swept value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Duration {
    Fixed(f64),
    Swept {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        offset: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Duration {
    pub fn swept(scale: f64) -> Self {
        Duration::Swept { scale, offset: 0.0 }
    }

    pub fn at(&self, tau: f64) -> f64 {
        match *self {
            Duration::Fixed(d) => d,
            Duration::Swept { scale, offset } => scale * tau + offset,
        }
    }

    pub fn is_swept(&self) -> bool {
        matches!(self, Duration::Swept { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentKind {
    LaserInit,
    LaserRead,
    RfPulse {
        /// Omega, MHz.
        amplitude: f64,
        /// Carrier frequency, MHz.
        frequency: f64,
        phase: f64,
    },
    Wait,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SegmentRecord", into = "SegmentRecord")]
pub struct PulseSegment {
    pub kind: SegmentKind,
    /// Microseconds.
    pub duration: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum KindTag {
    LaserInit,
    LaserRead,
    RfPulse,
    Wait,
}

/// Wire form of a segment: RF fields must be present exactly when `kind` is `rf_pulse`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentRecord {
    kind: KindTag,
    duration: Duration,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frequency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phase: Option<f64>,
}

impl TryFrom<SegmentRecord> for PulseSegment {
    type Error = String;

    fn try_from(r: SegmentRecord) -> std::result::Result<Self, String> {
        let rf_fields = r.amplitude.is_some() || r.frequency.is_some() || r.phase.is_some();
        let kind = match r.kind {
            KindTag::RfPulse => SegmentKind::RfPulse {
                amplitude: r.amplitude.ok_or("rf_pulse requires `amplitude`")?,
                frequency: r.frequency.ok_or("rf_pulse requires `frequency`")?,
                phase: r.phase.unwrap_or(0.0),
            },
            _ if rf_fields => {
                return Err("amplitude/frequency/phase are only allowed on rf_pulse".into())
            }
            KindTag::LaserInit => SegmentKind::LaserInit,
            KindTag::LaserRead => SegmentKind::LaserRead,
            KindTag::Wait => SegmentKind::Wait,
        };
        Ok(PulseSegment {
            kind,
            duration: r.duration,
        })
    }
}

impl From<PulseSegment> for SegmentRecord {
    fn from(s: PulseSegment) -> Self {
        let (kind, amplitude, frequency, phase) = match s.kind {
            SegmentKind::LaserInit => (KindTag::LaserInit, None, None, None),
            SegmentKind::LaserRead => (KindTag::LaserRead, None, None, None),
            SegmentKind::Wait => (KindTag::Wait, None, None, None),
            SegmentKind::RfPulse {
                amplitude,
                frequency,
                phase,
            } => (KindTag::RfPulse, Some(amplitude), Some(frequency), Some(phase)),
        };
        SegmentRecord {
            kind,
            duration: s.duration,
            amplitude,
            frequency,
            phase,
        }
    }
}

impl PulseSegment {
    pub fn laser_init(us: f64) -> Self {
        Self {
            kind: SegmentKind::LaserInit,
            duration: Duration::Fixed(us),
        }
    }

    pub fn laser_read(us: f64) -> Self {
        Self {
            kind: SegmentKind::LaserRead,
            duration: Duration::Fixed(us),
        }
    }

    pub fn rf(amplitude: f64, frequency: f64, phase: f64, duration: Duration) -> Self {
        Self {
            kind: SegmentKind::RfPulse {
                amplitude,
                frequency,
                phase,
            },
            duration,
        }
    }

    pub fn wait(duration: Duration) -> Self {
        Self {
            kind: SegmentKind::Wait,
            duration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PulseSequence {
    pub segments: Vec<PulseSegment>,
}

impl PulseSequence {
    pub fn new(segments: Vec<PulseSegment>) -> Result<Self> {
        let seq = Self { segments };
        seq.validate()?;
        Ok(seq)
    }

    /// Structural checks: starts with `laser_init`, ends with the only `laser_read`, sane RF
    /// parameters and non-negative fixed durations.
    pub fn validate(&self) -> Result<()> {
        let segs = &self.segments;
        match segs.first() {
            Some(s) if s.kind == SegmentKind::LaserInit => {}
            _ => return Err(Error::MalformedSequence("must begin with laser_init".into())),
        }
        match segs.last() {
            Some(s) if s.kind == SegmentKind::LaserRead => {}
            _ => return Err(Error::MalformedSequence("must end with laser_read".into())),
        }
        let reads = segs
            .iter()
            .filter(|s| s.kind == SegmentKind::LaserRead)
            .count();
        if reads != 1 {
            return Err(Error::MalformedSequence(
                "laser_read may only appear as the final segment".into(),
            ));
        }
        for (i, s) in segs.iter().enumerate() {
            if let SegmentKind::RfPulse {
                amplitude,
                frequency,
                phase,
            } = s.kind
            {
                if !(amplitude.is_finite() && amplitude >= 0.0)
                    || !(frequency.is_finite() && frequency > 0.0)
                    || !phase.is_finite()
                {
                    return Err(Error::MalformedSequence(format!(
                        "segment {i}: rf_pulse needs amplitude >= 0, frequency > 0, finite phase"
                    )));
                }
            }
            match s.duration {
                Duration::Fixed(d) if !(d.is_finite() && d >= 0.0) => {
                    return Err(Error::MalformedSequence(format!(
                        "segment {i}: duration must be >= 0"
                    )))
                }
                Duration::Swept { scale, offset } if !(scale.is_finite() && offset.is_finite()) => {
                    return Err(Error::MalformedSequence(format!(
                        "segment {i}: sweep coefficients must be finite"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn has_sweep(&self) -> bool {
        self.segments.iter().any(|s| s.duration.is_swept())
    }

    /// Durations resolved at sweep value `tau`.
    pub fn durations_at(&self, tau: f64) -> Result<Vec<f64>> {
        self.segments
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let d = s.duration.at(tau);
                if d.is_finite() && d >= 0.0 {
                    Ok(d)
                } else {
                    Err(Error::MalformedSequence(format!(
                        "segment {i}: duration {d} at sweep value {tau}"
                    )))
                }
            })
            .collect()
    }

    /// Total free-evolution time between the first and last RF pulse, and the normalized
    /// positions of the intermediate (refocusing) pulses within it.
    pub fn free_evolution(&self, durations: &[f64]) -> (f64, Vec<f64>) {
        let rf: Vec<usize> = self
            .segments
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s.kind, SegmentKind::RfPulse { .. }))
            .map(|(i, _)| i)
            .collect();
        let (Some(&first), Some(&last)) = (rf.first(), rf.last()) else {
            return (0.0, Vec::new());
        };
        let mut elapsed = 0.0;
        let mut marks = Vec::new();
        for i in first + 1..last {
            match self.segments[i].kind {
                SegmentKind::Wait => elapsed += durations[i],
                SegmentKind::RfPulse { .. } => marks.push(elapsed),
                _ => {}
            }
        }
        let total = elapsed;
        let positions = if total > 0.0 {
            marks.into_iter().map(|m| m / total).collect()
        } else {
            Vec::new()
        };
        (total, positions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structural_errors() {
        let no_init = PulseSequence::new(vec![PulseSegment::wait(Duration::Fixed(1.0)), PulseSegment::laser_read(2.0)]);
        assert!(matches!(no_init, Err(Error::MalformedSequence(_))));
        let no_read = PulseSequence::new(vec![PulseSegment::laser_init(2.0), PulseSegment::wait(Duration::Fixed(1.0))]);
        assert!(matches!(no_read, Err(Error::MalformedSequence(_))));
        let negative = PulseSequence::new(vec![
            PulseSegment::laser_init(2.0),
            PulseSegment::wait(Duration::Fixed(-1.0)),
            PulseSegment::laser_read(2.0),
        ]);
        assert!(negative.is_err());
    }

    #[test]
    fn json_segment_records() {
        let json = r#"[
            {"kind": "laser_init", "duration": 2.0},
            {"kind": "rf_pulse", "amplitude": 1.0, "frequency": 164.0, "duration": 0.29},
            {"kind": "wait", "duration": {"scale": 1.0}},
            {"kind": "rf_pulse", "amplitude": 1.0, "frequency": 164.0, "phase": 1.5707963, "duration": 0.29},
            {"kind": "laser_read", "duration": 2.0}
        ]"#;
        let seq: PulseSequence = serde_json::from_str(json).unwrap();
        seq.validate().unwrap();
        assert!(seq.has_sweep());
        let d = seq.durations_at(3.0).unwrap();
        assert_eq!(d[2], 3.0);
        let (free, marks) = seq.free_evolution(&d);
        assert_eq!(free, 3.0);
        assert!(marks.is_empty());
    }

    #[test]
    fn rf_fields_only_on_rf_pulses() {
        let bad = r#"{"kind": "wait", "duration": 1.0, "amplitude": 2.0}"#;
        assert!(serde_json::from_str::<PulseSegment>(bad).is_err());
        let missing = r#"{"kind": "rf_pulse", "duration": 1.0, "amplitude": 2.0}"#;
        assert!(serde_json::from_str::<PulseSegment>(missing).is_err());
        let unknown = r#"{"kind": "wait", "duration": 1.0, "colour": 2.0}"#;
        assert!(serde_json::from_str::<PulseSegment>(unknown).is_err());
    }

    #[test]
    fn refocusing_positions_are_normalized() {
        let rf = |phase| PulseSegment::rf(1.0, 100.0, phase, Duration::Fixed(0.1));
        let seq = PulseSequence::new(vec![
            PulseSegment::laser_init(2.0),
            rf(0.0),
            PulseSegment::wait(Duration::swept(1.0)),
            rf(0.0),
            PulseSegment::wait(Duration::swept(1.0)),
            rf(0.0),
            PulseSegment::laser_read(2.0),
        ])
        .unwrap();
        let (free, marks) = seq.free_evolution(&seq.durations_at(5.0).unwrap());
        assert_eq!(free, 10.0);
        assert_eq!(marks, vec![0.5]);
    }
}

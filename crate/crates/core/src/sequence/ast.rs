use std::fmt;

use crate::pulse::Spin;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    I,
    S,
    Both,
}

impl Target {
    pub fn spins(self) -> &'static [Spin] {
        match self {
            Target::I => &[Spin::I],
            Target::S => &[Spin::S],
            Target::Both => &[Spin::I, Spin::S],
        }
    }

    pub fn single(self) -> Option<Spin> {
        match self {
            Target::I => Some(Spin::I),
            Target::S => Some(Spin::S),
            Target::Both => None,
        }
    }
}

impl From<Spin> for Target {
    fn from(s: Spin) -> Self {
        match s {
            Spin::I => Target::I,
            Spin::S => Target::S,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::I => "I",
            Target::S => "S",
            Target::Both => "both",
        })
    }
}

/// Rotation axis of a pulse: a labelled axis or a transverse phase in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    X,
    Y,
    Z,
    MinusX,
    MinusY,
    MinusZ,
    Phase(f64),
}

impl Axis {
    /// Transverse phase in degrees; `None` for z axes.
    pub fn phase_degrees(self) -> Option<f64> {
        match self {
            Axis::X => Some(0.0),
            Axis::Y => Some(90.0),
            Axis::MinusX => Some(180.0),
            Axis::MinusY => Some(270.0),
            Axis::Phase(p) => Some(p),
            Axis::Z | Axis::MinusZ => None,
        }
    }

    pub fn from_label(label: &str) -> Option<Axis> {
        Some(match label {
            "x" => Axis::X,
            "y" => Axis::Y,
            "z" => Axis::Z,
            "-x" => Axis::MinusX,
            "-y" => Axis::MinusY,
            "-z" => Axis::MinusZ,
            _ => return None,
        })
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => f.write_str("x"),
            Axis::Y => f.write_str("y"),
            Axis::Z => f.write_str("z"),
            Axis::MinusX => f.write_str("-x"),
            Axis::MinusY => f.write_str("-y"),
            Axis::MinusZ => f.write_str("-z"),
            Axis::Phase(p) => write!(f, "{p}"),
        }
    }
}

/// Inline selective-pulse parameters; omitted fields come from the compile defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftPulseParams {
    pub target: Spin,
    pub flip: f64,
    pub axis: Axis,
    pub duration: f64,
    pub offset: Option<f64>,
    pub truncation: Option<f64>,
    pub slices: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Delay {
    Seconds(f64),
    /// Multiple of 1/J.
    PerJ(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    Pulse { target: Target, flip: f64, axis: Axis },
    Soft(SoftPulseParams),
    Delay(Delay),
    Couple { fraction: f64 },
    ZRot { target: Target, theta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub name: String,
    pub events: Vec<Event>,
}

impl Sequence {
    pub fn new(name: impl Into<String>, events: Vec<Event>) -> Self {
        Self {
            name: name.into(),
            events,
        }
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Self::new(name, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// `self` followed in time by `other`.
    pub fn then(&self, other: &Sequence) -> Sequence {
        let mut events = self.events.clone();
        events.extend_from_slice(&other.events);
        Sequence::new(format!("{}+{}", self.name, other.name), events)
    }

    /// Replaces each single-spin z-rotation by the composite 90_y, θ_x, 90_{−y}.
    pub fn expand_composite_z(&self) -> Sequence {
        let mut events = Vec::with_capacity(self.events.len());
        for ev in &self.events {
            let (target, theta) = match *ev {
                Event::ZRot { target, theta } => (target, theta),
                Event::Pulse {
                    target,
                    flip,
                    axis: Axis::Z,
                } => (target, flip),
                Event::Pulse {
                    target,
                    flip,
                    axis: Axis::MinusZ,
                } => (target, -flip),
                other => {
                    events.push(other);
                    continue;
                }
            };
            let (flip, axis) = if theta < 0.0 {
                (-theta, Axis::MinusX)
            } else {
                (theta, Axis::X)
            };
            events.push(Event::Pulse {
                target,
                flip: 90.0,
                axis: Axis::Y,
            });
            events.push(Event::Pulse { target, flip, axis });
            events.push(Event::Pulse {
                target,
                flip: 90.0,
                axis: Axis::MinusY,
            });
        }
        Sequence::new(self.name.clone(), events)
    }

    /// Dash-separated notation, e.g. `90 S_y - couple - 90 I_z`.
    pub fn dash_notation(&self) -> String {
        fn sub(target: Target, axis: &str) -> String {
            match target {
                Target::Both => format!("_{axis}"),
                t => format!(" {t}_{axis}"),
            }
        }
        let parts: Vec<String> = self
            .events
            .iter()
            .map(|ev| match *ev {
                Event::Pulse { target, flip, axis } => format!("{flip}{}", sub(target, &axis.to_string())),
                Event::Soft(p) => format!("{}{} (soft)", p.flip, sub(p.target.into(), &p.axis.to_string())),
                Event::Delay(Delay::PerJ(f)) => format!("{f}/J"),
                Event::Delay(Delay::Seconds(s)) => format!("{s} s"),
                Event::Couple { fraction } if fraction == 0.5 => "couple".to_string(),
                Event::Couple { fraction } => format!("couple({fraction})"),
                Event::ZRot { target, theta } if theta < 0.0 => format!("{}{}", -theta, sub(target, "-z")),
                Event::ZRot { target, theta } => format!("{theta}{}", sub(target, "z")),
            })
            .collect();
        parts.join(" - ")
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Pulse { target, flip, axis } => write!(f, "pulse {target} {flip} {axis}"),
            Event::Soft(p) => {
                write!(f, "soft {} {} {} dur {}", p.target, p.flip, p.axis, p.duration)?;
                if let Some(o) = p.offset {
                    write!(f, " offset {o}")?;
                }
                if let Some(t) = p.truncation {
                    write!(f, " trunc {t}")?;
                }
                if let Some(n) = p.slices {
                    write!(f, " slices {n}")?;
                }
                Ok(())
            }
            Event::Delay(Delay::Seconds(s)) => write!(f, "delay {s} s"),
            Event::Delay(Delay::PerJ(x)) => write!(f, "delay {x} /J"),
            Event::Couple { fraction } => write!(f, "couple {fraction}"),
            Event::ZRot { target, theta } => write!(f, "zrot {target} {theta}"),
        }
    }
}

/// Canonical `.pseq` text.
impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# name: {}", self.name)?;
        for ev in &self.events {
            writeln!(f, "{ev}")?;
        }
        Ok(())
    }
}

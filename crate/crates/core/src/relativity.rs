//! 1+1D Minkowski kinematics in units with `c = 1`.
//!
//! The interval is `ds² = Δx² − Δt²`, so spacelike separations are the
//! positive branch. Boosts move along `x`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tol::EQUALITY;

/// A labelled point `(t, x)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpacetimeEvent {
    label: String,
    t: f64,
    x: f64,
}

impl SpacetimeEvent {
    pub fn new(label: impl Into<String>, t: f64, x: f64) -> Result<Self> {
        if !t.is_finite() || !x.is_finite() {
            return Err(Error::validation(format!(
                "non-finite event coordinates ({t}, {x})"
            )));
        }
        Ok(Self {
            label: label.into(),
            t,
            x,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn x(&self) -> f64 {
        self.x
    }
}

impl fmt::Display for SpacetimeEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(t={}, x={})", self.label, self.t, self.x)
    }
}

/// Lorentz boost with velocity `beta` along `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Boost {
    beta: f64,
    gamma: f64,
}

impl Boost {
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta.abs() >= 1.0 {
            return Err(Error::validation(format!(
                "boost velocity {beta} is not below c"
            )));
        }
        Ok(Self {
            beta,
            gamma: 1.0 / (1.0 - beta * beta).sqrt(),
        })
    }

    pub fn identity() -> Self {
        Self {
            beta: 0.0,
            gamma: 1.0,
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn inverse(&self) -> Self {
        Self {
            beta: -self.beta,
            gamma: self.gamma,
        }
    }

    /// Boost by `self`, then by `other`: relativistic velocity addition.
    pub fn then(&self, other: &Boost) -> Self {
        let beta = (self.beta + other.beta) / (1.0 + self.beta * other.beta);
        Self::new(beta).expect("velocity addition stays below c")
    }

    pub fn apply(&self, e: &SpacetimeEvent) -> SpacetimeEvent {
        boost_event(e, self)
    }
}

/// Causal character of a separation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    Timelike,
    Spacelike,
    Lightlike,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntervalClass {
    pub kind: IntervalKind,
    /// `Δx² − Δt²`.
    pub ds2: f64,
}

pub fn classify_interval(e1: &SpacetimeEvent, e2: &SpacetimeEvent) -> IntervalClass {
    let dt = e2.t - e1.t;
    let dx = e2.x - e1.x;
    let ds2 = dx * dx - dt * dt;
    let tol = EQUALITY * 1f64.max(dx * dx).max(dt * dt);
    let kind = if ds2 > tol {
        IntervalKind::Spacelike
    } else if ds2 < -tol {
        IntervalKind::Timelike
    } else {
        IntervalKind::Lightlike
    };
    IntervalClass { kind, ds2 }
}

/// `t' = γ(t − βx)`, `x' = γ(x − βt)`; the label is kept.
pub fn boost_event(e: &SpacetimeEvent, boost: &Boost) -> SpacetimeEvent {
    let (b, g) = (boost.beta, boost.gamma);
    SpacetimeEvent {
        label: e.label.clone(),
        t: g * (e.t - b * e.x),
        x: g * (e.x - b * e.t),
    }
}

/// A frame that swaps the time order of two spacelike events.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrderReversal {
    /// Simultaneity velocity `β* = Δt/Δx`; order flips once `β` passes it
    /// heading toward `sign(Δx)`.
    pub threshold: f64,
    /// Witness boost halfway between `β*` and light speed.
    pub boost: Boost,
}

fn ordered<'a>(
    e1: &'a SpacetimeEvent,
    e2: &'a SpacetimeEvent,
) -> Result<(&'a SpacetimeEvent, &'a SpacetimeEvent)> {
    if e1.t == e2.t && e1.x == e2.x {
        return Err(Error::degenerate(format!(
            "events {} and {} coincide",
            e1.label, e2.label
        )));
    }
    Ok(if e1.t <= e2.t { (e1, e2) } else { (e2, e1) })
}

/// For spacelike-separated events, a boost in which the later event (in the
/// current frame) happens first. `None` for timelike or lightlike pairs,
/// whose order no boost can change.
pub fn order_reversing_boost(
    e1: &SpacetimeEvent,
    e2: &SpacetimeEvent,
) -> Result<Option<OrderReversal>> {
    let (early, late) = ordered(e1, e2)?;
    if classify_interval(early, late).kind != IntervalKind::Spacelike {
        return Ok(None);
    }
    let dt = late.t - early.t;
    let dx = late.x - early.x;
    let threshold = dt / dx;
    let boost = Boost::new(0.5 * (threshold + dx.signum()))?;
    Ok(Some(OrderReversal { threshold, boost }))
}

/// For spacelike-separated events, the boost `β = Δt/Δx` that makes them
/// simultaneous.
pub fn simultaneity_boost(e1: &SpacetimeEvent, e2: &SpacetimeEvent) -> Result<Option<Boost>> {
    let (early, late) = ordered(e1, e2)?;
    if classify_interval(early, late).kind != IntervalKind::Spacelike {
        return Ok(None);
    }
    Ok(Some(Boost::new((late.t - early.t) / (late.x - early.x))?))
}

/// Speed of the classical signal in units of `c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SignalSpeed {
    Finite(f64),
    Infinite,
}

impl SignalSpeed {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SignalSpeed::Finite(v) if !(v.is_finite() && v > 0.0) => Err(Error::validation(
                format!("signal speed {v} must be positive (use `infinite` for instantaneous)"),
            )),
            _ => Ok(()),
        }
    }

    /// Time to cover `distance`.
    pub fn travel_time(&self, distance: f64) -> f64 {
        match *self {
            SignalSpeed::Finite(v) => distance / v,
            SignalSpeed::Infinite => 0.0,
        }
    }

    pub fn is_superluminal(&self) -> bool {
        match *self {
            SignalSpeed::Finite(v) => v > 1.0,
            SignalSpeed::Infinite => true,
        }
    }
}

impl fmt::Display for SignalSpeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalSpeed::Finite(v) => write!(f, "{v}"),
            SignalSpeed::Infinite => f.write_str("infinite"),
        }
    }
}

impl FromStr for SignalSpeed {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinite" | "infinity" | "∞" => Ok(SignalSpeed::Infinite),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| Error::validation(format!("bad signal speed `{s}`")))?;
                let speed = if v.is_infinite() && v > 0.0 {
                    SignalSpeed::Infinite
                } else {
                    SignalSpeed::Finite(v)
                };
                speed.validate()?;
                Ok(speed)
            }
        }
    }
}

impl Serialize for SignalSpeed {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SignalSpeed::Finite(v) => s.serialize_f64(*v),
            SignalSpeed::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for SignalSpeed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => {
                let s = SignalSpeed::Finite(v);
                s.validate().map_err(serde::de::Error::custom)?;
                Ok(s)
            }
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Arrival of a signal sent from `origin` toward `+x` over `distance`.
pub fn signal_event(
    origin: &SpacetimeEvent,
    distance: f64,
    speed: SignalSpeed,
    label: impl Into<String>,
) -> Result<SpacetimeEvent> {
    if !(distance.is_finite() && distance > 0.0) {
        return Err(Error::validation(format!(
            "distance {distance} must be positive"
        )));
    }
    speed.validate()?;
    SpacetimeEvent::new(
        label,
        origin.t + speed.travel_time(distance),
        origin.x + distance,
    )
}

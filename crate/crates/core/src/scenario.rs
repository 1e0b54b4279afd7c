//! End-to-end run: teleport with a classical message of configurable speed,
//! look for a frame in which Bob's correction precedes Alice's measurement,
//! and certify both qubits with probability-one tests.
//!
//! Quantum evolution always runs in the causally ordered (unprimed) frame.
//! Boosted frames only relabel event coordinates.

use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{canonical_state, haar_random_state, tensor, CanonicalState, StateVector};
use crate::relativity::{
    boost_event, classify_interval, order_reversing_boost, signal_event, Boost, IntervalClass,
    IntervalKind, OrderReversal, SignalSpeed, SpacetimeEvent,
};
use crate::teleport::{
    derive_corrections, random_maximally_entangled, run_teleportation, verification_measurement,
    TeleportTranscript, BOB, INPUT,
};
use crate::tol::FIDELITY;
use crate::{seeded_rng, SimRng};

/// Caveat attached to every report.
pub const FRAME_NOTE: &str = "internal qubit states are treated as frame-invariant; \
boosts relabel event coordinates only and no spin-state transformation between frames is modelled";

/// Which state Alice teleports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSpec {
    Named(CanonicalState),
    HaarRandom,
}

/// Which pair Alice and Bob share.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceSpec {
    Singlet,
    PhiPlus,
    RandomMaximallyEntangled,
}

impl InputSpec {
    /// The input state on label `q0`; only Haar-random inputs use the rng.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<StateVector> {
        match self {
            Self::Named(k) => Ok(canonical_state(*k)),
            Self::HaarRandom => haar_random_state(1, rng),
        }
    }
}

impl FromStr for InputSpec {
    type Err = Error;

    /// `haar` / `haar_random` or any named state.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "haar" | "haar_random" | "random" => Ok(Self::HaarRandom),
            _ => s.parse().map(Self::Named),
        }
    }
}

impl ResourceSpec {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> StateVector {
        match self {
            Self::Singlet => canonical_state(CanonicalState::Singlet),
            Self::PhiPlus => canonical_state(CanonicalState::PhiPlus),
            Self::RandomMaximallyEntangled => random_maximally_entangled(rng),
        }
    }
}

impl FromStr for ResourceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "singlet" | "psi_minus" => Ok(Self::Singlet),
            "phi_plus" => Ok(Self::PhiPlus),
            "random" | "random_maximally_entangled" => Ok(Self::RandomMaximallyEntangled),
            _ => Err(Error::validation(format!("unknown resource `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Message speed in units of `c`, or `"infinite"`.
    pub signal_speed: SignalSpeed,
    /// Alice–Bob distance.
    pub separation: f64,
    pub input_spec: InputSpec,
    pub resource_spec: ResourceSpec,
    pub seed: u64,
    /// Frame used for the primed coordinates in the report. Defaults to the
    /// order-reversing witness when one exists, else the lab frame.
    #[serde(default)]
    pub frame_beta: Option<f64>,
}

impl ScenarioConfig {
    pub fn new(signal_speed: SignalSpeed, separation: f64, seed: u64) -> Self {
        Self {
            signal_speed,
            separation,
            input_spec: InputSpec::HaarRandom,
            resource_spec: ResourceSpec::Singlet,
            seed,
            frame_beta: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.signal_speed.validate()?;
        if !(self.separation.is_finite() && self.separation > 0.0) {
            return Err(Error::validation(format!(
                "separation {} must be positive",
                self.separation
            )));
        }
        if let InputSpec::Named(k) = self.input_spec {
            if k.num_qubits() != 1 {
                return Err(Error::validation(format!(
                    "input `{k}` is not a single-qubit state"
                )));
            }
        }
        if let Some(b) = self.frame_beta {
            Boost::new(b)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Spacelike message and both copies pass their tests: in the reversing
    /// frame a two-qubit clone exists between events II and I.
    CloneCertified,
    ConsistentSubluminal,
    LightlikeBoundary,
}

/// Primed-frame times `(t'(II), t'(I))` during which both `C` and `B` hold
/// the input state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CloneWindow {
    pub start: f64,
    pub end: f64,
}

impl CloneWindow {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Events as seen from one frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameView {
    pub boost: Boost,
    pub event_i: SpacetimeEvent,
    pub event_ii: SpacetimeEvent,
    pub clone_window: Option<CloneWindow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub config: ScenarioConfig,
    pub event_i: SpacetimeEvent,
    pub event_ii: SpacetimeEvent,
    pub interval: IntervalClass,
    pub reversing_boost: Option<OrderReversal>,
    /// Window in the witness frame of `reversing_boost`.
    pub clone_window: Option<CloneWindow>,
    pub report_frame: FrameView,
    pub transcript: TeleportTranscript,
    pub verify_c_prob: f64,
    pub verify_b_prob: f64,
    pub verdict: Verdict,
    pub frame_note: &'static str,
}

impl ScenarioReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `(t'(II), t'(I))` when II precedes I under `boost`.
pub fn detect_clone_interval(
    event_i: &SpacetimeEvent,
    event_ii: &SpacetimeEvent,
    boost: &Boost,
) -> Option<CloneWindow> {
    let t_i = boost_event(event_i, boost).t();
    let t_ii = boost_event(event_ii, boost).t();
    (t_ii < t_i).then_some(CloneWindow {
        start: t_ii,
        end: t_i,
    })
}

fn prepare(config: &ScenarioConfig, rng: &mut SimRng) -> Result<(StateVector, StateVector)> {
    let input = config.input_spec.draw(rng)?;
    let pair = config.resource_spec.draw(rng);
    Ok((input, pair))
}

fn frame_view(event_i: &SpacetimeEvent, event_ii: &SpacetimeEvent, boost: Boost) -> FrameView {
    FrameView {
        boost,
        event_i: boost_event(event_i, &boost),
        event_ii: boost_event(event_ii, &boost),
        clone_window: detect_clone_interval(event_i, event_ii, &boost),
    }
}

/// Runs the whole thought experiment for one configuration.
///
/// Alice's test of `C`, her Bell measurement and the message emission sit at
/// event I (the origin); reception, correction and Bob's test of `B` sit at
/// event II.
pub fn run_gedanken(config: &ScenarioConfig) -> Result<ScenarioReport> {
    config.validate()?;
    let event_i = SpacetimeEvent::new("I", 0.0, 0.0)?;
    let event_ii = signal_event(&event_i, config.separation, config.signal_speed, "II")?;

    let mut rng = seeded_rng(config.seed);
    let (input, pair) = prepare(config, &mut rng)?;
    let resource = derive_corrections(&pair)?;

    let joint = tensor(&input.relabel(&[INPUT])?, resource.state())?;
    let verify_c_prob = verification_measurement(&joint, INPUT, &input)?;
    let mut transcript = run_teleportation(&input, &resource, &mut rng)?;
    transcript.message = transcript.message.clone().with_emission(event_i.clone());
    let verify_b_prob = verification_measurement(&transcript.output_b, BOB, &input)?;

    let interval = classify_interval(&event_i, &event_ii);
    let reversing_boost = order_reversing_boost(&event_i, &event_ii)?;
    let clone_window = reversing_boost
        .as_ref()
        .and_then(|r| detect_clone_interval(&event_i, &event_ii, &r.boost));
    if clone_window.is_some() != (interval.kind == IntervalKind::Spacelike) {
        return Err(Error::invariant(format!(
            "clone window {:?} inconsistent with {:?} separation",
            clone_window, interval.kind
        )));
    }

    let certified = verify_c_prob >= 1.0 - FIDELITY && verify_b_prob >= 1.0 - FIDELITY;
    let verdict = match interval.kind {
        IntervalKind::Timelike => Verdict::ConsistentSubluminal,
        IntervalKind::Lightlike => Verdict::LightlikeBoundary,
        IntervalKind::Spacelike if certified => Verdict::CloneCertified,
        IntervalKind::Spacelike => {
            return Err(Error::invariant(format!(
                "verification failed (C: {verify_c_prob}, B: {verify_b_prob})"
            )))
        }
    };

    let frame = match config.frame_beta {
        Some(b) => Boost::new(b)?,
        None => reversing_boost.map_or(Boost::identity(), |r| r.boost),
    };
    Ok(ScenarioReport {
        config: config.clone(),
        report_frame: frame_view(&event_i, &event_ii, frame),
        event_i,
        event_ii,
        interval,
        reversing_boost,
        clone_window,
        transcript,
        verify_c_prob,
        verify_b_prob,
        verdict,
        frame_note: FRAME_NOTE,
    })
}

/// A labelled point in diagram coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagramPoint {
    pub label: String,
    pub x: f64,
    pub t: f64,
}

/// A labelled polyline; each vertex is `[x, t]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polyline {
    pub label: String,
    pub points: Vec<[f64; 2]>,
}

/// Spacetime diagram in one frame: horizontal axis `x`, vertical axis `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagramData {
    pub frame: Boost,
    pub events: Vec<DiagramPoint>,
    pub polylines: Vec<Polyline>,
}

fn to_frame(t: f64, x: f64, frame: &Boost) -> [f64; 2] {
    let e = SpacetimeEvent::new("", t, x).expect("finite diagram coordinates");
    let p = boost_event(&e, frame);
    [p.x(), p.t()]
}

/// Worldlines, message, light cone through I and (when a clone window
/// exists) the constant-time slice of the witness frame, all drawn in
/// `frame`. Vertex counts do not depend on the frame.
pub fn diagram_data(report: &ScenarioReport, frame: &Boost) -> DiagramData {
    let (i, ii) = (&report.event_i, &report.event_ii);
    let span = report.config.separation.max((ii.t() - i.t()).abs());
    let pad = 0.5 * span;
    let t0 = i.t().min(ii.t()) - pad;
    let t1 = i.t().max(ii.t()) + pad;
    let line = |label: &str, a: (f64, f64), b: (f64, f64)| Polyline {
        label: label.to_string(),
        points: vec![to_frame(a.0, a.1, frame), to_frame(b.0, b.1, frame)],
    };

    let mut polylines = vec![
        line("alice_worldline", (t0, i.x()), (t1, i.x())),
        line("bob_worldline", (t0, ii.x()), (t1, ii.x())),
        line("message", (i.t(), i.x()), (ii.t(), ii.x())),
        line(
            "light_cone_right",
            (i.t() - span, i.x() - span),
            (i.t() + span, i.x() + span),
        ),
        line(
            "light_cone_left",
            (i.t() - span, i.x() + span),
            (i.t() + span, i.x() - span),
        ),
    ];
    if let (Some(w), Some(r)) = (report.clone_window, report.reversing_boost) {
        // constant-t' slice of the witness frame, mapped back to the lab frame
        let tm = 0.5 * (w.start + w.end);
        let xi = boost_event(i, &r.boost).x();
        let xii = boost_event(ii, &r.boost).x();
        let (lo, hi) = (xi.min(xii) - pad, xi.max(xii) + pad);
        let back = r.boost.inverse();
        let lab = |xp: f64| {
            let e = boost_event(&SpacetimeEvent::new("", tm, xp).expect("finite"), &back);
            (e.t(), e.x())
        };
        polylines.push(line("clone_hypersurface", lab(lo), lab(hi)));
    }

    let events = [i, ii]
        .iter()
        .map(|e| {
            let [x, t] = to_frame(e.t(), e.x(), frame);
            DiagramPoint {
                label: e.label().to_string(),
                x,
                t,
            }
        })
        .collect();
    DiagramData {
        frame: *frame,
        events,
        polylines,
    }
}

/// Minimal standalone SVG rendering of a diagram.
pub fn render_svg(data: &DiagramData) -> String {
    const SIZE: f64 = 480.0;
    const MARGIN: f64 = 40.0;
    let xs = data
        .polylines
        .iter()
        .flat_map(|p| p.points.iter().map(|v| v[0]))
        .chain(data.events.iter().map(|e| e.x));
    let ts = data
        .polylines
        .iter()
        .flat_map(|p| p.points.iter().map(|v| v[1]))
        .chain(data.events.iter().map(|e| e.t));
    let (xmin, xmax) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    let (tmin, tmax) = ts.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    // equal scales keep light rays at 45 degrees
    let scale = (SIZE - 2.0 * MARGIN) / (xmax - xmin).max(tmax - tmin).max(1e-9);
    let px = |x: f64| MARGIN + (x - xmin) * scale;
    let py = |t: f64| SIZE - MARGIN - (t - tmin) * scale;

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n"
    );
    svg.push_str(&format!(
        "  <text x=\"{MARGIN}\" y=\"20\" font-size=\"12\">frame beta = {:.4}</text>\n",
        data.frame.beta()
    ));
    for p in &data.polylines {
        let (color, dash) = match p.label.as_str() {
            "message" => ("#c0392b", ""),
            "clone_hypersurface" => ("#8e44ad", " stroke-dasharray=\"6 3\""),
            l if l.starts_with("light_cone") => ("#f39c12", " stroke-dasharray=\"3 3\""),
            _ => ("#2c3e50", ""),
        };
        let pts: Vec<String> = p
            .points
            .iter()
            .map(|v| format!("{:.2},{:.2}", px(v[0]), py(v[1])))
            .collect();
        svg.push_str(&format!(
            "  <polyline id=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>\n",
            p.label,
            pts.join(" ")
        ));
    }
    for e in &data.events {
        svg.push_str(&format!(
            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#000\"/>\n  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>\n",
            px(e.x),
            py(e.t),
            px(e.x) + 6.0,
            py(e.t) - 6.0,
            e.label
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(speed: SignalSpeed) -> ScenarioConfig {
        ScenarioConfig::new(speed, 2.0, 42)
    }

    #[test]
    fn superluminal_certifies_clone() {
        let r = run_gedanken(&config(SignalSpeed::Finite(2.0))).unwrap();
        assert_eq!(r.interval.kind, IntervalKind::Spacelike);
        assert_eq!(r.verdict, Verdict::CloneCertified);
        assert!((r.verify_c_prob - 1.0).abs() < 1e-9);
        assert!((r.verify_b_prob - 1.0).abs() < 1e-9);
        let w = r.clone_window.unwrap();
        // witness β = 0.75: t'(II) = γ(1 − 1.5), t'(I) = 0
        let oracle = -0.5 / (1.0f64 - 0.75 * 0.75).sqrt();
        assert!((w.start - oracle).abs() < 1e-12);
        assert_eq!(w.end, 0.0);
        assert_eq!(r.report_frame.boost, r.reversing_boost.unwrap().boost);
    }

    #[test]
    fn subluminal_and_lightlike() {
        let r = run_gedanken(&config(SignalSpeed::Finite(0.9))).unwrap();
        assert_eq!(r.verdict, Verdict::ConsistentSubluminal);
        assert!(r.reversing_boost.is_none() && r.clone_window.is_none());
        assert_eq!(r.report_frame.boost, Boost::identity());
        let r = run_gedanken(&config(SignalSpeed::Finite(1.0))).unwrap();
        assert_eq!(r.verdict, Verdict::LightlikeBoundary);
        assert!(r.clone_window.is_none());
    }

    #[test]
    fn instantaneous_signal() {
        let r = run_gedanken(&config(SignalSpeed::Infinite)).unwrap();
        assert_eq!((r.event_ii.t(), r.event_ii.x()), (0.0, 2.0));
        let rev = r.reversing_boost.unwrap();
        assert_eq!(rev.threshold, 0.0);
        assert_eq!(r.verdict, Verdict::CloneCertified);
        for beta in [1e-6, 0.1, 0.9] {
            assert!(
                detect_clone_interval(&r.event_i, &r.event_ii, &Boost::new(beta).unwrap())
                    .is_some()
            );
        }
    }

    #[test]
    fn detect_examples() {
        let i = SpacetimeEvent::new("I", 0.0, 0.0).unwrap();
        let ii = SpacetimeEvent::new("II", 1.0, 2.0).unwrap();
        let w = detect_clone_interval(&i, &ii, &Boost::new(0.75).unwrap()).unwrap();
        assert!((w.start + 0.756).abs() < 1e-3);
        assert_eq!(w.end, 0.0);
        assert!(detect_clone_interval(&i, &ii, &Boost::new(0.25).unwrap()).is_none());
        let late = SpacetimeEvent::new("II", 2.0, 1.0).unwrap();
        for beta in [-0.99, -0.5, 0.0, 0.5, 0.99] {
            assert!(detect_clone_interval(&i, &late, &Boost::new(beta).unwrap()).is_none());
        }
    }

    #[test]
    fn frame_choice_changes_coordinates_only() {
        let base = run_gedanken(&config(SignalSpeed::Finite(2.0))).unwrap();
        let mut c = config(SignalSpeed::Finite(2.0));
        c.frame_beta = Some(0.25);
        let other = run_gedanken(&c).unwrap();
        assert_eq!(other.verdict, base.verdict);
        assert_eq!(other.verify_b_prob, base.verify_b_prob);
        assert_eq!(other.clone_window, base.clone_window);
        assert!(other.report_frame.clone_window.is_none());
        assert!(base.report_frame.clone_window.is_some());
    }

    #[test]
    fn config_validation() {
        let mut c = config(SignalSpeed::Finite(2.0));
        c.separation = 0.0;
        assert!(matches!(run_gedanken(&c), Err(Error::Validation(_))));
        let mut c = config(SignalSpeed::Finite(2.0));
        c.frame_beta = Some(1.0);
        assert!(matches!(run_gedanken(&c), Err(Error::Validation(_))));
        let mut c = config(SignalSpeed::Finite(2.0));
        c.input_spec = InputSpec::Named(CanonicalState::Singlet);
        assert!(matches!(run_gedanken(&c), Err(Error::Validation(_))));
        assert!(matches!(
            run_gedanken(&config(SignalSpeed::Finite(-2.0))),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn config_json_shape() {
        let json = r#"{"signal_speed":"infinite","separation":3.0,
            "input_spec":{"named":"plus"},"resource_spec":"phi_plus","seed":9}"#;
        let c: ScenarioConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.signal_speed, SignalSpeed::Infinite);
        assert_eq!(c.input_spec, InputSpec::Named(CanonicalState::Plus));
        assert_eq!(c.frame_beta, None);
        let back: ScenarioConfig =
            serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        let extra = r#"{"signal_speed":2,"separation":1,"input_spec":"haar_random",
            "resource_spec":"singlet","seed":1,"colour":"red"}"#;
        assert!(serde_json::from_str::<ScenarioConfig>(extra).is_err());
    }

    #[test]
    fn diagram_examples() {
        let r = run_gedanken(&config(SignalSpeed::Finite(2.0))).unwrap();
        let lab = diagram_data(&r, &Boost::identity());
        assert_eq!((lab.events[0].t, lab.events[0].x), (0.0, 0.0));
        assert_eq!((lab.events[1].t, lab.events[1].x), (1.0, 2.0));
        let primed = diagram_data(&r, &Boost::new(0.75).unwrap());
        assert!(primed.events[1].t < primed.events[0].t);
        assert_eq!(lab.events.len(), primed.events.len());
        assert_eq!(lab.polylines.len(), primed.polylines.len());
        for (a, b) in lab.polylines.iter().zip(&primed.polylines) {
            assert_eq!(a.label, b.label);
            assert_eq!(a.points.len(), b.points.len());
        }
        // the clone slice is horizontal in the witness frame
        let slice = primed
            .polylines
            .iter()
            .find(|p| p.label == "clone_hypersurface")
            .unwrap();
        assert!((slice.points[0][1] - slice.points[1][1]).abs() < 1e-12);
        let w = r.clone_window.unwrap();
        assert!(slice.points[0][1] > w.start && slice.points[0][1] < w.end);
        let svg = render_svg(&primed);
        assert!(svg.starts_with("<svg") && svg.contains("clone_hypersurface"));
    }

    #[test]
    fn subluminal_diagram_has_no_clone_slice() {
        let r = run_gedanken(&config(SignalSpeed::Finite(0.5))).unwrap();
        let d = diagram_data(&r, &Boost::identity());
        assert_eq!(d.polylines.len(), 5);
    }
}

//! Event-driven transient runs.
//!
//! Each stimulus edge re-settles the circuit from the previous state. Every
//! node whose level changed emits one event at the edge time plus its RC
//! arrival time. An edge cancels events still pending from earlier edges.

use std::collections::BTreeMap;

use super::{Circuit, Level, Signal, SimConfig, SimError};
use crate::netlist::Netlist;

/// Input voltages applied at `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stimulus {
    pub time: f64,
    pub inputs: BTreeMap<String, f64>,
}

impl Stimulus {
    pub fn new(time: f64, inputs: BTreeMap<String, f64>) -> Self {
        Self { time, inputs }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub node: String,
    pub old: Level,
    pub new: Level,
    pub energy: f64,
    /// Time since the edge that caused this event.
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Waveform {
    /// Node levels after the first stimulus settles, keyed by node.
    pub initial: BTreeMap<String, Level>,
    /// Edge times, including the initialising one.
    pub edges: Vec<f64>,
    /// Sorted by time, then node.
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub avg_power: f64,
    pub worst_delay: f64,
    pub pdp: f64,
}

fn energy(c: f64, old: Level, new: Level) -> f64 {
    match (old, new) {
        (Level::Volts(a), Level::Volts(b)) => 0.5 * c * (a - b) * (a - b),
        _ => 0.0,
    }
}

impl Circuit {
    pub fn transient(&self, schedule: &[Stimulus], cfg: &SimConfig) -> Result<Waveform, SimError> {
        cfg.validate()?;
        if schedule.iter().any(|s| !s.time.is_finite())
            || schedule.windows(2).any(|w| w[1].time <= w[0].time)
        {
            return Err(SimError::BadSchedule);
        }
        let Some(first) = schedule.first() else {
            return Ok(Waveform::default());
        };
        let at = |time: f64| {
            move |e: SimError| SimError::At {
                time,
                source: Box::new(e),
            }
        };

        let cap = self.node_capacitance(cfg);
        let names = self.nodes();
        let mut state: Vec<Signal> = self
            .settle(&first.inputs, cfg, None)
            .map_err(at(first.time))?
            .signals;
        let mut observed: Vec<Level> = state.iter().map(|s| s.level).collect();
        let initial = names
            .iter()
            .cloned()
            .zip(observed.iter().copied())
            .collect();
        let mut pending: Vec<(f64, usize, Level, Level, f64)> = Vec::new();
        let mut done: Vec<(f64, usize, Level, Level, f64)> = Vec::new();

        for s in &schedule[1..] {
            // Retire events that happened before this edge, cancel the rest.
            let mut cancelled: Vec<(f64, usize, Level, Level, f64)> = Vec::new();
            for e in pending.drain(..) {
                if e.0 < s.time {
                    done.push(e);
                } else {
                    cancelled.push(e);
                }
            }
            for e in cancelled.iter().rev() {
                observed[e.1] = e.2;
            }

            let next = self
                .settle(&s.inputs, cfg, Some(&state))
                .map_err(at(s.time))?
                .signals;
            let arrival = self.arrival_times(cfg, &next);
            for i in 0..next.len() {
                let new = next[i].level;
                if new.close_to(observed[i]) {
                    continue;
                }
                let delay = arrival[i].unwrap_or(0.0);
                pending.push((s.time + delay, i, observed[i], new, delay));
                observed[i] = new;
            }
            state = next;
        }
        done.append(&mut pending);
        done.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        Ok(Waveform {
            initial,
            edges: schedule.iter().map(|s| s.time).collect(),
            events: done
                .into_iter()
                .map(|(time, i, old, new, delay)| Event {
                    time,
                    node: names[i].clone(),
                    old,
                    new,
                    energy: energy(cap[i], old, new),
                    delay,
                })
                .collect(),
        })
    }
}

pub fn transient(
    n: &Netlist,
    schedule: &[Stimulus],
    cfg: &SimConfig,
) -> Result<Waveform, SimError> {
    Circuit::new(n)?.transient(schedule, cfg)
}

/// Average power over `duration` and the worst event delay.
pub fn measure(w: &Waveform, duration: f64) -> Result<Metrics, SimError> {
    measure_nodes(w, duration, None)
}

/// As [`measure`], with the delay taken only over events on `nodes`.
pub fn measure_nodes(
    w: &Waveform,
    duration: f64,
    nodes: Option<&[&str]>,
) -> Result<Metrics, SimError> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(SimError::BadConfig("duration must be positive".into()));
    }
    let avg_power = w.events.iter().map(|e| e.energy).sum::<f64>() / duration;
    let worst_delay = w
        .events
        .iter()
        .filter(|e| nodes.is_none_or(|ns| ns.contains(&e.node.as_str())))
        .map(|e| e.delay)
        .fold(0.0, f64::max);
    Ok(Metrics {
        avg_power,
        worst_delay,
        pdp: avg_power * worst_delay,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse;

    fn inv() -> Circuit {
        let text =
            ".input in\nMP1 out in VDD pfet 19 0 3\nMN1 out in GND nfet 19 0 3\n.probe out\n";
        Circuit::new(&parse(text).unwrap()).unwrap()
    }

    fn at(time: f64, v: f64) -> Stimulus {
        Stimulus::new(time, BTreeMap::from([("in".to_string(), v)]))
    }

    #[test]
    fn held_inputs_emit_nothing() {
        let w = inv()
            .transient(&[at(0.0, 0.0), at(1e-9, 0.0)], &SimConfig::default())
            .unwrap();
        assert!(w.events.is_empty());
        assert_eq!(w.initial["out"], Level::Volts(0.9));
    }

    #[test]
    fn inverter_edge() {
        let w = inv()
            .transient(&[at(0.0, 0.0), at(1e-9, 0.9)], &SimConfig::default())
            .unwrap();
        let out: Vec<_> = w.events.iter().filter(|e| e.node == "out").collect();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].new, Level::Volts(0.0));
        assert!((out[0].delay - 1e-11).abs() < 1e-20);
        assert!((out[0].energy - 4.05e-16).abs() < 1e-24);
        assert!((out[0].time - (1e-9 + 1e-11)).abs() < 1e-20);
    }

    #[test]
    fn schedule_must_increase() {
        let c = inv();
        let cfg = SimConfig::default();
        assert_eq!(
            c.transient(&[at(1.0, 0.0), at(1.0, 0.9)], &cfg),
            Err(SimError::BadSchedule)
        );
        assert_eq!(c.transient(&[], &cfg).unwrap(), Waveform::default());
    }

    #[test]
    fn errors_carry_time() {
        let c = inv();
        let bad = Stimulus::new(2e-9, BTreeMap::new());
        match c.transient(&[at(0.0, 0.0), bad], &SimConfig::default()) {
            Err(SimError::At { time, source }) => {
                assert_eq!(time, 2e-9);
                assert!(matches!(*source, SimError::MissingInput(_)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fast_edges_cancel_pending() {
        let w = inv()
            .transient(
                &[at(0.0, 0.0), at(1e-9, 0.9), at(1e-9 + 1e-12, 0.0)],
                &SimConfig::default(),
            )
            .unwrap();
        assert!(w.events.iter().all(|e| e.node != "out"), "{:?}", w.events);
    }

    #[test]
    fn measure_examples() {
        assert_eq!(
            measure(&Waveform::default(), 4e-9).unwrap(),
            Metrics {
                avg_power: 0.0,
                worst_delay: 0.0,
                pdp: 0.0
            }
        );
        let e = Event {
            time: 1e-11,
            node: "out".into(),
            old: Level::Volts(0.9),
            new: Level::Volts(0.0),
            energy: 4.05e-16,
            delay: 1e-11,
        };
        let w = Waveform {
            events: vec![e],
            ..Waveform::default()
        };
        let m = measure(&w, 4e-9).unwrap();
        assert!((m.avg_power - 1.0125e-7).abs() < 1e-15);
        assert_eq!(m.pdp, m.avg_power * m.worst_delay);
        assert_eq!(
            measure_nodes(&w, 4e-9, Some(&["other"]))
                .unwrap()
                .worst_delay,
            0.0
        );
        assert!(measure(&w, 0.0).is_err());
    }
}

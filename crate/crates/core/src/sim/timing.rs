//! First-order RC timing.
//!
//! Every conducting channel that carries a level into a node is one stage
//! with `R = r_on_per_tube / tubes` and `C` the total capacitance on the
//! receiving node. A stage starts once both its driving node and its gate
//! have settled, so arrival times accumulate along the longest enabled path.

use std::collections::{BTreeMap, VecDeque};

use super::{Circuit, Level, Signal, SimConfig, SimError, Strength};
use crate::netlist::Netlist;
use crate::ternary::Trit;

/// Inputs beyond this count are not enumerated exhaustively.
const EXHAUSTIVE_INPUTS: usize = 6;

impl Circuit {
    /// Capacitors, fan-out gates and, on probes, the output load.
    pub fn node_capacitance(&self, cfg: &SimConfig) -> Vec<f64> {
        (0..self.flat.nodes.len())
            .map(|i| {
                let caps: f64 = self.cap_neighbors[i].iter().map(|&(_, c)| c).sum();
                let gates: f64 = self.gated[i]
                    .iter()
                    .map(|&f| cfg.c_gate_per_tube * f64::from(self.flat.fets[f].device.tubes()))
                    .sum();
                let load = if self.is_probe[i] {
                    cfg.c_out_load
                } else {
                    0.0
                };
                caps + gates + load
            })
            .collect()
    }

    /// Channels that carried a level into each node, as `(fet, from)`.
    fn driving_edges(&self, state: &[Signal]) -> Vec<Vec<(usize, usize)>> {
        let count = state.len();
        let mut incoming = vec![Vec::new(); count];
        let mut dist = vec![usize::MAX; count];
        let mut queue = VecDeque::new();
        for src in 0..count {
            if state[src].strength != Strength::Supply {
                continue;
            }
            let Level::Volts(level) = state[src].level else {
                continue;
            };
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[src] = 0;
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                for &(fet, v) in &self.channel[u] {
                    if state[v].strength == Strength::Supply || !self.passes(fet, level, state) {
                        continue;
                    }
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                    if dist[v] == dist[u] + 1 {
                        incoming[v].push((fet, u));
                    }
                }
            }
        }
        incoming
    }

    /// Settling time of every node under `state`; `None` where nothing drives it.
    pub fn arrival_times(&self, cfg: &SimConfig, state: &[Signal]) -> Vec<Option<f64>> {
        let cap = self.node_capacitance(cfg);
        let incoming = self.driving_edges(state);
        let mut memo: Vec<Option<Option<f64>>> = vec![None; state.len()];
        let mut active = vec![false; state.len()];
        (0..state.len())
            .map(|i| self.arrival(i, cfg, state, &cap, &incoming, &mut memo, &mut active))
            .collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn arrival(
        &self,
        i: usize,
        cfg: &SimConfig,
        state: &[Signal],
        cap: &[f64],
        incoming: &[Vec<(usize, usize)>],
        memo: &mut Vec<Option<Option<f64>>>,
        active: &mut Vec<bool>,
    ) -> Option<f64> {
        if let Some(t) = memo[i] {
            return t;
        }
        if active[i] {
            return None;
        }
        active[i] = true;
        let t = match (state[i].strength, state[i].level) {
            (Strength::Supply, _) => Some(0.0),
            (_, Level::X | Level::Z) => None,
            (Strength::Driven, _) => {
                let mut best: Option<f64> = None;
                for &(fet, from) in &incoming[i] {
                    let f = &self.flat.fets[fet];
                    let start = self
                        .arrival(from, cfg, state, cap, incoming, memo, active)
                        .unwrap_or(0.0)
                        .max(
                            self.arrival(f.gate, cfg, state, cap, incoming, memo, active)
                                .unwrap_or(0.0),
                        );
                    let r = cfg.r_on_per_tube / f64::from(f.device.tubes());
                    let t = start + r * cap[i];
                    best = Some(best.map_or(t, |b: f64| b.max(t)));
                }
                best
            }
            (Strength::Charged, _) => {
                let mut best = None;
                for &(j, _) in &self.cap_neighbors[i] {
                    if let Some(t) = self.arrival(j, cfg, state, cap, incoming, memo, active) {
                        best = Some(best.map_or(t, |b: f64| b.max(t)));
                    }
                }
                best
            }
        };
        active[i] = false;
        memo[i] = Some(t);
        t
    }

    /// Worst-case settling time of `output` over ternary input assignments.
    pub fn delay_estimate(&self, output: &str, cfg: &SimConfig) -> Result<f64, SimError> {
        cfg.validate()?;
        let out = self
            .index(output)
            .ok_or_else(|| SimError::UnknownNode(output.to_string()))?;
        let mut worst: Option<f64> = None;
        for inputs in self.input_assignments(cfg.vdd) {
            let r = self.steady_state(&inputs, cfg)?;
            if let Some(t) = self.arrival_times(cfg, &r.signals)[out] {
                worst = Some(worst.map_or(t, |w: f64| w.max(t)));
            }
        }
        worst.ok_or_else(|| SimError::NoPath(output.to_string()))
    }

    /// Every ternary assignment of the inputs, or all-mid when there are too many.
    pub fn input_assignments(&self, vdd: f64) -> Vec<BTreeMap<String, f64>> {
        let names: Vec<&str> = self.inputs().collect();
        let level = |t: Trit| f64::from(t.value()) * vdd / 2.0;
        if names.len() > EXHAUSTIVE_INPUTS {
            return vec![names
                .iter()
                .map(|n| (n.to_string(), level(Trit::One)))
                .collect()];
        }
        let total = 3usize.pow(names.len() as u32);
        (0..total)
            .map(|mut code| {
                let mut m = BTreeMap::new();
                for name in names.iter().rev() {
                    let t = Trit::ALL[code % 3];
                    code /= 3;
                    m.insert(name.to_string(), level(t));
                }
                m
            })
            .collect()
    }
}

/// Worst-case RC delay to `output`.
pub fn delay_estimate(n: &Netlist, output: &str, cfg: &SimConfig) -> Result<f64, SimError> {
    Circuit::new(n)?.delay_estimate(output, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse;

    fn single_stage() -> Netlist {
        parse(".input in\nMN1 out in GND nfet 19 0 3\n.probe out\n").unwrap()
    }

    #[test]
    fn one_stage_three_tubes() {
        let d = delay_estimate(&single_stage(), "out", &SimConfig::default()).unwrap();
        assert!((d - 1e-11).abs() < 1e-20, "{d}");
    }

    #[test]
    fn doubling_load_doubles_delay() {
        let n = single_stage();
        let base = SimConfig::default();
        let double = SimConfig {
            c_out_load: 2e-15,
            ..base.clone()
        };
        let a = delay_estimate(&n, "out", &base).unwrap();
        let b = delay_estimate(&n, "out", &double).unwrap();
        assert!(b >= 2.0 * a - 1e-24);
    }

    #[test]
    fn chain_accumulates() {
        let text = ".input in\nMN1 m in GND nfet 19 0 3\nMN2 out in m nfet 19 0 3\n.probe out\n";
        let cfg = SimConfig {
            c_gate_per_tube: 0.0,
            ..SimConfig::default()
        };
        let d = delay_estimate(&parse(text).unwrap(), "out", &cfg).unwrap();
        // m carries no capacitance, so only the output stage counts.
        assert!((d - 1e-11).abs() < 1e-20, "{d}");
    }

    #[test]
    fn undriven_output() {
        let n = parse(".input in\nC1 in out 1f\n.probe out\n.probe q\nMN1 q in q nfet 19 0 1\n")
            .unwrap();
        let cfg = SimConfig::default();
        assert_eq!(delay_estimate(&n, "out", &cfg).unwrap(), 0.0);
        assert_eq!(
            delay_estimate(&n, "q", &cfg),
            Err(SimError::NoPath("q".into()))
        );
        assert!(matches!(
            delay_estimate(&n, "nope", &cfg),
            Err(SimError::UnknownNode(_))
        ));
    }
}

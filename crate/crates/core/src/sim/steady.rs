use std::collections::BTreeMap;

use super::{Level, Signal, SimConfig, SimError, Strength, LEVEL_EPS};
use crate::netlist::{flatten, FlatFet, FlatNetlist, Netlist, NodeKind};

/// A flattened netlist with the adjacency the solver needs.
///
/// Immutable once built; any number of simulations may share one.
#[derive(Debug, Clone)]
pub struct Circuit {
    pub(crate) flat: FlatNetlist,
    /// Per node: `(fet, other channel terminal)`.
    pub(crate) channel: Vec<Vec<(usize, usize)>>,
    /// Per node: fets gated by it.
    pub(crate) gated: Vec<Vec<usize>>,
    /// Per node: `(neighbour, farads)`, sorted by neighbour.
    pub(crate) cap_neighbors: Vec<Vec<(usize, f64)>>,
    pub(crate) is_probe: Vec<bool>,
}

/// Settled node signals.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub names: Vec<String>,
    pub signals: Vec<Signal>,
    pub iterations: usize,
}

impl Resolved {
    pub fn get(&self, node: &str) -> Option<Signal> {
        self.names
            .binary_search_by(|n| n.as_str().cmp(node))
            .ok()
            .map(|i| self.signals[i])
    }

    /// Nodes resolved to `X`.
    pub fn contentions(&self) -> Vec<&str> {
        self.names
            .iter()
            .zip(&self.signals)
            .filter(|(_, s)| s.level == Level::X)
            .map(|(n, _)| n.as_str())
            .collect()
    }

    pub fn to_map(&self) -> BTreeMap<String, Signal> {
        self.names
            .iter()
            .cloned()
            .zip(self.signals.iter().copied())
            .collect()
    }
}

/// Settles `n` with the given input voltages.
pub fn steady_state(
    n: &Netlist,
    inputs: &BTreeMap<String, f64>,
    cfg: &SimConfig,
) -> Result<Resolved, SimError> {
    Circuit::new(n)?.steady_state(inputs, cfg)
}

impl Circuit {
    pub fn new(n: &Netlist) -> Result<Self, SimError> {
        n.validate()?;
        let flat = flatten(n)?;
        let count = flat.nodes.len();
        let mut channel = vec![Vec::new(); count];
        let mut gated = vec![Vec::new(); count];
        for (i, f) in flat.fets.iter().enumerate() {
            if f.drain != f.source {
                channel[f.drain].push((i, f.source));
                channel[f.source].push((i, f.drain));
            }
            gated[f.gate].push(i);
        }
        let mut cap_neighbors = vec![Vec::new(); count];
        for c in &flat.caps {
            if c.a != c.b {
                cap_neighbors[c.a].push((c.b, c.farads));
                cap_neighbors[c.b].push((c.a, c.farads));
            }
        }
        for list in &mut cap_neighbors {
            list.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        }
        let mut is_probe = vec![false; count];
        for &p in &flat.probes {
            is_probe[p] = true;
        }
        Ok(Self {
            flat,
            channel,
            gated,
            cap_neighbors,
            is_probe,
        })
    }

    pub fn nodes(&self) -> &[String] {
        &self.flat.nodes
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.flat.index(name)
    }

    pub fn fets(&self) -> &[FlatFet] {
        &self.flat.fets
    }

    pub fn probes(&self) -> impl Iterator<Item = &str> {
        self.flat
            .probes
            .iter()
            .map(|&i| self.flat.nodes[i].as_str())
    }

    pub fn inputs(&self) -> impl Iterator<Item = &str> {
        self.flat
            .nodes
            .iter()
            .zip(&self.flat.kinds)
            .filter(|(_, k)| **k == NodeKind::Input)
            .map(|(n, _)| n.as_str())
    }

    /// Fixed voltage per node: supplies, sources and assigned inputs.
    pub(crate) fn fixed_levels(
        &self,
        inputs: &BTreeMap<String, f64>,
        cfg: &SimConfig,
    ) -> Result<Vec<Option<f64>>, SimError> {
        let mut fixed = vec![None; self.flat.nodes.len()];
        let set = |i: usize, v: f64, fixed: &mut Vec<Option<f64>>| match fixed[i] {
            Some(old) if (old - v).abs() > LEVEL_EPS => {
                Err(SimError::SourceConflict(self.flat.nodes[i].clone()))
            }
            _ => {
                fixed[i] = Some(v);
                Ok(())
            }
        };
        for (i, kind) in self.flat.kinds.iter().enumerate() {
            match kind {
                NodeKind::SupplyVdd => set(i, cfg.vdd, &mut fixed)?,
                NodeKind::SupplyGnd => set(i, 0.0, &mut fixed)?,
                _ => {}
            }
        }
        for &(i, v) in &self.flat.sources {
            set(i, v, &mut fixed)?;
        }
        for (name, &v) in inputs {
            let i = self
                .index(name)
                .ok_or_else(|| SimError::UnknownNode(name.clone()))?;
            if !v.is_finite() {
                return Err(SimError::BadConfig(format!("input `{name}` is not finite")));
            }
            set(i, v, &mut fixed)?;
        }
        if let Some(missing) = self.inputs().find(|n| !inputs.contains_key(*n)) {
            return Err(SimError::MissingInput(missing.to_string()));
        }
        Ok(fixed)
    }

    pub fn steady_state(
        &self,
        inputs: &BTreeMap<String, f64>,
        cfg: &SimConfig,
    ) -> Result<Resolved, SimError> {
        self.settle(inputs, cfg, None)
    }

    /// Settles starting from `prev`, so undriven nodes keep their charge.
    pub fn settle(
        &self,
        inputs: &BTreeMap<String, f64>,
        cfg: &SimConfig,
        prev: Option<&[Signal]>,
    ) -> Result<Resolved, SimError> {
        cfg.validate()?;
        let fixed = self.fixed_levels(inputs, cfg)?;
        let mut state: Vec<Signal> = (0..self.flat.nodes.len())
            .map(|i| match fixed[i] {
                Some(v) => Signal::new(Level::Volts(v), Strength::Supply),
                None => prev
                    .and_then(|p| p.get(i).copied())
                    .unwrap_or(Signal::FLOATING),
            })
            .collect();
        for iteration in 1..=cfg.max_iterations {
            let next = self.relax(&state, &fixed);
            let stable = next.iter().zip(&state).all(|(a, b)| a.same(b));
            state = next;
            if stable {
                return Ok(Resolved {
                    names: self.flat.nodes.clone(),
                    signals: state,
                    iterations: iteration,
                });
            }
        }
        Err(SimError::NonConvergent(cfg.max_iterations))
    }

    /// Whether `fet` passes `level` from its source side, under `state`.
    pub(crate) fn passes(&self, fet: usize, level: f64, state: &[Signal]) -> bool {
        let f = &self.flat.fets[fet];
        match state[f.gate].level {
            Level::Volts(g) => f.device.conducts(g, level),
            Level::X | Level::Z => false,
        }
    }

    /// One Jacobi sweep.
    fn relax(&self, state: &[Signal], fixed: &[Option<f64>]) -> Vec<Signal> {
        let count = state.len();
        let mut reached: Vec<Vec<f64>> = vec![Vec::new(); count];
        let mut seen = vec![usize::MAX; count];
        let mut stack = Vec::new();

        for (src, level) in fixed.iter().enumerate() {
            let Some(level) = *level else { continue };
            seen[src] = src;
            stack.push(src);
            while let Some(u) = stack.pop() {
                for &(fet, other) in &self.channel[u] {
                    if fixed[other].is_some() || seen[other] == src {
                        continue;
                    }
                    if self.passes(fet, level, state) {
                        seen[other] = src;
                        reached[other].push(level);
                        stack.push(other);
                    }
                }
            }
        }

        (0..count)
            .map(|i| {
                if let Some(v) = fixed[i] {
                    return Signal::new(Level::Volts(v), Strength::Supply);
                }
                let levels = &reached[i];
                if let Some(&first) = levels.first() {
                    let agree = levels.iter().all(|v| (v - first).abs() <= LEVEL_EPS);
                    let level = if agree { Level::Volts(first) } else { Level::X };
                    return Signal::new(level, Strength::Driven);
                }
                self.share_charge(i, state)
            })
            .collect()
    }

    /// Undriven node: weighted mean of capacitor neighbours, else its history.
    fn share_charge(&self, i: usize, state: &[Signal]) -> Signal {
        let mut q = 0.0;
        let mut c_total = 0.0;
        for &(j, c) in &self.cap_neighbors[i] {
            match state[j].level {
                Level::Volts(v) => {
                    q += c * v;
                    c_total += c;
                }
                Level::X => return Signal::new(Level::X, Strength::Charged),
                Level::Z => {}
            }
        }
        if c_total > 0.0 {
            Signal::new(Level::Volts(q / c_total), Strength::Charged)
        } else {
            Signal::new(state[i].level, Strength::Charged)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse;

    fn circuit(text: &str) -> Circuit {
        Circuit::new(&parse(text).unwrap()).unwrap()
    }

    fn inputs(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(n, v)| (n.to_string(), *v)).collect()
    }

    #[test]
    fn nti_half_rail_pulls_low() {
        let c = circuit(
            ".input in\nMP out in VDD pfet 10 0 3\nMN out in GND nfet 19 0 3\n.probe out\n",
        );
        let r = c
            .steady_state(&inputs(&[("in", 0.45)]), &SimConfig::default())
            .unwrap();
        assert_eq!(
            r.get("out"),
            Some(Signal::new(Level::Volts(0.0), Strength::Driven))
        );
        assert_eq!(r.get("VDD").unwrap().strength, Strength::Supply);
    }

    #[test]
    fn fighting_drivers_give_x() {
        let c = circuit(".input g\nMP out g VDD pfet 19 0 1\nMN out g GND nfet 19 0 1\nMN2 out VDD GND nfet 19 0 1\n.probe out\n");
        let r = c
            .steady_state(&inputs(&[("g", 0.0)]), &SimConfig::default())
            .unwrap();
        assert_eq!(r.get("out").unwrap().level, Level::X);
        assert_eq!(r.contentions(), vec!["out"]);
    }

    #[test]
    fn floating_node_keeps_history() {
        let c = circuit(".input g d\nMN out g d nfet 19 0 1\n.probe out\n");
        let sim = SimConfig::default();
        let on = c
            .steady_state(&inputs(&[("g", 0.9), ("d", 0.0)]), &sim)
            .unwrap();
        let off = c
            .settle(&inputs(&[("g", 0.0), ("d", 0.9)]), &sim, Some(&on.signals))
            .unwrap();
        assert_eq!(
            off.get("out"),
            Some(Signal::new(Level::Volts(0.0), Strength::Charged))
        );
        let cold = c
            .steady_state(&inputs(&[("g", 0.0), ("d", 0.9)]), &sim)
            .unwrap();
        assert_eq!(cold.get("out").unwrap().level, Level::Z);
    }

    #[test]
    fn ring_oscillator_does_not_converge() {
        let ring = "\
MP1 b a VDD pfet 19 0 1
MN1 b a GND nfet 19 0 1
MP2 c b VDD pfet 19 0 1
MN2 c b GND nfet 19 0 1
MP3 a c VDD pfet 19 0 1
MN3 a c GND nfet 19 0 1
";
        let c = circuit(ring);
        let high = Signal::new(Level::Volts(0.9), Strength::Driven);
        let prev: Vec<Signal> = c.nodes().iter().map(|_| high).collect();
        let err = c
            .settle(&BTreeMap::new(), &SimConfig::default(), Some(&prev))
            .unwrap_err();
        assert_eq!(err, SimError::NonConvergent(64));
    }

    #[test]
    fn input_errors() {
        let c = circuit(".input in\nMN out in GND nfet 19 0 1\nV1 q 0.3\nC1 q out 1f\n");
        let sim = SimConfig::default();
        assert_eq!(
            c.steady_state(&BTreeMap::new(), &sim),
            Err(SimError::MissingInput("in".into()))
        );
        assert_eq!(
            c.steady_state(&inputs(&[("in", 0.0), ("zz", 0.0)]), &sim),
            Err(SimError::UnknownNode("zz".into()))
        );
        assert_eq!(
            c.steady_state(&inputs(&[("in", 0.0), ("q", 0.5)]), &sim),
            Err(SimError::SourceConflict("q".into()))
        );
        let bad = SimConfig {
            max_iterations: 4,
            ..SimConfig::default()
        };
        assert!(matches!(
            c.steady_state(&inputs(&[("in", 0.0)]), &bad),
            Err(SimError::BadConfig(_))
        ));
    }
}

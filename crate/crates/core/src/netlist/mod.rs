//! Circuit data model and the `.tnl` text format.
//!
//! ```text
//! * comment
//! .title <name>
//! .input <node> ...
//! .subckt <name> <port> ...
//!   ...devices...
//! .ends
//! M<name> <drain> <gate> <source> {nfet|pfet} <n1> <n2> <tubes>
//! C<name> <a> <b> <value>[f|p|n|u]
//! V<name> <node> <volts>
//! X<name> <node> ... <subckt>
//! .probe <node>
//! .end
//! ```
//!
//! Keywords and device letters are case-insensitive. Node names are
//! case-sensitive except for the reserved supplies `VDD` and `GND`.

mod flatten;
mod library;
mod parse;
mod write;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::devmodel::{CnfetInstance, DeviceError};

pub use flatten::{flatten, FlatCap, FlatFet, FlatNetlist};
pub use library::{
    build_cell, build_design, builtin, fixture_text, ladder_chirality, BuiltinCell, ConfigError,
    DesignConfig, Tech, FIXTURE_NAMES,
};
pub use parse::{parse, parse_bytes};
pub use write::serialize;

pub const VDD: &str = "VDD";
pub const GND: &str = "GND";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemanticError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown subcircuit `{0}`")]
    UnknownSubckt(String),
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("device `{name}`: {source}")]
    Device { name: String, source: DeviceError },
    #[error("`{instance}` connects {given} nodes but `{subckt}` has {expected} ports")]
    PortCount {
        instance: String,
        subckt: String,
        expected: usize,
        given: usize,
    },
    #[error("port `{port}` of `{subckt}` is not connected to anything inside it")]
    DanglingPort { subckt: String, port: String },
    #[error("subcircuit `{0}` instantiates itself")]
    RecursiveSubckt(String),
    #[error("capacitor `{0}` must have a positive value")]
    BadCapacitance(String),
    #[error("`{name}` must start with `{letter}`")]
    BadName { name: String, letter: char },
    #[error("supply node `{0}` cannot be a port or input")]
    SupplyMisuse(String),
    #[error("probes are only allowed at top level, found one in `{0}`")]
    ProbeInSubckt(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetlistError {
    #[error("line {line}, col {col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("line {line}: {kind}")]
    Semantic { line: usize, kind: SemanticError },
    #[error(transparent)]
    Invalid(#[from] SemanticError),
}

impl NetlistError {
    /// Source line of a parse diagnostic.
    pub fn line(&self) -> Option<usize> {
        match self {
            NetlistError::Syntax { line, .. } | NetlistError::Semantic { line, .. } => Some(*line),
            NetlistError::Invalid(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    SupplyVdd,
    SupplyGnd,
    Input,
    Output,
    Internal,
}

/// Canonical spelling of a node name: the supplies are case-insensitive.
pub fn canonical_node(name: &str) -> String {
    if name.eq_ignore_ascii_case(VDD) {
        VDD.to_string()
    } else if name.eq_ignore_ascii_case(GND) {
        GND.to_string()
    } else {
        name.to_string()
    }
}

pub fn is_supply(name: &str) -> bool {
    name == VDD || name == GND
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fet {
    pub name: String,
    pub device: CnfetInstance,
    pub drain: String,
    pub gate: String,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Device {
    Cnfet(Fet),
    Capacitor {
        name: String,
        a: String,
        b: String,
        farads: f64,
    },
    Source {
        name: String,
        node: String,
        volts: f64,
    },
    Probe {
        node: String,
    },
    Instance {
        name: String,
        subckt: String,
        ports: Vec<String>,
    },
}

impl Device {
    pub fn name(&self) -> Option<&str> {
        match self {
            Device::Cnfet(f) => Some(&f.name),
            Device::Capacitor { name, .. }
            | Device::Source { name, .. }
            | Device::Instance { name, .. } => Some(name),
            Device::Probe { .. } => None,
        }
    }

    /// Every node this device touches.
    pub fn nodes(&self) -> Vec<&str> {
        match self {
            Device::Cnfet(f) => vec![&f.drain, &f.gate, &f.source],
            Device::Capacitor { a, b, .. } => vec![a, b],
            Device::Source { node, .. } | Device::Probe { node } => vec![node],
            Device::Instance { ports, .. } => ports.iter().map(String::as_str).collect(),
        }
    }

    fn check_name(&self) -> Result<(), SemanticError> {
        let letter = match self {
            Device::Cnfet(_) => 'M',
            Device::Capacitor { .. } => 'C',
            Device::Source { .. } => 'V',
            Device::Instance { .. } => 'X',
            Device::Probe { .. } => return Ok(()),
        };
        let name = self.name().unwrap_or_default();
        let ok = name.len() > 1
            && name
                .chars()
                .next()
                .is_some_and(|c| c.eq_ignore_ascii_case(&letter))
            && !name.chars().any(char::is_whitespace);
        if ok {
            Ok(())
        } else {
            Err(SemanticError::BadName {
                name: name.to_string(),
                letter,
            })
        }
    }
}

/// A reusable cell body with an ordered port list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Subckt {
    pub ports: Vec<String>,
    pub devices: Vec<Device>,
}

impl Subckt {
    pub fn new<S: Into<String>>(ports: impl IntoIterator<Item = S>) -> Self {
        Self {
            ports: ports.into_iter().map(Into::into).collect(),
            devices: Vec::new(),
        }
    }

    pub fn push(&mut self, d: Device) -> &mut Self {
        self.devices.push(d);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Netlist {
    pub name: String,
    pub nodes: BTreeMap<String, NodeKind>,
    pub devices: Vec<Device>,
    pub subckts: BTreeMap<String, Subckt>,
}

impl Netlist {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Default::default()
        }
    }

    fn touch(&mut self, node: &str) {
        let kind = match node {
            VDD => NodeKind::SupplyVdd,
            GND => NodeKind::SupplyGnd,
            _ => NodeKind::Internal,
        };
        self.nodes.entry(node.to_string()).or_insert(kind);
    }

    /// Appends a top-level device and registers its nodes.
    pub fn push(&mut self, d: Device) -> &mut Self {
        for n in d.nodes() {
            self.touch(n);
        }
        if let Device::Probe { node } = &d {
            if let Some(k @ NodeKind::Internal) = self.nodes.get_mut(node) {
                *k = NodeKind::Output;
            }
        }
        self.devices.push(d);
        self
    }

    pub fn probe(&mut self, node: &str) -> &mut Self {
        self.push(Device::Probe {
            node: node.to_string(),
        })
    }

    /// Marks an already-connected node as a primary input.
    pub fn mark_input(&mut self, node: &str) -> Result<&mut Self, SemanticError> {
        match self.nodes.get_mut(node) {
            Some(NodeKind::SupplyVdd | NodeKind::SupplyGnd) => {
                Err(SemanticError::SupplyMisuse(node.to_string()))
            }
            Some(k) => {
                *k = NodeKind::Input;
                Ok(self)
            }
            None => Err(SemanticError::UnknownNode(node.to_string())),
        }
    }

    pub fn add_subckt(&mut self, name: impl Into<String>, s: Subckt) -> &mut Self {
        self.subckts.insert(name.into(), s);
        self
    }

    pub fn nodes_of_kind(&self, kind: NodeKind) -> impl Iterator<Item = &str> {
        self.nodes
            .iter()
            .filter(move |(_, k)| **k == kind)
            .map(|(n, _)| n.as_str())
    }

    pub fn inputs(&self) -> Vec<&str> {
        self.nodes_of_kind(NodeKind::Input).collect()
    }

    /// Probed nodes in declaration order.
    pub fn probes(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.devices
            .iter()
            .filter_map(|d| match d {
                Device::Probe { node } if seen.insert(node.as_str()) => Some(node.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Checks the structural invariants of a programmatically built netlist.
    pub fn validate(&self) -> Result<(), SemanticError> {
        validate_scope(&self.devices, &self.subckts)?;
        for d in &self.devices {
            for n in d.nodes() {
                if !self.nodes.contains_key(n) {
                    return Err(SemanticError::UnknownNode(n.to_string()));
                }
            }
        }
        for (name, s) in &self.subckts {
            validate_subckt(name, s, &self.subckts)?;
        }
        check_recursion(&self.subckts)
    }

    /// Number of CNFETs after flattening.
    pub fn cnfet_count(&self) -> Result<usize, SemanticError> {
        Ok(flatten(self)?.fets.len())
    }

    /// Number of capacitors after flattening.
    pub fn capacitor_count(&self) -> Result<usize, SemanticError> {
        Ok(flatten(self)?.caps.len())
    }
}

pub(crate) fn validate_device(
    d: &Device,
    subckts: &BTreeMap<String, Subckt>,
) -> Result<(), SemanticError> {
    d.check_name()?;
    match d {
        Device::Capacitor { name, farads, .. } if !(*farads > 0.0 && farads.is_finite()) => {
            Err(SemanticError::BadCapacitance(name.clone()))
        }
        Device::Instance {
            name,
            subckt,
            ports,
        } => {
            let s = subckts
                .get(subckt)
                .ok_or_else(|| SemanticError::UnknownSubckt(subckt.clone()))?;
            if s.ports.len() != ports.len() {
                return Err(SemanticError::PortCount {
                    instance: name.clone(),
                    subckt: subckt.clone(),
                    expected: s.ports.len(),
                    given: ports.len(),
                });
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

fn validate_scope(
    devices: &[Device],
    subckts: &BTreeMap<String, Subckt>,
) -> Result<(), SemanticError> {
    let mut names = BTreeSet::new();
    for d in devices {
        validate_device(d, subckts)?;
        if let Some(n) = d.name() {
            if !names.insert(n.to_ascii_uppercase()) {
                return Err(SemanticError::DuplicateId(n.to_string()));
            }
        }
    }
    Ok(())
}

pub(crate) fn validate_subckt(
    name: &str,
    s: &Subckt,
    subckts: &BTreeMap<String, Subckt>,
) -> Result<(), SemanticError> {
    validate_scope(&s.devices, subckts)?;
    let mut seen = BTreeSet::new();
    for p in &s.ports {
        if is_supply(p) {
            return Err(SemanticError::SupplyMisuse(p.clone()));
        }
        if !seen.insert(p) {
            return Err(SemanticError::DuplicateId(p.clone()));
        }
    }
    if s.devices.iter().any(|d| matches!(d, Device::Probe { .. })) {
        return Err(SemanticError::ProbeInSubckt(name.to_string()));
    }
    let used: BTreeSet<&str> = s.devices.iter().flat_map(Device::nodes).collect();
    match s.ports.iter().find(|p| !used.contains(p.as_str())) {
        Some(port) => Err(SemanticError::DanglingPort {
            subckt: name.to_string(),
            port: port.clone(),
        }),
        None => Ok(()),
    }
}

/// Subcircuit names in dependency order: children before their users.
pub(crate) fn subckt_order(subckts: &BTreeMap<String, Subckt>) -> Result<Vec<&str>, SemanticError> {
    fn visit<'a>(
        name: &'a str,
        subckts: &'a BTreeMap<String, Subckt>,
        done: &mut BTreeSet<&'a str>,
        stack: &mut Vec<&'a str>,
        out: &mut Vec<&'a str>,
    ) -> Result<(), SemanticError> {
        if done.contains(name) {
            return Ok(());
        }
        if stack.contains(&name) {
            return Err(SemanticError::RecursiveSubckt(name.to_string()));
        }
        let Some((key, s)) = subckts.get_key_value(name) else {
            return Err(SemanticError::UnknownSubckt(name.to_string()));
        };
        stack.push(key);
        for d in &s.devices {
            if let Device::Instance { subckt, .. } = d {
                visit(subckt, subckts, done, stack, out)?;
            }
        }
        stack.pop();
        done.insert(key);
        out.push(key);
        Ok(())
    }

    let mut done = BTreeSet::new();
    let mut out = Vec::new();
    for name in subckts.keys() {
        visit(name, subckts, &mut done, &mut Vec::new(), &mut out)?;
    }
    Ok(out)
}

fn check_recursion(subckts: &BTreeMap<String, Subckt>) -> Result<(), SemanticError> {
    subckt_order(subckts).map(|_| ())
}

use std::collections::{BTreeMap, BTreeSet};

use super::{is_supply, Device, Netlist, NodeKind, SemanticError, Subckt, GND, VDD};
use crate::devmodel::CnfetInstance;

#[derive(Debug, Clone, PartialEq)]
pub struct FlatFet {
    pub name: String,
    pub device: CnfetInstance,
    pub drain: usize,
    pub gate: usize,
    pub source: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatCap {
    pub a: usize,
    pub b: usize,
    pub farads: f64,
}

/// Hierarchy-free view of a netlist with integer node handles.
///
/// Node indices follow the sorted order of the hierarchical names, so they do
/// not depend on device declaration order. Internal nodes of an instance are
/// named `<instance>.<node>`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlatNetlist {
    pub nodes: Vec<String>,
    pub kinds: Vec<NodeKind>,
    pub fets: Vec<FlatFet>,
    pub caps: Vec<FlatCap>,
    pub sources: Vec<(usize, f64)>,
    pub probes: Vec<usize>,
}

impl FlatNetlist {
    pub fn index(&self, name: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }
}

enum Raw {
    Fet {
        name: String,
        device: CnfetInstance,
        d: String,
        g: String,
        s: String,
    },
    Cap {
        a: String,
        b: String,
        farads: f64,
    },
    Src {
        node: String,
        volts: f64,
    },
}

fn expand(
    devices: &[Device],
    map: &dyn Fn(&str) -> String,
    prefix: &str,
    subckts: &BTreeMap<String, Subckt>,
    depth: usize,
    out: &mut Vec<Raw>,
) -> Result<(), SemanticError> {
    if depth > 64 {
        return Err(SemanticError::RecursiveSubckt(prefix.to_string()));
    }
    for d in devices {
        match d {
            Device::Cnfet(f) => out.push(Raw::Fet {
                name: format!("{prefix}{}", f.name),
                device: f.device,
                d: map(&f.drain),
                g: map(&f.gate),
                s: map(&f.source),
            }),
            Device::Capacitor { a, b, farads, .. } => out.push(Raw::Cap {
                a: map(a),
                b: map(b),
                farads: *farads,
            }),
            Device::Source { node, volts, .. } => out.push(Raw::Src {
                node: map(node),
                volts: *volts,
            }),
            Device::Probe { .. } => {}
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
                let bound: BTreeMap<&str, String> = s
                    .ports
                    .iter()
                    .map(String::as_str)
                    .zip(ports.iter().map(|p| map(p)))
                    .collect();
                let inner = format!("{prefix}{name}.");
                let child_map = |n: &str| -> String {
                    if is_supply(n) {
                        n.to_string()
                    } else if let Some(outer) = bound.get(n) {
                        outer.clone()
                    } else {
                        format!("{inner}{n}")
                    }
                };
                expand(&s.devices, &child_map, &inner, subckts, depth + 1, out)?;
            }
        }
    }
    Ok(())
}

pub fn flatten(n: &Netlist) -> Result<FlatNetlist, SemanticError> {
    let mut raw = Vec::new();
    expand(
        &n.devices,
        &|s: &str| s.to_string(),
        "",
        &n.subckts,
        0,
        &mut raw,
    )?;

    let mut names: BTreeSet<String> = n.nodes.keys().cloned().collect();
    for r in &raw {
        match r {
            Raw::Fet { d, g, s, .. } => names.extend([d.clone(), g.clone(), s.clone()]),
            Raw::Cap { a, b, .. } => names.extend([a.clone(), b.clone()]),
            Raw::Src { node, .. } => {
                names.insert(node.clone());
            }
        }
    }
    names.insert(VDD.to_string());
    names.insert(GND.to_string());

    let nodes: Vec<String> = names.into_iter().collect();
    let kinds = nodes
        .iter()
        .map(|name| match name.as_str() {
            VDD => NodeKind::SupplyVdd,
            GND => NodeKind::SupplyGnd,
            other => n.nodes.get(other).copied().unwrap_or(NodeKind::Internal),
        })
        .collect();
    let mut flat = FlatNetlist {
        nodes,
        kinds,
        ..Default::default()
    };
    let idx = |flat: &FlatNetlist, s: &str| flat.index(s).expect("every node was registered");

    for r in raw {
        match r {
            Raw::Fet {
                name,
                device,
                d,
                g,
                s,
            } => {
                let fet = FlatFet {
                    name,
                    device,
                    drain: idx(&flat, &d),
                    gate: idx(&flat, &g),
                    source: idx(&flat, &s),
                };
                flat.fets.push(fet);
            }
            Raw::Cap { a, b, farads } => {
                let cap = FlatCap {
                    a: idx(&flat, &a),
                    b: idx(&flat, &b),
                    farads,
                };
                flat.caps.push(cap);
            }
            Raw::Src { node, volts } => {
                let i = idx(&flat, &node);
                flat.sources.push((i, volts));
            }
        }
    }
    for p in n.probes() {
        let i = idx(&flat, p);
        flat.probes.push(i);
    }
    Ok(flat)
}

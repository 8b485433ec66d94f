use std::collections::{BTreeMap, BTreeSet};

use super::{
    canonical_node, is_supply, subckt_order, validate_device, validate_subckt, Device, Fet,
    Netlist, NetlistError, SemanticError, Subckt,
};
use crate::devmodel::{Chirality, CnfetInstance, Polarity};

#[derive(Debug, Clone, Copy)]
struct Tok<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let mut toks = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                toks.push(Tok {
                    text: &line[s..i],
                    col: line[..s].chars().count() + 1,
                });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        toks.push(Tok {
            text: &line[s..],
            col: line[..s].chars().count() + 1,
        });
    }
    toks
}

struct Ctx {
    line: usize,
}

impl Ctx {
    fn syntax(&self, col: usize, msg: impl Into<String>) -> NetlistError {
        NetlistError::Syntax {
            line: self.line,
            col,
            msg: msg.into(),
        }
    }

    fn semantic(&self, kind: SemanticError) -> NetlistError {
        NetlistError::Semantic {
            line: self.line,
            kind,
        }
    }

    fn arity(&self, toks: &[Tok], want: usize, what: &str) -> Result<(), NetlistError> {
        match toks.len().cmp(&want) {
            std::cmp::Ordering::Equal => Ok(()),
            std::cmp::Ordering::Less => {
                let col = toks.last().map_or(1, |t| t.col + t.text.chars().count());
                Err(self.syntax(
                    col,
                    format!(
                        "{what} expects {} fields, found {}",
                        want - 1,
                        toks.len() - 1
                    ),
                ))
            }
            std::cmp::Ordering::Greater => Err(self.syntax(
                toks[want].col,
                format!("unexpected `{}` after {what}", toks[want].text),
            )),
        }
    }

    fn uint(&self, t: Tok) -> Result<u32, NetlistError> {
        t.text.parse().map_err(|_| {
            self.syntax(
                t.col,
                format!("expected a non-negative integer, found `{}`", t.text),
            )
        })
    }

    fn number(&self, t: Tok) -> Result<f64, NetlistError> {
        t.text
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.syntax(t.col, format!("expected a number, found `{}`", t.text)))
    }

    fn capacitance(&self, t: Tok) -> Result<f64, NetlistError> {
        parse_value(t.text).ok_or_else(|| {
            self.syntax(t.col, format!("expected a capacitance, found `{}`", t.text))
        })
    }
}

/// Numeric value with an optional f/p/n/u scale suffix.
pub(crate) fn parse_value(s: &str) -> Option<f64> {
    let (body, scale) = match s.chars().last()?.to_ascii_lowercase() {
        'f' => (&s[..s.len() - 1], 1e15),
        'p' => (&s[..s.len() - 1], 1e12),
        'n' => (&s[..s.len() - 1], 1e9),
        'u' => (&s[..s.len() - 1], 1e6),
        _ => (s, 1.0),
    };
    let v: f64 = body.parse().ok()?;
    let v = v / scale;
    v.is_finite().then_some(v)
}

fn node(t: Tok) -> String {
    canonical_node(t.text)
}

fn parse_device(ctx: &Ctx, toks: &[Tok]) -> Result<Device, NetlistError> {
    let head = toks[0];
    let name = head.text.to_string();
    if head.text.chars().count() < 2 {
        return Err(ctx.syntax(
            head.col,
            format!("device `{name}` needs a name after its type letter"),
        ));
    }
    match head.text.chars().next().map(|c| c.to_ascii_uppercase()) {
        Some('M') => {
            ctx.arity(toks, 8, "CNFET")?;
            let polarity = match toks[4].text.to_ascii_lowercase().as_str() {
                "nfet" => Polarity::Nfet,
                "pfet" => Polarity::Pfet,
                other => {
                    return Err(ctx.syntax(
                        toks[4].col,
                        format!("expected nfet or pfet, found `{other}`"),
                    ))
                }
            };
            let n1 = ctx.uint(toks[5])?;
            let n2 = ctx.uint(toks[6])?;
            let tubes = ctx.uint(toks[7])?;
            let device = Chirality::new(n1, n2)
                .and_then(|c| CnfetInstance::new(polarity, c, tubes))
                .map_err(|source| {
                    ctx.semantic(SemanticError::Device {
                        name: name.clone(),
                        source,
                    })
                })?;
            Ok(Device::Cnfet(Fet {
                name,
                device,
                drain: node(toks[1]),
                gate: node(toks[2]),
                source: node(toks[3]),
            }))
        }
        Some('C') => {
            ctx.arity(toks, 4, "capacitor")?;
            let farads = ctx.capacitance(toks[3])?;
            Ok(Device::Capacitor {
                name,
                a: node(toks[1]),
                b: node(toks[2]),
                farads,
            })
        }
        Some('V') => {
            ctx.arity(toks, 3, "source")?;
            let volts = ctx.number(toks[2])?;
            Ok(Device::Source {
                name,
                node: node(toks[1]),
                volts,
            })
        }
        Some('X') => {
            if toks.len() < 3 {
                let col = toks.last().map_or(1, |t| t.col + t.text.chars().count());
                return Err(ctx.syntax(col, "instance expects nodes followed by a subcircuit name"));
            }
            let (last, ports) = toks[1..].split_last().expect("at least two tokens");
            Ok(Device::Instance {
                name,
                subckt: last.text.to_string(),
                ports: ports.iter().map(|&t| node(t)).collect(),
            })
        }
        _ => Err(ctx.syntax(head.col, format!("unknown element `{}`", head.text))),
    }
}

struct OpenSubckt {
    name: String,
    line: usize,
    body: Subckt,
    lines: Vec<usize>,
}

/// Parses raw bytes, rejecting invalid UTF-8 with a positioned diagnostic.
pub fn parse_bytes(bytes: &[u8]) -> Result<Netlist, NetlistError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let good = &bytes[..e.valid_up_to()];
            let line = good.iter().filter(|&&b| b == b'\n').count() + 1;
            let line_start = good.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
            let col = String::from_utf8_lossy(&good[line_start..]).chars().count() + 1;
            Err(NetlistError::Syntax {
                line,
                col,
                msg: "invalid UTF-8".into(),
            })
        }
    }
}

pub fn parse(text: &str) -> Result<Netlist, NetlistError> {
    let mut title: Option<String> = None;
    let mut top: Vec<(usize, Device)> = Vec::new();
    let mut inputs: Vec<(usize, String)> = Vec::new();
    let mut subckts: BTreeMap<String, (usize, Subckt, Vec<usize>)> = BTreeMap::new();
    let mut open: Option<OpenSubckt> = None;

    for (idx, raw) in text.lines().enumerate() {
        let ctx = Ctx { line: idx + 1 };
        let toks = tokenize(raw);
        let Some(&head) = toks.first() else { continue };
        if head.text.starts_with('*') {
            continue;
        }
        if !head.text.starts_with('.') {
            let d = parse_device(&ctx, &toks)?;
            match open.as_mut() {
                Some(s) => {
                    s.body.devices.push(d);
                    s.lines.push(ctx.line);
                }
                None => top.push((ctx.line, d)),
            }
            continue;
        }

        let keyword = head.text.to_ascii_lowercase();
        let top_only = |what: &str| -> Result<(), NetlistError> {
            match &open {
                Some(s) => Err(ctx.syntax(
                    head.col,
                    format!("{what} is not allowed inside .subckt {}", s.name),
                )),
                None => Ok(()),
            }
        };
        match keyword.as_str() {
            ".title" => {
                top_only(".title")?;
                if title.is_some() {
                    return Err(ctx.syntax(head.col, "duplicate .title"));
                }
                let rest = raw.trim_start()[head.text.len()..].trim();
                title = Some(rest.to_string());
            }
            ".input" => {
                top_only(".input")?;
                if toks.len() < 2 {
                    return Err(ctx.syntax(
                        head.col + head.text.len(),
                        ".input expects at least one node",
                    ));
                }
                inputs.extend(toks[1..].iter().map(|&t| (ctx.line, node(t))));
            }
            ".probe" => {
                top_only(".probe")?;
                if toks.len() < 2 {
                    return Err(ctx.syntax(
                        head.col + head.text.len(),
                        ".probe expects at least one node",
                    ));
                }
                top.extend(
                    toks[1..]
                        .iter()
                        .map(|&t| (ctx.line, Device::Probe { node: node(t) })),
                );
            }
            ".subckt" => {
                top_only("nested .subckt")?;
                if toks.len() < 2 {
                    return Err(ctx.syntax(head.col + head.text.len(), ".subckt expects a name"));
                }
                let name = toks[1].text.to_string();
                if subckts.contains_key(&name) {
                    return Err(ctx.semantic(SemanticError::DuplicateId(name)));
                }
                open = Some(OpenSubckt {
                    name,
                    line: ctx.line,
                    body: Subckt::new(toks[2..].iter().map(|&t| node(t))),
                    lines: Vec::new(),
                });
            }
            ".ends" => {
                let Some(s) = open.take() else {
                    return Err(ctx.syntax(head.col, ".ends without .subckt"));
                };
                if let Some(t) = toks.get(1) {
                    if t.text != s.name {
                        return Err(ctx
                            .syntax(t.col, format!(".ends {} closes .subckt {}", t.text, s.name)));
                    }
                }
                subckts.insert(s.name, (s.line, s.body, s.lines));
            }
            ".end" => {
                top_only(".end")?;
                break;
            }
            _ => return Err(ctx.syntax(head.col, format!("unknown directive `{}`", head.text))),
        }
    }

    if let Some(s) = open {
        return Err(NetlistError::Syntax {
            line: s.line,
            col: 1,
            msg: format!(".subckt {} is never closed", s.name),
        });
    }

    let defs: BTreeMap<String, Subckt> = subckts
        .iter()
        .map(|(k, (_, s, _))| (k.clone(), s.clone()))
        .collect();
    let at = |line: usize| move |kind: SemanticError| NetlistError::Semantic { line, kind };

    for (name, (line, body, lines)) in &subckts {
        let mut ids = BTreeSet::new();
        for (d, &l) in body.devices.iter().zip(lines) {
            validate_device(d, &defs).map_err(at(l))?;
            if let Some(n) = d.name() {
                if !ids.insert(n.to_ascii_uppercase()) {
                    return Err(at(l)(SemanticError::DuplicateId(n.to_string())));
                }
            }
        }
        validate_subckt(name, body, &defs).map_err(at(*line))?;
    }
    if let Err(e) = subckt_order(&defs) {
        let line = match &e {
            SemanticError::RecursiveSubckt(n) => subckts.get(n).map_or(1, |(l, _, _)| *l),
            _ => 1,
        };
        return Err(at(line)(e));
    }

    let mut n = Netlist::new(title.unwrap_or_default());
    n.subckts = defs;
    let mut ids = BTreeSet::new();
    for (l, d) in &top {
        if matches!(d, Device::Probe { .. }) {
            continue;
        }
        validate_device(d, &n.subckts).map_err(at(*l))?;
        if let Some(name) = d.name() {
            if !ids.insert(name.to_ascii_uppercase()) {
                return Err(at(*l)(SemanticError::DuplicateId(name.to_string())));
            }
        }
    }
    let connected: BTreeSet<&str> = top
        .iter()
        .filter(|(_, d)| !matches!(d, Device::Probe { .. }))
        .flat_map(|(_, d)| d.nodes())
        .collect();
    for (l, d) in &top {
        if let Device::Probe { node } = d {
            if !connected.contains(node.as_str()) {
                return Err(at(*l)(SemanticError::UnknownNode(node.clone())));
            }
        }
    }
    for (_, d) in top {
        n.push(d);
    }
    for (l, name) in &inputs {
        if is_supply(name) {
            return Err(at(*l)(SemanticError::SupplyMisuse(name.clone())));
        }
        n.mark_input(name).map_err(at(*l))?;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devmodel::DeviceError;
    use crate::netlist::NodeKind;

    #[test]
    fn single_nfet() {
        let n = parse("MN1 out in GND nfet 19 0 3").unwrap();
        assert_eq!(n.devices.len(), 1);
        let Device::Cnfet(f) = &n.devices[0] else {
            panic!("not a fet")
        };
        assert_eq!(f.device.chirality(), Chirality::new(19, 0).unwrap());
        assert_eq!(f.device.tubes(), 3);
        assert_eq!(f.device.polarity(), Polarity::Nfet);
        assert_eq!(
            (f.drain.as_str(), f.gate.as_str(), f.source.as_str()),
            ("out", "in", "GND")
        );
    }

    #[test]
    fn capacitor_units() {
        let n = parse("C1 sum a 1f").unwrap();
        assert_eq!(
            n.devices[0],
            Device::Capacitor {
                name: "C1".into(),
                a: "sum".into(),
                b: "a".into(),
                farads: 1e-15
            }
        );
        assert_eq!(parse_value("2p"), Some(2e-12));
        assert_eq!(parse_value("3N"), Some(3e-9));
        assert_eq!(parse_value("4.5e-15"), Some(4.5e-15));
        assert_eq!(parse_value("f"), None);
    }

    #[test]
    fn metallic_is_semantic() {
        let err = parse("MN1 out in GND nfet 6 3 1").unwrap_err();
        assert_eq!(
            err,
            NetlistError::Semantic {
                line: 1,
                kind: SemanticError::Device {
                    name: "MN1".into(),
                    source: DeviceError::MetallicTube { n1: 6, n2: 3 }
                }
            }
        );
    }

    #[test]
    fn keywords_case_insensitive() {
        let text = ".TITLE inv\n.Input a\nmp1 y a vdd PFET 19 0 1\nMN1 y a gnd Nfet 19 0 1\n.PROBE y\n.END\n";
        let n = parse(text).unwrap();
        assert_eq!(n.name, "inv");
        assert_eq!(n.nodes["VDD"], NodeKind::SupplyVdd);
        assert_eq!(n.nodes["a"], NodeKind::Input);
        assert_eq!(n.nodes["y"], NodeKind::Output);
    }

    #[test]
    fn syntax_positions() {
        let err = parse("* header\n\nMN1 out in GND xfet 19 0 3\n").unwrap_err();
        assert_eq!(err.line(), Some(3));
        assert!(
            matches!(err, NetlistError::Syntax { col: 16, .. }),
            "{err:?}"
        );

        let err = parse("C1 a b\n").unwrap_err();
        assert!(matches!(err, NetlistError::Syntax { line: 1, .. }));

        let err = parse("C1 a b 1f extra\n").unwrap_err();
        assert!(matches!(
            err,
            NetlistError::Syntax {
                line: 1,
                col: 11,
                ..
            }
        ));

        let err = parse("  R1 a b 10\n").unwrap_err();
        assert!(matches!(
            err,
            NetlistError::Syntax {
                line: 1,
                col: 3,
                ..
            }
        ));

        let err = parse(".bogus\n").unwrap_err();
        assert!(matches!(
            err,
            NetlistError::Syntax {
                line: 1,
                col: 1,
                ..
            }
        ));
    }

    #[test]
    fn unknown_nodes_and_subckts() {
        let err = parse("C1 a b 1f\n.probe c\n").unwrap_err();
        assert_eq!(
            err,
            NetlistError::Semantic {
                line: 2,
                kind: SemanticError::UnknownNode("c".into())
            }
        );

        let err = parse("C1 a b 1f\n.input z\n").unwrap_err();
        assert_eq!(err.line(), Some(2));

        let err = parse("X1 a b nothing\n").unwrap_err();
        assert_eq!(
            err,
            NetlistError::Semantic {
                line: 1,
                kind: SemanticError::UnknownSubckt("nothing".into())
            }
        );
    }

    #[test]
    fn duplicates() {
        let err = parse("C1 a b 1f\nc1 a c 1f\n").unwrap_err();
        assert_eq!(
            err,
            NetlistError::Semantic {
                line: 2,
                kind: SemanticError::DuplicateId("c1".into())
            }
        );
    }

    #[test]
    fn subckt_forward_reference() {
        let text = "X1 a b buf\n.subckt buf i o\nC1 i o 1f\n.ends buf\n";
        let n = parse(text).unwrap();
        assert_eq!(n.subckts["buf"].ports, vec!["i", "o"]);
    }

    #[test]
    fn subckt_errors() {
        let err = parse(".subckt s a\nC1 a x 1f\n").unwrap_err();
        assert!(matches!(err, NetlistError::Syntax { line: 1, .. }));

        let err = parse(".subckt s a b\nC1 a x 1f\n.ends\n").unwrap_err();
        assert!(matches!(
            err,
            NetlistError::Semantic {
                line: 1,
                kind: SemanticError::DanglingPort { .. }
            }
        ));

        let err = parse(".subckt s a\nC1 a x 1f\n.probe a\n.ends\n").unwrap_err();
        assert!(matches!(err, NetlistError::Syntax { line: 3, .. }));

        let err = parse(".subckt s a\nX1 a s\n.ends\n").unwrap_err();
        assert_eq!(
            err,
            NetlistError::Semantic {
                line: 1,
                kind: SemanticError::RecursiveSubckt("s".into())
            }
        );

        let err = parse(".subckt s a\nC1 a x 1f\n.ends\nX1 a b s\n").unwrap_err();
        assert!(matches!(
            err,
            NetlistError::Semantic {
                line: 4,
                kind: SemanticError::PortCount { .. }
            }
        ));
    }

    #[test]
    fn lines_after_end_ignored() {
        let n = parse("C1 a b 1f\n.end\ngarbage here\n").unwrap();
        assert_eq!(n.devices.len(), 1);
    }

    #[test]
    fn invalid_utf8() {
        let err = parse_bytes(b"C1 a b 1f\nC2 \xff b 1f\n").unwrap_err();
        assert_eq!(
            err,
            NetlistError::Syntax {
                line: 2,
                col: 4,
                msg: "invalid UTF-8".into()
            }
        );
    }

    #[test]
    fn bad_capacitance() {
        let err = parse("C1 a b 0\n").unwrap_err();
        assert_eq!(
            err,
            NetlistError::Semantic {
                line: 1,
                kind: SemanticError::BadCapacitance("C1".into())
            }
        );
    }
}

use std::fmt::Write as _;

use super::{parse::parse_value, subckt_order, Device, Netlist};

/// Shortest text that parses back to exactly `farads`.
fn format_capacitance(farads: f64) -> String {
    let femto = farads / 1e-15;
    let short = format!("{femto}f");
    if parse_value(&short) == Some(farads) {
        short
    } else {
        format!("{farads:e}")
    }
}

fn write_device(out: &mut String, d: &Device) {
    // Writing to a String cannot fail.
    let _ = match d {
        Device::Cnfet(f) => {
            let c = f.device.chirality();
            writeln!(
                out,
                "{} {} {} {} {} {} {} {}",
                f.name,
                f.drain,
                f.gate,
                f.source,
                f.device.polarity().keyword(),
                c.n1(),
                c.n2(),
                f.device.tubes()
            )
        }
        Device::Capacitor { name, a, b, farads } => {
            writeln!(out, "{name} {a} {b} {}", format_capacitance(*farads))
        }
        Device::Source { name, node, volts } => writeln!(out, "{name} {node} {volts}"),
        Device::Probe { node } => writeln!(out, ".probe {node}"),
        Device::Instance {
            name,
            subckt,
            ports,
        } => {
            writeln!(out, "{name} {} {subckt}", ports.join(" "))
        }
    };
}

/// Canonical text form. Subcircuits come first, children before users.
pub fn serialize(n: &Netlist) -> String {
    let mut out = String::new();
    if n.name.is_empty() {
        out.push_str(".title\n");
    } else {
        let _ = writeln!(out, ".title {}", n.name);
    }
    let inputs = n.inputs();
    if !inputs.is_empty() {
        let _ = writeln!(out, ".input {}", inputs.join(" "));
    }
    let order =
        subckt_order(&n.subckts).unwrap_or_else(|_| n.subckts.keys().map(String::as_str).collect());
    for name in order {
        let s = &n.subckts[name];
        if s.ports.is_empty() {
            let _ = writeln!(out, ".subckt {name}");
        } else {
            let _ = writeln!(out, ".subckt {name} {}", s.ports.join(" "));
        }
        for d in &s.devices {
            write_device(&mut out, d);
        }
        let _ = writeln!(out, ".ends {name}");
    }
    for d in &n.devices {
        write_device(&mut out, d);
    }
    out.push_str(".end\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{parse, Subckt};

    #[test]
    fn empty_netlist() {
        assert_eq!(serialize(&Netlist::new("")), ".title\n.end\n");
        assert_eq!(serialize(&Netlist::new("x")), ".title x\n.end\n");
        assert_eq!(parse(".title\n.end\n").unwrap(), Netlist::new(""));
    }

    #[test]
    fn capacitance_text() {
        assert_eq!(format_capacitance(1e-15), "1f");
        assert_eq!(format_capacitance(2.5e-15), "2.5f");
        let odd = 1.2345678901234567e-13;
        assert_eq!(parse_value(&format_capacitance(odd)), Some(odd));
    }

    #[test]
    fn children_first() {
        let mut n = Netlist::new("h");
        let mut leaf = Subckt::new(["p"]);
        leaf.push(Device::Capacitor {
            name: "C1".into(),
            a: "p".into(),
            b: "GND".into(),
            farads: 1e-15,
        });
        let mut mid = Subckt::new(["q"]);
        mid.push(Device::Instance {
            name: "X1".into(),
            subckt: "zleaf".into(),
            ports: vec!["q".into()],
        });
        n.add_subckt("amid", mid).add_subckt("zleaf", leaf);
        n.push(Device::Instance {
            name: "Xtop".into(),
            subckt: "amid".into(),
            ports: vec!["w".into()],
        });
        let text = serialize(&n);
        let leaf_at = text.find(".subckt zleaf").unwrap();
        let mid_at = text.find(".subckt amid").unwrap();
        let use_at = text.find("Xtop").unwrap();
        assert!(leaf_at < mid_at && mid_at < use_at, "{text}");
        assert_eq!(parse(&text).unwrap(), n);
    }
}

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trisim::devmodel::{is_semiconducting, Chirality, CnfetInstance, Polarity};
use trisim::netlist::{Device, Fet, Netlist, Subckt};

const NODES: [&str; 8] = ["n0", "n1", "n2", "n3", "out", "mid", "VDD", "GND"];

fn chirality(rng: &mut ChaCha8Rng) -> Chirality {
    loop {
        let c = Chirality::new(rng.gen_range(1..40), rng.gen_range(0..20)).unwrap();
        if is_semiconducting(c) {
            return c;
        }
    }
}

fn fet(rng: &mut ChaCha8Rng, name: String, nodes: &[&str]) -> Device {
    let pol = if rng.gen_bool(0.5) {
        Polarity::Nfet
    } else {
        Polarity::Pfet
    };
    let device = CnfetInstance::new(pol, chirality(rng), rng.gen_range(1..8)).unwrap();
    let pick = |rng: &mut ChaCha8Rng| nodes.choose(rng).unwrap().to_string();
    Device::Cnfet(Fet {
        name,
        device,
        drain: pick(rng),
        gate: pick(rng),
        source: pick(rng),
    })
}

fn capacitance(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..3) {
        0 => f64::from(rng.gen_range(1..20)) * 1e-15,
        1 => f64::from(rng.gen_range(1..200)) * 0.5e-15,
        _ => rng.gen_range(1e-16..1e-12),
    }
}

/// A valid random netlist, reproducible from `seed`.
pub fn random_netlist(seed: u64) -> Netlist {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut n = Netlist::new(format!("gen{seed}"));
    let with_subckt = rng.gen_bool(0.5);
    if with_subckt {
        let mut s = Subckt::new(["p", "q"]);
        s.push(fet(&mut rng, "M1".into(), &["p", "q", "x", "GND"]));
        s.push(Device::Capacitor {
            name: "C1".into(),
            a: "p".into(),
            b: "q".into(),
            farads: 1e-15,
        });
        if rng.gen_bool(0.5) {
            s.push(fet(&mut rng, "M2".into(), &["p", "q", "x", "VDD"]));
        }
        n.add_subckt("cell", s);
    }
    for i in 0..rng.gen_range(1..12) {
        let d = match rng.gen_range(0..6) {
            0..=2 => fet(&mut rng, format!("M{i}"), &NODES),
            3 => {
                let a = NODES[..6].choose(&mut rng).unwrap().to_string();
                let b = NODES.choose(&mut rng).unwrap().to_string();
                Device::Capacitor {
                    name: format!("C{i}"),
                    a,
                    b,
                    farads: capacitance(&mut rng),
                }
            }
            4 => Device::Source {
                name: format!("V{i}"),
                node: "mid".into(),
                volts: f64::from(rng.gen_range(0..=20)) * 0.05,
            },
            _ if with_subckt => {
                let ports = (0..2)
                    .map(|_| NODES[..6].choose(&mut rng).unwrap().to_string())
                    .collect();
                Device::Instance {
                    name: format!("X{i}"),
                    subckt: "cell".into(),
                    ports,
                }
            }
            _ => fet(&mut rng, format!("M{i}"), &NODES),
        };
        n.push(d);
    }
    let internal: Vec<String> = n
        .nodes
        .keys()
        .filter(|k| !matches!(k.as_str(), "VDD" | "GND" | "mid"))
        .cloned()
        .collect();
    if let Some(p) = internal.choose(&mut rng) {
        n.probe(p);
    }
    if let Some(i) = internal.choose(&mut rng) {
        n.mark_input(i).unwrap();
    }
    n.validate().expect("generator builds valid netlists");
    n
}

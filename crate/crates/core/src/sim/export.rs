//! Waveform text formats.

use std::fmt::Write as _;

use super::{Level, SimConfig, Waveform};
use crate::ternary::{voltage_to_trit, VoltageMap};

/// `time_s,node,level_v,energy_j`, one row per event. Non-volt levels print as `x`/`z`.
pub fn waveform_csv(w: &Waveform) -> String {
    let mut out = String::from("time_s,node,level_v,energy_j\n");
    for e in &w.events {
        let _ = writeln!(out, "{:e},{},{},{:e}", e.time, e.node, e.new, e.energy);
    }
    out
}

fn vcd_id(mut i: usize) -> String {
    let mut id = String::new();
    loop {
        id.push((b'!' + (i % 94) as u8) as char);
        i /= 94;
        if i == 0 {
            return id;
        }
        i -= 1;
    }
}

fn vcd_value(level: Level, cfg: &SimConfig) -> char {
    match level {
        Level::X => 'x',
        Level::Z => 'z',
        Level::Volts(v) => {
            match VoltageMap::new(cfg.vdd).and_then(|m| voltage_to_trit(v, &m, cfg.tolerance())) {
                Ok(t) => char::from(b'0' + t.value()),
                Err(_) => 'x',
            }
        }
    }
}

/// VCD-style dump with ternary values `0`, `1`, `2`, `x`, `z` and a 1 fs timescale.
pub fn waveform_vcd(w: &Waveform, cfg: &SimConfig) -> String {
    let mut out = String::from("$timescale 1fs $end\n$scope module top $end\n");
    let ids: std::collections::BTreeMap<&str, String> = w
        .initial
        .keys()
        .enumerate()
        .map(|(i, n)| (n.as_str(), vcd_id(i)))
        .collect();
    for (name, id) in &ids {
        let _ = writeln!(out, "$var wire 1 {id} {name} $end");
    }
    out.push_str("$upscope $end\n$enddefinitions $end\n#0\n$dumpvars\n");
    for (name, level) in &w.initial {
        let _ = writeln!(out, "{}{}", vcd_value(*level, cfg), ids[name.as_str()]);
    }
    out.push_str("$end\n");
    let mut last: Option<u128> = None;
    for e in &w.events {
        let Some(id) = ids.get(e.node.as_str()) else {
            continue;
        };
        let t = (e.time * 1e15).round().max(0.0) as u128;
        if last != Some(t) {
            let _ = writeln!(out, "#{t}");
            last = Some(t);
        }
        let _ = writeln!(out, "{}{id}", vcd_value(e.new, cfg));
    }
    out
}

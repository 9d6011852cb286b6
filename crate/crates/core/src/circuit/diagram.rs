//! Plain-text circuit diagrams, one row per wire and one column per gate.

use super::{Circuit, GateKind};

fn cell_labels(kind: &GateKind) -> (String, String) {
    match kind {
        GateKind::CZ => ("●".into(), "Z".into()),
        GateKind::Cnot => ("●".into(), "⊕".into()),
        k => (k.name(), k.name()),
    }
}

fn pad(s: &str, width: usize, fill: char) -> String {
    let len = s.chars().count();
    let left = (width - len) / 2;
    let right = width - len - left;
    let mut out = String::new();
    out.extend(std::iter::repeat_n(fill, left));
    out.push_str(s);
    out.extend(std::iter::repeat_n(fill, right));
    out
}

/// Renders `circuit`; `names` labels the wires (defaults to `q0`, `q1`, …).
pub fn render(circuit: &Circuit, names: Option<&[&str]>) -> String {
    let n = circuit.qubits();
    let labels: Vec<String> = (0..n)
        .map(|w| {
            names
                .and_then(|v| v.get(w))
                .map(|s| s.to_string())
                .unwrap_or_else(|| format!("q{w}"))
        })
        .collect();
    let lw = labels.iter().map(|l| l.chars().count()).max().unwrap_or(0);
    let mut rows: Vec<String> = labels.iter().map(|l| format!("{l:>lw$}: ─")).collect();
    for g in circuit.gates() {
        let (first, second) = cell_labels(&g.kind);
        let width = first.chars().count().max(second.chars().count()) + 2;
        let (lo, hi) = match g.wires.as_slice() {
            [a, b] => (*a.min(b), *a.max(b)),
            [a] => (*a, *a),
            _ => continue,
        };
        for (w, row) in rows.iter_mut().enumerate() {
            let cell = if w == g.wires[0] {
                pad(&first, width, '─')
            } else if g.wires.len() == 2 && w == g.wires[1] {
                pad(&second, width, '─')
            } else if w > lo && w < hi {
                pad("┼", width, '─')
            } else {
                pad("", width, '─')
            };
            row.push_str(&cell);
            row.push('─');
        }
    }
    for m in circuit.measurements() {
        rows[m.wire].push_str(&format!(" M{}", m.basis.label()));
    }
    let mut out = rows.join("\n");
    if circuit.postselect() {
        if let Some(m) = circuit.measurements().first() {
            out.push_str(&format!("\npost-select outcome 0 on {}", labels[m.wire]));
        }
    }
    out.push('\n');
    out
}

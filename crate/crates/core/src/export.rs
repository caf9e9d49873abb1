//! File formats: JSON-lines event logs, DOT wait-for graphs, CSV result
//! tables and an aligned text rendering of the same table.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use crate::engine::TraceEvent;
use crate::error::{Error, Result};
use crate::stats::EstimateRow;
use crate::waitfor::WaitForGraph;

pub const CSV_HEADER: [&str; 8] = [
    "ordering",
    "variant",
    "runs",
    "mean_acks",
    "hw_acks",
    "mean_time",
    "hw_time",
    "deadlock_fraction",
];

impl From<io::Error> for Error {
    fn from(e: io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// One JSON object per line, in event order.
pub fn write_trace<W: Write>(mut w: W, events: &[TraceEvent]) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut w, e).map_err(|e| Error::Io(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: BufRead>(r: R) -> Result<Vec<TraceEvent>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("trace line {}: {e}", i + 1)))?;
        out.push(e);
    }
    Ok(out)
}

/// `n * n` controller nodes labeled `(x,y)`, one edge per wait. Edges on a
/// cycle are drawn red and listed in a comment per cycle.
pub fn wait_for_dot(n: usize, graph: &WaitForGraph) -> String {
    let id = |c: crate::Coord| format!("n{}_{}", c.x, c.y);
    let on_cycle = |u, v| {
        graph
            .cycles
            .iter()
            .any(|cy| (0..cy.len()).any(|i| cy[i] == u && cy[(i + 1) % cy.len()] == v))
    };
    let mut s = String::from("digraph waitfor {\n  node [shape=box];\n");
    for (k, cy) in graph.cycles.iter().enumerate() {
        let path: Vec<String> = cy
            .iter()
            .chain(cy.first())
            .map(ToString::to_string)
            .collect();
        let _ = writeln!(s, "  // cycle {}: {}", k + 1, path.join(" -> "));
    }
    for y in (0..n as u16).rev() {
        for x in 0..n as u16 {
            let c = crate::Coord::new(x, y);
            let _ = writeln!(s, "  {} [label=\"{c}\", pos=\"{x},{y}!\"];", id(c));
        }
    }
    for &(u, v) in &graph.edges {
        let attrs = if on_cycle(u, v) {
            " [color=red, penwidth=2, label=\"cycle\"]"
        } else {
            ""
        };
        let _ = writeln!(s, "  {} -> {}{attrs};", id(u), id(v));
    }
    s.push_str("}\n");
    s
}

fn fixed4(x: f64) -> String {
    format!("{x:.4}")
}

/// The value a row takes after a trip through the CSV format.
pub fn round4(x: f64) -> f64 {
    fixed4(x).parse().expect("formatted float parses")
}

impl EstimateRow {
    pub fn rounded(&self) -> Self {
        Self {
            mean_acks: round4(self.mean_acks),
            hw_acks: round4(self.hw_acks),
            mean_time: round4(self.mean_time),
            hw_time: round4(self.hw_time),
            deadlock_fraction: round4(self.deadlock_fraction),
            ..*self
        }
    }
}

pub fn write_csv<W: Write>(w: W, rows: &[EstimateRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in rows {
        out.write_record([
            r.ordering.to_string(),
            r.variant.to_string(),
            r.runs.to_string(),
            fixed4(r.mean_acks),
            fixed4(r.hw_acks),
            fixed4(r.mean_time),
            fixed4(r.hw_time),
            fixed4(r.deadlock_fraction),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: io::Read>(r: R) -> Result<Vec<EstimateRow>> {
    let mut input = csv::Reader::from_reader(r);
    let header = input.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse(format!(
            "unexpected CSV header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in input.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |k: usize| {
            rec.get(k)
                .ok_or_else(|| Error::Parse(format!("CSV line {line}: missing field {k}")))
        };
        let num = |k: usize| -> Result<f64> {
            field(k)?.parse().map_err(|_| {
                Error::Parse(format!("CSV line {line}: bad number in {}", CSV_HEADER[k]))
            })
        };
        rows.push(EstimateRow {
            ordering: field(0)?.parse()?,
            variant: field(1)?.parse()?,
            runs: field(2)?
                .parse()
                .map_err(|_| Error::Parse(format!("CSV line {line}: bad runs")))?,
            mean_acks: num(3)?,
            hw_acks: num(4)?,
            mean_time: num(5)?,
            hw_time: num(6)?,
            deadlock_fraction: num(7)?,
        });
    }
    Ok(rows)
}

/// Aligned table; a trailing `*` marks cells where some run deadlocked.
pub fn render_table(rows: &[EstimateRow]) -> String {
    let cells: Vec<[String; 5]> = rows
        .iter()
        .map(|r| {
            [
                r.ordering.to_string(),
                r.variant.to_string(),
                format!("{:.2} ± {:.2}", r.mean_acks, r.hw_acks),
                format!("{:.2} ± {:.2}", r.mean_time, r.hw_time),
                format!(
                    "{:.4}{}",
                    r.deadlock_fraction,
                    if r.has_deadlocks() { " *" } else { "" }
                ),
            ]
        })
        .collect();
    let head = ["ordering", "variant", "acks", "time", "deadlock"];
    let mut width = head.map(|h| h.chars().count());
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |fields: &[&str]| {
        let mut s = String::new();
        for (k, (f, w)) in fields.iter().zip(width).enumerate() {
            if k > 0 {
                s.push_str("  ");
            }
            let pad = w - f.chars().count();
            s.push_str(f);
            if k + 1 < fields.len() {
                s.extend(std::iter::repeat_n(' ', pad));
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(&head);
    for row in &cells {
        out.push_str(&line(&row.each_ref().map(String::as_str)));
    }
    out
}

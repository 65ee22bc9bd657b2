use liesys::numerics::{fmt_e12, Event};

/// Result of one run: a CSV table or report lines, plus an exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub body: Body,
    pub status: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Table(Table),
    Lines(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// `(t, kind)` events, written after the rows.
    pub events: Vec<(f64, String)>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn add_events(&mut self, events: &[Event<f64>]) {
        self.events.extend(events.iter().map(|e| (e.t, e.kind.to_string())));
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_e12(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for (t, kind) in &self.events {
            out.push_str(&format!("# event,{},{kind}\n", fmt_e12(*t)));
        }
        out
    }
}

impl Output {
    pub fn table(t: Table) -> Self {
        Output {
            body: Body::Table(t),
            status: 0,
        }
    }

    pub fn render(&self) -> String {
        match &self.body {
            Body::Table(t) => t.render(),
            Body::Lines(lines) => lines.iter().map(|l| format!("{l}\n")).collect(),
        }
    }
}

/// Joins sweep outputs in parameter order, tagging each with its value.
pub fn merge(name: &str, runs: Vec<(f64, Output)>) -> Output {
    let status = runs.iter().map(|(_, o)| o.status).max().unwrap_or(0);
    let tables = runs.iter().all(|(_, o)| matches!(o.body, Body::Table(_)));
    if tables {
        let mut merged = Table::default();
        for (v, o) in runs {
            let Body::Table(t) = o.body else { unreachable!() };
            if merged.header.is_empty() {
                merged.header = std::iter::once(name.to_string()).chain(t.header).collect();
            }
            merged
                .rows
                .extend(t.rows.into_iter().map(|r| std::iter::once(v).chain(r).collect()));
            merged.events.extend(
                t.events
                    .into_iter()
                    .map(|(t, k)| (t, format!("{k},{name}={}", fmt_e12(v)))),
            );
        }
        return Output {
            body: Body::Table(merged),
            status,
        };
    }
    let mut lines = Vec::new();
    for (v, o) in runs {
        let prefix = format!("{name}={}", fmt_e12(v));
        match o.body {
            Body::Lines(ls) => lines.extend(ls.into_iter().map(|l| format!("{prefix} {l}"))),
            Body::Table(t) => lines.extend(t.render().lines().map(|l| format!("{prefix} {l}"))),
        }
    }
    Output {
        body: Body::Lines(lines),
        status,
    }
}

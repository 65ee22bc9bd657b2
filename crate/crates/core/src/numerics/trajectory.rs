use std::fmt::{self, Write as _};

use super::NumericError;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    BlowUp,
    ChartSwitch,
    /// The state left the region where the right-hand side is defined.
    Domain,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::BlowUp => "blow_up",
            EventKind::ChartSwitch => "chart_switch",
            EventKind::Domain => "domain",
        }
    }

    pub fn from_name(s: &str) -> Option<EventKind> {
        match s {
            "blow_up" => Some(EventKind::BlowUp),
            "chart_switch" => Some(EventKind::ChartSwitch),
            "domain" => Some(EventKind::Domain),
            _ => None,
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event<T> {
    pub t: T,
    pub kind: EventKind,
}

/// Sampled solution: strictly increasing times, one state row per time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    times: Vec<T>,
    dim: usize,
    data: Vec<T>,
    events: Vec<Event<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(dim: usize) -> Self {
        Trajectory {
            times: Vec::new(),
            dim,
            data: Vec::new(),
            events: Vec::new(),
        }
    }

    /// Appends a sample. Panics if the dimension is wrong or time does not
    /// increase.
    pub fn push(&mut self, t: T, state: &[T]) {
        assert_eq!(state.len(), self.dim, "state dimension mismatch");
        if let Some(&last) = self.times.last() {
            assert!(t > last, "trajectory times must increase");
        }
        self.times.push(t);
        self.data.extend_from_slice(state);
    }

    pub fn push_event(&mut self, t: T, kind: EventKind) {
        self.events.push(Event { t, kind });
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn state(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.dim.max(1)).take(self.times.len())
    }

    pub fn component(&self, k: usize) -> Vec<T> {
        self.states().map(|s| s[k]).collect()
    }

    pub fn events(&self) -> &[Event<T>] {
        &self.events
    }

    pub fn last(&self) -> Option<(T, &[T])> {
        let n = self.len();
        (n > 0).then(|| (self.times[n - 1], self.state(n - 1)))
    }

    /// CSV with header `t,s0,s1,...`, followed by any extra named columns.
    pub fn to_csv(&self) -> String {
        self.to_csv_with(&[])
    }

    /// Like [`Trajectory::to_csv`], appending `extra` columns; each column
    /// must have one value per sample.
    pub fn to_csv_with(&self, extra: &[(&str, &[T])]) -> String {
        let mut out = String::from("t");
        for k in 0..self.dim {
            let _ = write!(out, ",s{k}");
        }
        for (name, col) in extra {
            assert_eq!(col.len(), self.len(), "extra column `{name}` has wrong length");
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, s) in self.states().enumerate() {
            out.push_str(&fmt_e12(self.times[i].as_f64()));
            for v in s {
                out.push(',');
                out.push_str(&fmt_e12(v.as_f64()));
            }
            for (_, col) in extra {
                out.push(',');
                out.push_str(&fmt_e12(col[i].as_f64()));
            }
            out.push('\n');
        }
        for ev in &self.events {
            let _ = writeln!(out, "# event,{},{}", fmt_e12(ev.t.as_f64()), ev.kind);
        }
        out
    }

    /// Reads back the output of [`Trajectory::to_csv`]. Columns after the
    /// state are ignored when `dim` is given.
    pub fn from_csv(text: &str, dim: Option<usize>) -> Result<Self, NumericError> {
        let csv_err = |line: usize, message: String| NumericError::Csv { line, message };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| csv_err(1, "empty input".into()))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.first() != Some(&"t") {
            return Err(csv_err(1, "header must start with `t`".into()));
        }
        let state_cols = cols[1..].iter().take_while(|c| c.starts_with('s')).count();
        let dim = dim.unwrap_or(state_cols);
        if dim > cols.len() - 1 {
            return Err(csv_err(1, format!("expected at least {dim} state columns")));
        }
        let mut traj = Trajectory::new(dim);
        let mut row = Vec::with_capacity(dim);
        for (i, line) in lines {
            let lineno = i + 1;
            if let Some(rest) = line.strip_prefix("# event,") {
                let (t, kind) = rest
                    .split_once(',')
                    .ok_or_else(|| csv_err(lineno, "malformed event".into()))?;
                let t: f64 = t
                    .trim()
                    .parse()
                    .map_err(|_| csv_err(lineno, format!("bad time `{t}`")))?;
                let kind = EventKind::from_name(kind.trim())
                    .ok_or_else(|| csv_err(lineno, format!("unknown event `{kind}`")))?;
                traj.push_event(T::lit(t), kind);
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| csv_err(lineno, e.to_string()))?;
            if fields.len() != cols.len() {
                return Err(csv_err(lineno, format!("expected {} fields", cols.len())));
            }
            row.clear();
            row.extend(fields[1..=dim].iter().map(|&v| T::lit(v)));
            let t = T::lit(fields[0]);
            if traj.times.last().is_some_and(|&last| !(t > last)) {
                return Err(csv_err(lineno, "times must increase".into()));
            }
            traj.push(t, &row);
        }
        Ok(traj)
    }
}

/// Formats like C's `%.12e`: twelve mantissa digits, signed exponent with at
/// least two digits.
pub fn fmt_e12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printf_style_numbers() {
        assert_eq!(fmt_e12(1.0), "1.000000000000e+00");
        assert_eq!(fmt_e12(-0.00123), "-1.230000000000e-03");
        assert_eq!(fmt_e12(6.02e123), "6.020000000000e+123");
        assert_eq!(fmt_e12(0.0), "0.000000000000e+00");
        assert_eq!(fmt_e12(f64::INFINITY), "inf");
        assert_eq!(fmt_e12(f64::NAN), "nan");
    }

    #[test]
    fn csv_round_trip() {
        let mut tr = Trajectory::new(2);
        tr.push(0.0, &[1.0, -2.5]);
        tr.push(0.5, &[f64::INFINITY, 3.25e-7]);
        tr.push_event(0.4, EventKind::ChartSwitch);
        let inv = [7.0, 8.0];
        let text = tr.to_csv_with(&[("psi", &inv)]);
        assert!(text.starts_with("t,s0,s1,psi\n0.000000000000e+00,1.000000000000e+00,"));
        assert!(text.ends_with("# event,4.000000000000e-01,chart_switch\n"));
        let back = Trajectory::<f64>::from_csv(&text, None).unwrap();
        assert_eq!(back, tr);
    }

    #[test]
    #[should_panic]
    fn times_must_increase() {
        let mut tr = Trajectory::new(1);
        tr.push(1.0, &[0.0]);
        tr.push(1.0, &[0.0]);
    }
}

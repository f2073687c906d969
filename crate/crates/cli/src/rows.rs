//! Result rows and the CSV report.

use std::io::Write;

pub const HEADER: [&str; 6] = ["check_id", "parameters", "value", "bound", "order_estimate", "pass"];

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub check_id: String,
    /// `key=value` pairs joined by `;`, empty when the check has none.
    pub parameters: String,
    pub value: f64,
    /// Human-readable acceptance condition, e.g. `<1e-8` or `2^2±20%`.
    pub bound: String,
    pub order_estimate: Option<f64>,
    pub pass: bool,
}

impl Row {
    /// Passes when `|value| < limit`.
    pub fn below(id: impl Into<String>, parameters: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            check_id: id.into(),
            parameters: parameters.into(),
            value,
            bound: format!("<{}", fmt_num(limit)),
            order_estimate: None,
            pass: value.abs() < limit,
        }
    }

    /// Passes when `|value - target| < tol`.
    pub fn near(id: impl Into<String>, parameters: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self {
            check_id: id.into(),
            parameters: parameters.into(),
            value,
            bound: format!("tol={}", fmt_num(tol)),
            order_estimate: None,
            pass: (value - target).abs() < tol,
        }
    }

    pub fn flag(id: impl Into<String>, parameters: impl Into<String>, value: f64, bound: impl Into<String>, pass: bool) -> Self {
        Self {
            check_id: id.into(),
            parameters: parameters.into(),
            value,
            bound: bound.into(),
            order_estimate: None,
            pass: pass && !value.is_nan(),
        }
    }

    /// A check that could not be evaluated.
    pub fn error(id: impl Into<String>, parameters: impl Into<String>, message: impl std::fmt::Display) -> Self {
        Self::flag(id, parameters, f64::NAN, format!("error: {message}"), false)
    }

    pub fn with_order(mut self, order: f64) -> Self {
        self.order_estimate = Some(order);
        self
    }
}

/// Shortest round-trip form of `v` after rounding to 10 significant digits,
/// so last-bit noise does not reach the report.
pub fn fmt_num(v: f64) -> String {
    if !v.is_finite() || v == 0.0 {
        return format!("{v:?}");
    }
    let rounded: f64 = format!("{v:.9e}").parse().unwrap_or(v);
    format!("{rounded:?}")
}

/// Sorts by `check_id`, then `parameters`; ties keep their input order.
pub fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(|a, b| (&a.check_id, &a.parameters).cmp(&(&b.check_id, &b.parameters)));
}

pub fn failures(rows: &[Row]) -> usize {
    rows.iter().filter(|r| !r.pass).count()
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        let order = r.order_estimate.map(fmt_num).unwrap_or_default();
        w.write_record([
            r.check_id.as_str(),
            r.parameters.as_str(),
            &fmt_num(r.value),
            &r.bound,
            &order,
            if r.pass { "pass" } else { "fail" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(1.0 + 3e-15), "1.0");
        assert_eq!(fmt_num(1e-10), "1e-10");
        assert_eq!(fmt_num(-0.25), "-0.25");
        assert_eq!(fmt_num(f64::NAN), "NaN");
        assert_eq!(fmt_num(0.0), "0.0");
    }

    #[test]
    fn csv_layout() {
        let mut rows = vec![
            Row::below("b", "a=1", 0.5, 1.0).with_order(2.01),
            Row::near("I1", "", 1.0 - 1e-15, 1.0, 1e-10),
            Row::error("a", "", "bad, input"),
        ];
        sort_rows(&mut rows);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "check_id,parameters,value,bound,order_estimate,pass");
        assert_eq!(lines[1], "I1,,1.0,tol=1e-10,,pass");
        assert_eq!(lines[2], "a,,NaN,\"error: bad, input\",,fail");
        assert_eq!(lines[3], "b,a=1,0.5,<1.0,2.01,pass");
        assert_eq!(failures(&rows), 1);
    }
}

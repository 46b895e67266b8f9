//! Checklists for acceptance criteria that print one verdict line each.

use std::fmt::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};

#[derive(Debug, Clone)]
struct Item {
    text: String,
    pass: bool,
}

/// Named comparisons collected for one criterion.
#[derive(Debug, Default)]
pub struct Checklist {
    items: Vec<Item>,
}

impl Checklist {
    /// `value` within `tol` of `target`.
    pub fn near(&mut self, label: &str, value: f64, target: f64, tol: f64) {
        let pass = (value - target).abs() <= tol;
        self.items.push(Item { text: format!("{label} {} ({} ± {})", short(value), short(target), short(tol)), pass });
    }

    /// `value` strictly below `limit`.
    pub fn below(&mut self, label: &str, value: f64, limit: f64) {
        let pass = value < limit;
        self.items.push(Item { text: format!("{label} {} (< {})", short(value), short(limit)), pass });
    }

    pub fn holds(&mut self, label: &str, pass: bool) {
        self.items.push(Item { text: label.to_string(), pass });
    }

    pub fn passed(&self) -> bool {
        !self.items.is_empty() && self.items.iter().all(|i| i.pass)
    }

    /// Failing items first, then the rest.
    pub fn detail(&self) -> String {
        let mut out = String::new();
        let (bad, good): (Vec<&Item>, Vec<&Item>) = self.items.iter().partition(|i| !i.pass);
        for (i, item) in bad.iter().chain(good.iter()).enumerate() {
            if i > 0 {
                out.push_str("; ");
            }
            if !item.pass {
                out.push_str("MISS ");
            }
            let _ = write!(out, "{}", item.text);
        }
        out
    }
}

fn short(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e6) {
        format!("{x:.3e}")
    } else {
        let s = format!("{x:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

/// One acceptance criterion.
pub struct Criterion {
    pub number: u32,
    pub title: &'static str,
    pub check: fn(&mut Checklist) -> Result<(), String>,
}

/// Runs every criterion, prints one line each, and returns the number that failed.
pub fn run_all(criteria: &[Criterion]) -> usize {
    let mut failed = 0;
    for c in criteria {
        let mut list = Checklist::default();
        let outcome = catch_unwind(AssertUnwindSafe(|| (c.check)(&mut list)));
        let (pass, detail) = match outcome {
            Ok(Ok(())) => (list.passed(), list.detail()),
            Ok(Err(e)) => (false, format!("error: {e}; {}", list.detail())),
            Err(_) => (false, format!("panicked; {}", list.detail())),
        };
        if !pass {
            failed += 1;
        }
        println!("criterion {:>2} {}: {}  {}", c.number, c.title, if pass { "PASS" } else { "FAIL" }, detail);
    }
    println!("{}/{} criteria pass", criteria.len() - failed, criteria.len());
    failed
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_list_does_not_pass() {
        assert!(!Checklist::default().passed());
    }

    #[test]
    fn failures_lead_the_detail() {
        let mut l = Checklist::default();
        l.near("a", 1.0, 1.0, 0.1);
        l.near("b", 2.0, 1.0, 0.1);
        assert!(!l.passed());
        assert!(l.detail().starts_with("MISS b 2"));
    }

    #[test]
    fn short_numbers() {
        assert_eq!(short(90.0), "90");
        assert_eq!(short(6.91928), "6.9193");
        assert_eq!(short(5e-5), "5.000e-5");
    }
}

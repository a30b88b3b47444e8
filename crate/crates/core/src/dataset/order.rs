//! Canonical ordering of category values.
//!
//! Numbers sort numerically, English day names sort Monday..Sunday, and any
//! other text sorts lexicographically. Each value is mapped to a key first so
//! mixed columns still get a total order (numbers, then days, then text).

use std::cmp::Ordering;

use crate::temporal::DayName;

use super::parse_number;

#[derive(Debug, PartialEq)]
enum OrderKey<'a> {
    Number(f64),
    Day(u8),
    Text(&'a str),
}

impl OrderKey<'_> {
    fn rank(&self) -> u8 {
        match self {
            OrderKey::Number(_) => 0,
            OrderKey::Day(_) => 1,
            OrderKey::Text(_) => 2,
        }
    }
}

fn key(s: &str) -> OrderKey<'_> {
    if let Some(v) = parse_number(s) {
        return OrderKey::Number(v);
    }
    if let Ok(d) = s.parse::<DayName>() {
        return OrderKey::Day(d.index());
    }
    OrderKey::Text(s)
}

/// Total order used for every category list, legend and table header.
pub fn canonical_cmp(a: &str, b: &str) -> Ordering {
    let (ka, kb) = (key(a), key(b));
    match (&ka, &kb) {
        (OrderKey::Number(x), OrderKey::Number(y)) => x.total_cmp(y).then_with(|| a.cmp(b)),
        (OrderKey::Day(x), OrderKey::Day(y)) => x.cmp(y),
        (OrderKey::Text(x), OrderKey::Text(y)) => x.cmp(y),
        _ => ka.rank().cmp(&kb.rank()),
    }
}

pub fn sort_canonical(values: &mut [String]) {
    values.sort_by(|a, b| canonical_cmp(a, b));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(v: &[&str]) -> Vec<String> {
        let mut v: Vec<String> = v.iter().map(|s| s.to_string()).collect();
        sort_canonical(&mut v);
        v
    }

    #[test]
    fn numbers_sort_numerically() {
        assert_eq!(sorted(&["10", "9", "2", "-1"]), ["-1", "2", "9", "10"]);
    }

    #[test]
    fn day_names_follow_the_week() {
        assert_eq!(
            sorted(&["Sunday", "Monday", "Friday", "Wednesday"]),
            ["Monday", "Wednesday", "Friday", "Sunday"]
        );
    }

    #[test]
    fn text_is_lexicographic() {
        assert_eq!(sorted(&["WB", "EB", "SB", "NB"]), ["EB", "NB", "SB", "WB"]);
    }

    #[test]
    fn mixed_values_have_a_total_order() {
        // the classic intransitive trap for per-pair numeric/lexicographic mixing
        let v = sorted(&["10", "1a", "2", "Monday"]);
        assert_eq!(v, ["2", "10", "Monday", "1a"]);
    }
}

//! Prior-knowledge dictionaries built from repeated Lie derivatives.
//!
//! Starting from the state coordinates, each observable is differentiated
//! along the unforced vector field and the terms of the result that are not
//! yet in the dictionary are appended (within one derivative in descending
//! lexicographic order of their exponent tuples). The queue is processed
//! breadth first until the requested size is reached. For the pendulum this
//! yields `x1, x2, sin x1, cos(x1) x2, ...` and for the Duffing oscillator
//! `x1, x2, x1^3, x1^2 x2, x1^5, x1 x2^2, ...`.

use std::collections::BTreeMap;

use crate::{Error, Result};

/// Term of the pendulum family `sin(x1)^a cos(x1)^b x2^c`.
///
/// `cos^2` is rewritten as `1 - sin^2`, so `b` is 0 or 1 and the family is
/// linearly independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum PendulumTerm {
    Angle,
    Trig { sin: u32, cos: u32, vel: u32 },
}

type TrigKey = (u32, u32, u32);

fn add_trig(out: &mut BTreeMap<TrigKey, f64>, (a, b, c): TrigKey, coeff: f64) {
    // cos^b with b >= 2: cos^2 = 1 - sin^2
    if b >= 2 {
        add_trig(out, (a, b - 2, c), coeff);
        add_trig(out, (a + 2, b - 2, c), -coeff);
        return;
    }
    *out.entry((a, b, c)).or_insert(0.0) += coeff;
}

/// Lie derivative along `(x2, -sin x1 - d x2)`.
fn pendulum_lie(term: PendulumTerm, damping: f64) -> BTreeMap<TrigKey, f64> {
    let mut out = BTreeMap::new();
    match term {
        PendulumTerm::Angle => add_trig(&mut out, (0, 0, 1), 1.0),
        PendulumTerm::Trig { sin: a, cos: b, vel: c } => {
            if a > 0 {
                add_trig(&mut out, (a - 1, b + 1, c + 1), a as f64);
            }
            if b > 0 {
                add_trig(&mut out, (a + 1, b - 1, c + 1), -(b as f64));
            }
            if c > 0 {
                add_trig(&mut out, (a + 1, b, c - 1), -(c as f64));
                add_trig(&mut out, (a, b, c), -damping * c as f64);
            }
        }
    }
    out.retain(|_, v| *v != 0.0);
    out
}

fn closure<T, F>(size: usize, start: Vec<T>, mut derive: F) -> Result<Vec<T>>
where
    T: Copy + Ord,
    F: FnMut(T) -> Vec<T>,
{
    let mut list = start;
    let mut head = 0;
    while list.len() < size {
        let Some(&term) = list.get(head) else {
            return Err(Error::InvalidArgument(format!(
                "derivative closure stops at {} observables, {size} requested",
                list.len()
            )));
        };
        let mut fresh: Vec<T> = derive(term)
            .into_iter()
            .filter(|t| !list.contains(t))
            .collect();
        fresh.sort_by(|p, q| q.cmp(p));
        fresh.dedup();
        list.extend(fresh);
        head += 1;
    }
    list.truncate(size);
    Ok(list)
}

pub(crate) fn pendulum_terms(size: usize, damping: f64) -> Result<Vec<PendulumTerm>> {
    let start = vec![
        PendulumTerm::Angle,
        PendulumTerm::Trig { sin: 0, cos: 0, vel: 1 },
    ];
    closure(size, start, |t| {
        pendulum_lie(t, damping)
            .into_keys()
            .map(|(a, b, c)| PendulumTerm::Trig { sin: a, cos: b, vel: c })
            .collect()
    })
}

/// Lie derivative of `x1^a x2^b` along `(x2, x1 - x1^3 - δ x2)`.
fn duffing_lie((a, b): (u32, u32), damping: f64) -> BTreeMap<(u32, u32), f64> {
    let mut out = BTreeMap::new();
    let mut add = |k: (u32, u32), v: f64| *out.entry(k).or_insert(0.0) += v;
    if a > 0 {
        add((a - 1, b + 1), a as f64);
    }
    if b > 0 {
        add((a + 1, b - 1), b as f64);
        add((a + 3, b - 1), -(b as f64));
        add((a, b), -damping * b as f64);
    }
    out.retain(|_, v| *v != 0.0);
    out
}

pub(crate) fn duffing_terms(size: usize, damping: f64) -> Result<Vec<(u32, u32)>> {
    closure(size, vec![(1, 0), (0, 1)], |t| {
        duffing_lie(t, damping).into_keys().collect()
    })
}

/// Monomials of total degree >= 1 in `n` variables, by ascending degree and
/// then descending lexicographic exponent order (so `x1, ..., xn` lead).
pub(crate) fn polynomial_terms(size: usize, n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::with_capacity(size);
    let mut degree = 1u32;
    while out.len() < size && n > 0 {
        let mut level = Vec::new();
        compositions(n, degree, &mut Vec::with_capacity(n), &mut level);
        level.sort_by(|p, q| q.cmp(p));
        out.extend(level);
        degree += 1;
    }
    out.truncate(size);
    out
}

fn compositions(n: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == n {
        prefix.push(remaining);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in 0..=remaining {
        prefix.push(k);
        compositions(n, remaining - k, prefix, out);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trig(a: u32, b: u32, c: u32) -> PendulumTerm {
        PendulumTerm::Trig { sin: a, cos: b, vel: c }
    }

    #[test]
    fn pendulum_prefix() {
        let t = pendulum_terms(6, 0.05).unwrap();
        assert_eq!(
            t,
            vec![
                PendulumTerm::Angle,
                trig(0, 0, 1),
                trig(1, 0, 0),
                trig(0, 1, 1),
                trig(1, 1, 0),
                trig(1, 0, 2)
            ]
        );
    }

    #[test]
    fn pendulum_cos_power_stays_below_two() {
        let t = pendulum_terms(40, 0.05).unwrap();
        assert_eq!(t.len(), 40);
        for term in t {
            if let PendulumTerm::Trig { sin, cos, vel } = term {
                assert!(cos <= 1);
                assert!(sin + vel >= 1);
            }
        }
    }

    #[test]
    fn duffing_prefix() {
        let t = duffing_terms(8, 0.1).unwrap();
        assert_eq!(t, vec![(1, 0), (0, 1), (3, 0), (2, 1), (5, 0), (1, 2), (4, 1), (0, 3)]);
        // odd total degree throughout: the drift is odd
        for (a, b) in duffing_terms(20, 0.1).unwrap() {
            assert_eq!((a + b) % 2, 1);
        }
    }

    #[test]
    fn polynomial_order() {
        let t = polynomial_terms(5, 2);
        assert_eq!(t, vec![vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
        let t = polynomial_terms(4, 3);
        assert_eq!(t[..3], [vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(t[3], vec![2, 0, 0]);
    }
}

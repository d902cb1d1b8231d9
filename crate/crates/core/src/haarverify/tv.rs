use num_traits::{FromPrimitive, Num, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::Rational;

const MAX_T: usize = 4;
const MAX_D: usize = 64;

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Integer partitions of `n` into at most `max_parts` parts, each listed in
/// non-increasing order.
fn partitions(n: usize, max_parts: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, cap: usize, max_parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        if cur.len() == max_parts {
            return;
        }
        for part in (1..=cap.min(rest)).rev() {
            cur.push(part);
            go(rest - part, part, max_parts, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, max_parts, &mut Vec::new(), &mut out);
    out
}

/// Number of tuples in `[d]^T` whose multiset of outcome multiplicities is
/// `parts`.
fn class_size(parts: &[usize], d: usize) -> u64 {
    let t: usize = parts.iter().sum();
    let arrangements = factorial(t) / parts.iter().map(|&m| factorial(m)).product::<u64>();
    let k = parts.len();
    let labelings: u64 = (0..k).map(|i| (d - i) as u64).product();
    let mut repeat = 1u64;
    let mut i = 0;
    while i < k {
        let j = (i..k).take_while(|&j| parts[j] == parts[i]).count();
        repeat *= factorial(j);
        i += j;
    }
    arrangements * labelings / repeat
}

fn check_args(d: usize, t: usize) -> Result<()> {
    if d == 0 || t == 0 {
        return Err(Error::InvalidParameter(format!("need d, T >= 1, got d = {d}, T = {t}")));
    }
    if t > MAX_T || d > MAX_D {
        return Err(Error::Resource(format!(
            "exact enumeration is limited to T <= {MAX_T}, d <= {MAX_D}, got T = {t}, d = {d}"
        )));
    }
    Ok(())
}

/// Total variation between the uniform law on `[d]^T` and the Haar average
/// of `T` i.i.d. outcomes of a fixed-input projective measurement, in any
/// signed field (`f64` or [`Rational`]).
///
/// A tuple with multiplicities `m_x` has Haar probability
/// `Π m_x! · (d−1)!/(d+T−1)!`; tuples are grouped by multiplicity class.
pub fn tv_iid_value<S>(d: usize, t: usize) -> Result<S>
where
    S: Num + Signed + FromPrimitive + Clone,
{
    check_args(d, t)?;
    let int = |n: u64| S::from_u64(n).expect("small integers are representable");
    let rising: u64 = (0..t).map(|k| (d + k) as u64).product();
    let uniform = S::one() / int((d as u64).pow(t as u32));
    let mut total = S::zero();
    for parts in partitions(t, d) {
        let weight = parts.iter().map(|&m| factorial(m)).product::<u64>();
        let haar = int(weight) / int(rising);
        total = total + int(class_size(&parts, d)) * (haar - uniform.clone()).abs();
    }
    Ok(total / int(2))
}

pub fn tv_iid_exact(d: usize, t: usize) -> Result<Rational> {
    tv_iid_value(d, t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TvReport {
    pub d: usize,
    pub t: usize,
    pub tv: f64,
    /// `3T²/(2d)`.
    pub bound: f64,
    pub holds: bool,
}

pub fn tv_iid_protocol(d: usize, t: usize) -> Result<TvReport> {
    let tv: f64 = tv_iid_value(d, t)?;
    let bound = 3.0 * (t * t) as f64 / (2.0 * d as f64);
    Ok(TvReport {
        d,
        t,
        tv,
        bound,
        holds: (0.0..=1.0).contains(&tv) && tv <= bound,
    })
}

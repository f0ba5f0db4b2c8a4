//! Explicit families showing that the quintic-type lower bound fails for `N >= 4`.
//!
//! The tuples keep `|k_N|` far above the other entries and `k_{1..N-1} = 1`, yet
//! `|Phi^(N)| / (|k_{1..N-1}| |k_N|^4)` decays like `n^{-2}` (`N = 4`) and `n^{-4}` (`N = 5`).

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::sampling::big_f64;
use super::{anchor_of, CertificationReport, CertifyOptions};
use crate::error::{Error, Result};
use crate::phase::mismatch_bigint_scaled;

/// `g = 2 gamma e1 = 2` (`gamma = 2`, `e1 = 1/2`) unless overridden.
pub const DEFAULT_G: (i64, i64) = (2, 1);

pub(crate) fn catalog() -> Vec<(&'static str, String)> {
    vec![
        (
            "counterexample-quartic",
            "k = (-n^4 + 1, -n^6, n^6 + n^4, n^7): k123 = 1, |k4| >> max_{j<=3} |k_j|, and \
             |Phi^(4)| / (|k123| |k4|^4) ~ 10 n^{-2} -> 0"
                .into(),
        ),
        (
            "counterexample-quintic",
            "k = (n^5, -n^5 - n^4 + 1, -n^8, n^8 + n^4, n^9): k1234 = 1, |k5| >> max_{j<=4} |k_j|, and \
             |Phi^(5)| / (|k1234| |k5|^4) ~ c n^{-4} -> 0"
                .into(),
        ),
    ]
}

/// The counterexample tuple of arity `N` in {4, 5} at parameter `n`.
pub fn counterexample_tuple(arity: usize, n: i64) -> Result<Vec<i64>> {
    let p = |e: u32| {
        n.checked_pow(e)
            .ok_or_else(|| Error::InvalidConfig(format!("n = {n} overflows the arity-{arity} family")))
    };
    if n < 2 {
        return Err(Error::InvalidConfig(format!("counterexample needs n >= 2, got {n}")));
    }
    match arity {
        4 => Ok(vec![-p(4)? + 1, -p(6)?, p(6)? + p(4)?, p(7)?]),
        5 => Ok(vec![p(5)?, -p(5)? - p(4)? + 1, -p(8)?, p(8)? + p(4)?, p(9)?]),
        _ => Err(Error::InvalidConfig(format!("counterexample families exist for N = 4, 5, not {arity}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub arity: usize,
    pub n: i64,
    pub tuple: Vec<i64>,
    /// `|Phi^(N)|`
    pub phase: f64,
    /// `|k_{1..N-1}| |k_N|^4`
    pub bound: f64,
    pub ratio: f64,
    /// `|k_N| / max_{j<N} |k_j|`
    pub separation: f64,
}

/// Exact evaluation of the family at `n` with cubic coefficient `g = gp / gq`.
pub fn counterexample_ratio(arity: usize, n: i64, g: (i64, i64)) -> Result<CounterexampleRow> {
    let ks = counterexample_tuple(arity, n)?;
    let phase = big_f64(&mismatch_bigint_scaled(&ks, g.0, g.1).abs()) / g.1 as f64;
    let last = ks[arity - 1];
    let head: i64 = ks[..arity - 1].iter().sum();
    let bound = big_f64(&(BigInt::from(head).abs() * BigInt::from(last).pow(4)));
    let mx = ks[..arity - 1].iter().map(|k| k.abs()).max().unwrap_or(1) as f64;
    Ok(CounterexampleRow {
        arity,
        n,
        separation: last.abs() as f64 / mx,
        phase,
        bound,
        ratio: phase / bound,
        tuple: ks,
    })
}

pub(crate) fn run(ids: &[&str], _opts: &CertifyOptions) -> Result<Vec<CertificationReport>> {
    let cat = catalog();
    let mut out = Vec::new();
    for &id in ids {
        let a = anchor_of(&cat, id);
        let arity = match id {
            "counterexample-quartic" => 4,
            "counterexample-quintic" => 5,
            _ => continue,
        };
        out.push(family(id, &a, arity)?);
    }
    Ok(out)
}

fn family(id: &str, anchor: &str, arity: usize) -> Result<CertificationReport> {
    let ns = [10i64, 20, 40, 80];
    // decay exponent and the band for ratio(2n) / ratio(n)
    let (p, band) = if arity == 4 { (2, (0.15, 0.35)) } else { (4, (0.6 / 16.0, 1.4 / 16.0)) };
    let mut rep = CertificationReport::new(
        id,
        anchor,
        format!("n in {ns:?}, gamma = 2, e1 = 1/2, exact integer phase"),
    );
    let rows: Vec<CounterexampleRow> =
        ns.iter().map(|&n| counterexample_ratio(arity, n, DEFAULT_G)).collect::<Result<_>>()?;
    for r in &rows {
        rep.examined += 1;
        rep.constant(format!("ratio_n{:03}", r.n), r.ratio);
        rep.constant(format!("ratio_times_n{p}_n{:03}", r.n), r.ratio * (r.n as f64).powi(p));
        rep.witness(&r.tuple, format!("n = {}: ratio {:.6e}, |k_N| / max others {:.1}", r.n, r.ratio, r.separation));
        let head: i64 = r.tuple[..arity - 1].iter().sum();
        if head != 1 || r.separation < r.n as f64 / 2.0 {
            rep.violation(&r.tuple, "family left its hypothesis region");
        }
    }
    for w in rows.windows(2).take(2) {
        let q = w[1].ratio / w[0].ratio;
        rep.constant(format!("decay_n{:03}", w[0].n), q);
        if !(band.0..=band.1).contains(&q) {
            rep.violation(&w[0].tuple, format!("ratio(2n)/ratio(n) = {q:.4} outside [{:.4}, {:.4}]", band.0, band.1));
        }
    }
    // the limiting constant: quartic is pinned to 10, quintic is read off at the largest n
    let c = if arity == 4 { 10.0 } else { rows[3].ratio * 80f64.powi(p) };
    rep.constant("limit_constant", c);
    let at40 = rows[2].ratio * 40f64.powi(p) / c;
    rep.constant("scaled_ratio_n040", at40);
    if (at40 - 1.0).abs() > 0.3 {
        rep.violation(&rows[2].tuple, format!("ratio n^{p} / {c:.3} = {at40:.4} at n = 40, outside 1 +- 0.3"));
    }
    Ok(rep.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuples_have_unit_head_sum() {
        for n in [2, 10, 40] {
            let t = counterexample_tuple(4, n).unwrap();
            assert_eq!(t[..3].iter().sum::<i64>(), 1);
            let t = counterexample_tuple(5, n).unwrap();
            assert_eq!(t[..4].iter().sum::<i64>(), 1);
        }
        assert_eq!(counterexample_tuple(4, 10).unwrap(), vec![-9999, -1_000_000, 1_010_000, 10_000_000]);
        assert!(counterexample_tuple(6, 10).is_err());
        assert!(counterexample_tuple(5, 200).is_err());
    }
}

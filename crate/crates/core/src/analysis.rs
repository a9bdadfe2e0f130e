//! Timing model, per-round efficiency and load-factor optimization.
//!
//! Efficiencies are in tags per millisecond. The load factor `p` is the number
//! of unresolved tags per vector bit, `N* / f`.

use std::io::Write;

use serde::Serialize;

use crate::error::{invalid, Result};

/// Bits carried by one `t_tag` reader or tag message.
pub const MESSAGE_BITS: usize = 96;

/// Air-interface durations in milliseconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimingModel {
    /// 1-bit message, including turnaround.
    pub t_s: f64,
    /// 96-bit message, including turnaround.
    pub t_tag: f64,
    /// Extra time per additional bit of a tag string.
    pub per_bit: f64,
}

impl Default for TimingModel {
    fn default() -> Self {
        TimingModel {
            t_s: 0.4,
            t_tag: 2.4,
            per_bit: 0.025,
        }
    }
}

impl TimingModel {
    /// Time for tags to reply with a `w`-bit string.
    pub fn t_w(&self, w: usize) -> f64 {
        self.t_s + (w.max(1) - 1) as f64 * self.per_bit
    }

    /// Reader broadcast of `bits` bits packed into 96-bit messages.
    pub fn vector_broadcast_time(&self, bits: usize) -> f64 {
        bits.div_ceil(MESSAGE_BITS) as f64 * self.t_tag
    }

    /// Reader broadcast charged per bit at the 96-bits-per-`t_tag` rate.
    pub fn bit_proportional_time(&self, bits: usize) -> f64 {
        bits as f64 * self.t_tag / MESSAGE_BITS as f64
    }
}

/// One sample of an efficiency curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EfficiencyPoint {
    pub p: f64,
    /// Missing rate; absent for the sequential protocol, which ignores it.
    pub q: Option<f64>,
    pub efficiency: f64,
}

fn check_load(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("load factor {p} must be positive")))
    }
}

fn check_rate(q: f64) -> Result<()> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(invalid(format!("missing rate {q} outside [0, 1]")))
    }
}

/// Tags arranged per millisecond of indicator broadcast in one arrangement round.
///
/// Per vector bit, `p e^-p` tags land alone and `p^2 e^-p / 4` reconcilable
/// pairs contribute two tags each, while the broadcast costs one bit per
/// element plus one append bit per singleton or reconciled pair.
pub fn ssmti_efficiency(p: f64, timing: &TimingModel) -> Result<f64> {
    check_load(p)?;
    let e = (-p).exp();
    let arranged = p * e + 0.5 * p * p * e;
    let bits = p * e + 0.25 * p * p * e + 1.0;
    Ok(arranged / (bits * timing.t_tag / MESSAGE_BITS as f64))
}

/// Tags resolved per millisecond in one interactive round at missing rate `q`.
pub fn ismti_efficiency(p: f64, q: f64, timing: &TimingModel) -> Result<f64> {
    check_load(p)?;
    check_rate(q)?;
    Ok(MESSAGE_BITS as f64 * ismti_resolved_per_bit(p, q)
        / (timing.t_tag + timing.t_w(MESSAGE_BITS)))
}

/// Expected tags resolved per vector bit: singletons plus bits whose
/// tags are all missing.
pub fn ismti_resolved_per_bit(p: f64, q: f64) -> f64 {
    p * (-p).exp() + p * q * (-p * (1.0 - q)).exp() - p * q * (-p).exp()
}

/// Golden-section search for the maximizer of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    // the maximizer may sit on the closed upper end
    if f(hi) > f(x) {
        hi
    } else {
        x
    }
}

pub const SSMTI_SEARCH: (f64, f64) = (0.1, 10.0);
pub const ISMTI_SEARCH: (f64, f64) = (0.1, 30.0);
pub const OPT_TOLERANCE: f64 = 1e-6;

/// Load factor maximizing arrangement efficiency (about 1.5).
pub fn ssmti_p_opt(timing: &TimingModel) -> f64 {
    ssmti_p_opt_with_tolerance(timing, OPT_TOLERANCE)
}

pub fn ssmti_p_opt_with_tolerance(timing: &TimingModel, tol: f64) -> f64 {
    let (lo, hi) = SSMTI_SEARCH;
    golden_section_max(|p| ssmti_efficiency(p, timing).unwrap_or(0.0), lo, hi, tol)
}

/// Load factor maximizing interactive-round efficiency at missing rate `q`.
///
/// The denominator of the efficiency does not depend on `p`, so only the
/// resolved-per-bit term is searched.
pub fn ismti_p_opt(q: f64) -> Result<f64> {
    check_rate(q)?;
    let (lo, hi) = ISMTI_SEARCH;
    Ok(golden_section_max(
        |p| ismti_resolved_per_bit(p, q),
        lo,
        hi,
        OPT_TOLERANCE,
    ))
}

/// Expected arrangement cost per tag at the optimal load factor, in ms.
pub fn arrangement_cost_per_tag(timing: &TimingModel) -> f64 {
    let p = ssmti_p_opt(timing);
    1.0 / ssmti_efficiency(p, timing).expect("optimizer stays in range")
}

/// Predicted sequential-protocol time: optimal arrangement plus `ceil(N/w)`
/// verification strings.
pub fn ssmti_predicted_time(n: usize, w: usize, timing: &TimingModel) -> Result<f64> {
    if n == 0 {
        return Err(invalid("need at least one tag"));
    }
    if w == 0 {
        return Err(invalid("string length must be at least 1"));
    }
    Ok(n as f64 * arrangement_cost_per_tag(timing) + n.div_ceil(w) as f64 * timing.t_w(w))
}

/// Samples `ssmti_efficiency` on `p_grid` and `ismti_efficiency` on
/// `p_grid x q_grid`.
pub fn efficiency_curves(
    p_grid: &[f64],
    q_grid: &[f64],
    timing: &TimingModel,
) -> Result<(Vec<EfficiencyPoint>, Vec<EfficiencyPoint>)> {
    let ss = p_grid
        .iter()
        .map(|&p| {
            Ok(EfficiencyPoint {
                p,
                q: None,
                efficiency: ssmti_efficiency(p, timing)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut is = Vec::with_capacity(p_grid.len() * q_grid.len());
    for &q in q_grid {
        for &p in p_grid {
            is.push(EfficiencyPoint {
                p,
                q: Some(q),
                efficiency: ismti_efficiency(p, q, timing)?,
            });
        }
    }
    Ok((ss, is))
}

/// Writes `protocol,p,q,efficiency` rows.
pub fn write_curves_csv<W: Write>(
    out: W,
    ssmti: &[EfficiencyPoint],
    ismti: &[EfficiencyPoint],
) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        protocol: &'a str,
        p: f64,
        q: Option<f64>,
        efficiency: f64,
    }
    let mut w = csv::Writer::from_writer(out);
    for (protocol, points) in [("ssmti", ssmti), ("ismti", ismti)] {
        for pt in points {
            w.serialize(Row {
                protocol,
                p: pt.p,
                q: pt.q,
                efficiency: pt.efficiency,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

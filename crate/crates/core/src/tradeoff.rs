//! Closed-form rate-distortion-perception evaluators.
//!
//! Two evaluators are provided and kept side by side: the general
//! `max(rd_term, perception_term)` form, and the printed piecewise formula
//! for the equal Bernoulli(1/2)/Bernoulli(3/4) mixture. They disagree on
//! parts of the (D, S) plane; [`discrepancy_report`] lists where.

use crate::error::{invalid, Result};
use crate::sources::SourceModel;
use crate::spectra::{asymptotic_spectral_cdf, entropy_unchecked};

/// Differences at or below this are not reported.
pub const DISCREPANCY_TOLERANCE: f64 = 1e-9;

/// An operating point `(R, D, S)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint {
    pub rate: f64,
    pub distortion: f64,
    pub perception: f64,
}

impl TradeoffPoint {
    pub fn new(rate: f64, distortion: f64, perception: f64) -> Result<Self> {
        if !(rate >= 0.0) {
            return Err(invalid(format!("rate {rate} must be non-negative")));
        }
        if !(distortion >= 0.0) {
            return Err(invalid(format!("distortion {distortion} must be non-negative")));
        }
        check_perception(perception)?;
        Ok(Self { rate, distortion, perception })
    }
}

/// Which term attains the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingTerm {
    RateDistortion,
    Perception,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdpBreakdown {
    pub rd_term: f64,
    pub perception_term: f64,
    pub value: f64,
    pub binding: BindingTerm,
}

fn check_distortion(d: f64) -> Result<()> {
    if !(d >= 0.0) {
        return Err(invalid(format!("distortion {d} must be non-negative")));
    }
    Ok(())
}

fn check_perception(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(invalid(format!("perception budget {s} must lie in [0, 1]")));
    }
    Ok(())
}

/// `max_j (h(p_j) - h(min(D, 1/2)))^+`.
pub fn rd_term(model: &SourceModel, distortion: f64) -> Result<f64> {
    check_distortion(distortion)?;
    let hd = entropy_unchecked(distortion.min(0.5));
    Ok(model
        .components()
        .iter()
        .map(|c| (entropy_unchecked(c.p) - hd).max(0.0))
        .fold(0.0, f64::max))
}

/// Smallest rate at which the asymptotic spectrum falls to `S` or below.
pub fn perception_term(model: &SourceModel, perception: f64) -> Result<f64> {
    check_perception(perception)?;
    if perception >= 1.0 {
        return Ok(0.0);
    }
    let spectrum = asymptotic_spectral_cdf(model);
    Ok(spectrum
        .first_rate_at_or_below(perception)
        .expect("the last level of a mixture spectrum is 0"))
}

pub fn rdp_theorem(model: &SourceModel, distortion: f64, perception: f64) -> Result<RdpBreakdown> {
    let rd = rd_term(model, distortion)?;
    let pt = perception_term(model, perception)?;
    let binding = match rd.partial_cmp(&pt) {
        Some(std::cmp::Ordering::Greater) => BindingTerm::RateDistortion,
        Some(std::cmp::Ordering::Less) => BindingTerm::Perception,
        _ => BindingTerm::Both,
    };
    Ok(RdpBreakdown { rd_term: rd, perception_term: pt, value: rd.max(pt), binding })
}

/// The printed piecewise formula for the equal Bernoulli(1/2)/(3/4) mixture:
/// `1` at `S = 0`, `max{h(1/4), 1 - h(D)}` for `0 < S <= 1/2`, and
/// `1 - h(D)` for `S > 1/2`.
pub fn rdp_paper_example(distortion: f64, perception: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&distortion) {
        return Err(invalid(format!("distortion {distortion} must lie in [0, 1/2]")));
    }
    check_perception(perception)?;
    let rd = 1.0 - entropy_unchecked(distortion);
    Ok(if perception == 0.0 {
        1.0
    } else if perception <= 0.5 {
        entropy_unchecked(0.25).max(rd)
    } else {
        rd
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrepancy {
    pub distortion: f64,
    pub perception: f64,
    pub theorem: f64,
    pub paper: f64,
    pub difference: f64,
}

/// Grid points where the two evaluators differ by more than
/// [`DISCREPANCY_TOLERANCE`], largest difference first.
pub fn discrepancy_report(d_grid: &[f64], s_grid: &[f64]) -> Result<Vec<Discrepancy>> {
    let model = SourceModel::paper_mixed();
    let mut out = Vec::new();
    for &d in d_grid {
        for &s in s_grid {
            let theorem = rdp_theorem(&model, d, s)?.value;
            let paper = rdp_paper_example(d, s)?;
            let difference = (theorem - paper).abs();
            if difference > DISCREPANCY_TOLERANCE {
                out.push(Discrepancy { distortion: d, perception: s, theorem, paper, difference });
            }
        }
    }
    // Stable sort keeps grid order among equal differences.
    out.sort_by(|a, b| b.difference.total_cmp(&a.difference));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::binary_entropy;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn h(u: f64) -> f64 {
        binary_entropy(u).unwrap()
    }

    #[test]
    fn rd_term_examples() {
        let m = SourceModel::paper_mixed();
        assert_eq!(rd_term(&m, 0.0).unwrap(), 1.0);
        assert_eq!(rd_term(&m, 0.5).unwrap(), 0.0);
        assert_eq!(rd_term(&m, 0.9).unwrap(), 0.0);
        close(rd_term(&m, 0.1).unwrap(), 0.531004, 1e-6);
        assert!(rd_term(&m, -0.1).is_err());
    }

    #[test]
    fn perception_term_examples() {
        let m = SourceModel::paper_mixed();
        assert_eq!(perception_term(&m, 0.0).unwrap(), 1.0);
        close(perception_term(&m, 0.5).unwrap(), h(0.25), 1e-15);
        assert_eq!(perception_term(&m, 0.4).unwrap(), 1.0);
        assert_eq!(perception_term(&m, 1.0).unwrap(), 0.0);
        assert!(perception_term(&m, 1.5).is_err());
    }

    #[test]
    fn theorem_examples() {
        let m = SourceModel::paper_mixed();
        let b = rdp_theorem(&m, 0.1, 0.5).unwrap();
        close(b.value, 0.811278, 1e-6);
        assert_eq!(b.binding, BindingTerm::Perception);
        let b = rdp_theorem(&m, 0.0, 1.0).unwrap();
        assert_eq!(b.value, 1.0);
        assert_eq!(b.binding, BindingTerm::RateDistortion);
        let u = SourceModel::bernoulli(0.5).unwrap();
        let b = rdp_theorem(&u, 0.11, 1.0).unwrap();
        close(b.value, 1.0 - h(0.11), 1e-15);
        close(b.value, 0.5, 1e-3);
    }

    #[test]
    fn paper_example_branches() {
        assert_eq!(rdp_paper_example(0.1, 0.0).unwrap(), 1.0);
        close(rdp_paper_example(0.1, 0.5).unwrap(), 0.811278, 1e-6);
        close(rdp_paper_example(0.25, 0.75).unwrap(), 0.188722, 1e-6);
        let d = 0.3;
        assert_eq!(rdp_paper_example(d, 0.0).unwrap(), 1.0);
        assert_eq!(rdp_paper_example(d, 1e-9).unwrap(), h(0.25).max(1.0 - h(d)));
        assert_eq!(rdp_paper_example(d, 0.5).unwrap(), h(0.25).max(1.0 - h(d)));
        assert_eq!(rdp_paper_example(d, 0.5 + 1e-9).unwrap(), 1.0 - h(d));
        assert_eq!(rdp_paper_example(d, 1.0).unwrap(), 1.0 - h(d));
        assert!(rdp_paper_example(0.6, 0.5).is_err());
        assert!(rdp_paper_example(0.1, -0.5).is_err());
    }

    #[test]
    fn discrepancy_examples() {
        let report = discrepancy_report(&[0.1, 0.25], &[0.3, 0.5, 0.75]).unwrap();
        let find = |d: f64, s: f64| report.iter().find(|r| r.distortion == d && r.perception == s);
        assert!(find(0.1, 0.5).is_none());
        let a = find(0.1, 0.3).unwrap();
        assert_eq!(a.theorem, 1.0);
        close(a.paper, h(0.25), 1e-15);
        let b = find(0.25, 0.75).unwrap();
        close(b.theorem, h(0.25), 1e-15);
        close(b.paper, 1.0 - h(0.25), 1e-15);
        for w in report.windows(2) {
            assert!(w[0].difference >= w[1].difference);
        }
        assert!(discrepancy_report(&[], &[0.5]).unwrap().is_empty());
    }

    #[test]
    fn theorem_is_monotone_and_dominates_both_terms() {
        let m: SourceModel = "mix:0.3*0.2,0.7*0.45".parse().unwrap();
        for model in [SourceModel::paper_mixed(), m] {
            let grid: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
            for (i, &d) in grid.iter().enumerate() {
                for (j, &s) in grid.iter().enumerate() {
                    let v = rdp_theorem(&model, d, s).unwrap();
                    assert_eq!(v.value, v.rd_term.max(v.perception_term));
                    if i > 0 {
                        assert!(v.value <= rdp_theorem(&model, grid[i - 1], s).unwrap().value);
                    }
                    if j > 0 {
                        assert!(v.value <= rdp_theorem(&model, d, grid[j - 1]).unwrap().value);
                    }
                    if d >= 0.5 {
                        assert_eq!(v.rd_term, 0.0);
                    }
                }
                assert_eq!(rdp_theorem(&model, d, 1.0).unwrap().value, rd_term(&model, d).unwrap());
            }
        }
    }

    #[test]
    fn tradeoff_point_validation() {
        assert!(TradeoffPoint::new(0.5, 0.1, 0.2).is_ok());
        assert!(TradeoffPoint::new(-0.5, 0.1, 0.2).is_err());
        assert!(TradeoffPoint::new(0.5, -0.1, 0.2).is_err());
        assert!(TradeoffPoint::new(0.5, 0.1, 1.2).is_err());
    }
}

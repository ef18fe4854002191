//! Closed-form Erdős–Rényi expectations for 4-node patterns.
//!
//! The critical point is the ratio of expected motif counts, not the
//! expectation of the per-graph ratio. The `C(n, 4)` factor cancels in that
//! ratio, so the point depends on `p` only.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motif::{binomial, MotifClass, Rfp};

/// Parameters of the `G(n, p)` random graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErParams {
    pub n: usize,
    pub p: f64,
}

impl ErParams {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        check_probability(p)?;
        Ok(ErParams { n, p })
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// An isomorphism class of labelled 4-node graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternClass {
    /// Number of edges.
    pub edge_count: u32,
    /// Number of labelled graphs in the class.
    pub isomorphs: u32,
    /// The motif, if the class is connected.
    pub motif: Option<MotifClass>,
    pub description: &'static str,
}

const fn class(edge_count: u32, isomorphs: u32, motif: Option<MotifClass>, description: &'static str) -> PatternClass {
    PatternClass { edge_count, isomorphs, motif, description }
}

/// All eleven classes of 4-node graphs.
pub const PATTERN_CLASSES: [PatternClass; 11] = [
    class(0, 1, None, "empty"),
    class(1, 6, None, "single edge"),
    class(2, 12, None, "two adjacent edges"),
    class(2, 3, None, "two disjoint edges"),
    class(3, 4, None, "triangle and isolated node"),
    class(3, 4, Some(MotifClass::M2), "star"),
    class(3, 12, Some(MotifClass::M1), "path"),
    class(4, 3, Some(MotifClass::M3), "4-cycle"),
    class(4, 12, Some(MotifClass::M4), "triangle with pendant"),
    class(5, 6, Some(MotifClass::M5), "diamond"),
    class(6, 1, Some(MotifClass::M6), "complete"),
];

impl PatternClass {
    pub fn of_motif(m: MotifClass) -> PatternClass {
        *PATTERN_CLASSES
            .iter()
            .find(|c| c.motif == Some(m))
            .expect("every motif is in the table")
    }
}

/// Probability that four given nodes of `G(n, p)` induce a graph of class `c`:
/// `N · p^l · (1 − p)^(6 − l)`.
pub fn pattern_probability(c: &PatternClass, p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(weight(c.isomorphs, c.edge_count, p))
}

fn weight(isomorphs: u32, edges: u32, p: f64) -> f64 {
    isomorphs as f64 * p.powi(edges as i32) * (1.0 - p).powi(6 - edges as i32)
}

/// Expected count of motif `m` in `G(n, p)`.
pub fn expected_motif_frequency(params: &ErParams, m: MotifClass) -> Result<f64> {
    check_probability(params.p)?;
    if params.n < 4 {
        return Err(Error::TooSmall { n: params.n, min: 4 });
    }
    let tetrads = binomial(params.n as u64, 4) as f64;
    Ok(tetrads * weight(m.isomorph_count(), m.edge_count(), params.p))
}

/// Relative frequency point of `G(n, p)`.
///
/// `p = 1` gives the K4 unit vector; `p = 0` has no connected tetrads.
pub fn critical_point(params: &ErParams) -> Result<Rfp> {
    let p = params.p;
    check_probability(p)?;
    if p == 0.0 {
        return Err(Error::NoConnectedTetrads);
    }
    if p == 1.0 {
        return Ok(Rfp::unit(MotifClass::M6));
    }
    let w = MotifClass::ALL.map(|m| weight(m.isomorph_count(), m.edge_count(), p));
    let total: f64 = w.iter().sum();
    Ok(Rfp(w.map(|x| x / total)))
}

/// A small graph described by node count, edge count and isomorph count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphShape {
    pub nodes: usize,
    pub edges: usize,
    pub isomorphs: u64,
}

impl From<MotifClass> for GraphShape {
    fn from(m: MotifClass) -> Self {
        GraphShape {
            nodes: 4,
            edges: m.edge_count() as usize,
            isomorphs: m.isomorph_count() as u64,
        }
    }
}

/// Orders the expected `G(n, p)` frequencies of two graphs with the same
/// node and edge counts. For any `p` in `(0, 1)` the factor
/// `p^l (1 − p)^(C(m,2) − l)` is shared, so the isomorph counts decide.
pub fn expected_frequency_ordering(g1: GraphShape, g2: GraphShape) -> Result<Ordering> {
    if g1.nodes != g2.nodes || g1.edges != g2.edges {
        return Err(Error::IncomparableGraphs {
            m1: g1.nodes,
            l1: g1.edges,
            m2: g2.nodes,
            l2: g2.edges,
        });
    }
    Ok(g1.isomorphs.cmp(&g2.isomorphs))
}

/// Edge probability that maximizes the expected frequency of a graph with
/// `m_nodes` nodes and `l_edges` edges: its own density.
pub fn argmax_frequency_p(m_nodes: usize, l_edges: usize) -> Result<f64> {
    if m_nodes < 2 {
        return Err(Error::TooSmall { n: m_nodes, min: 2 });
    }
    let pairs = m_nodes * (m_nodes - 1) / 2;
    if l_edges > pairs {
        return Err(Error::InvalidEdgeCount { m: m_nodes, l: l_edges });
    }
    Ok(l_edges as f64 / pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motif::oracle::enumerate_patterns;

    #[test]
    fn table_matches_enumeration() {
        assert_eq!(PATTERN_CLASSES.iter().map(|c| c.isomorphs).sum::<u32>(), 64);
        let mut from_table: Vec<(u32, u32, Option<MotifClass>)> = PATTERN_CLASSES
            .iter()
            .map(|c| (c.edge_count, c.isomorphs, c.motif))
            .collect();
        let mut enumerated: Vec<(u32, u32, Option<MotifClass>)> = enumerate_patterns()
            .iter()
            .map(|g| (g.edge_count, g.members.len() as u32, g.motif))
            .collect();
        from_table.sort();
        enumerated.sort();
        assert_eq!(from_table, enumerated);
    }

    #[test]
    fn pattern_probability_examples() {
        let k4 = PatternClass::of_motif(MotifClass::M6);
        for p in [0.0, 0.3, 0.77, 1.0] {
            assert_eq!(pattern_probability(&k4, p).unwrap(), p.powi(6));
        }
        let star = PatternClass::of_motif(MotifClass::M2);
        assert!((pattern_probability(&star, 0.5).unwrap() - 0.0625).abs() < 1e-15);
        let total: f64 = PATTERN_CLASSES.iter().map(|c| pattern_probability(c, 0.37).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(matches!(pattern_probability(&star, 1.5), Err(Error::InvalidProbability(_))));
    }

    #[test]
    fn binomial_completeness_on_grid() {
        for i in 0..=100 {
            let p = i as f64 / 100.0;
            let total: f64 = PATTERN_CLASSES.iter().map(|c| pattern_probability(c, p).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-12, "p = {p}");
        }
    }

    #[test]
    fn expected_frequency_examples() {
        let f = expected_motif_frequency(&ErParams::new(4, 1.0).unwrap(), MotifClass::M6).unwrap();
        assert_eq!(f, 1.0);
        for m in MotifClass::ALL {
            assert_eq!(expected_motif_frequency(&ErParams::new(50, 0.0).unwrap(), m).unwrap(), 0.0);
        }
        let f = expected_motif_frequency(&ErParams::new(10, 0.5).unwrap(), MotifClass::M1).unwrap();
        assert!((f - 39.375).abs() < 1e-12);
        assert!(matches!(
            expected_motif_frequency(&ErParams { n: 3, p: 0.5 }, MotifClass::M1),
            Err(Error::TooSmall { .. })
        ));
    }

    #[test]
    fn expected_frequency_consistent_with_pattern_probability() {
        for &p in &[0.1, 0.45, 0.9] {
            let params = ErParams::new(30, p).unwrap();
            for m in MotifClass::ALL {
                let lhs = expected_motif_frequency(&params, m).unwrap();
                let rhs = binomial(30, 4) as f64 * pattern_probability(&PatternClass::of_motif(m), p).unwrap();
                assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0));
            }
        }
    }

    #[test]
    fn critical_point_examples() {
        assert_eq!(
            critical_point(&ErParams::new(10, 1.0).unwrap()).unwrap(),
            Rfp::unit(MotifClass::M6)
        );
        let cp = critical_point(&ErParams::new(10, 0.5).unwrap()).unwrap();
        let expected = [12.0, 4.0, 3.0, 12.0, 6.0, 1.0].map(|x: f64| x / 38.0);
        for (a, b) in cp.0.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((cp.0[0] - 0.3158).abs() < 1e-4 && (cp.0[4] - 0.1579).abs() < 1e-4);
        assert!(matches!(
            critical_point(&ErParams::new(10, 0.0).unwrap()),
            Err(Error::NoConnectedTetrads)
        ));
    }

    #[test]
    fn critical_point_is_independent_of_n() {
        for &p in &[0.05, 0.5, 0.9] {
            let a = critical_point(&ErParams::new(5, p).unwrap()).unwrap();
            for n in [25, 50, 500, 5000] {
                assert_eq!(a, critical_point(&ErParams::new(n, p).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn ordering_examples() {
        use MotifClass::*;
        assert_eq!(expected_frequency_ordering(M1.into(), M2.into()).unwrap(), Ordering::Greater);
        assert_eq!(expected_frequency_ordering(M5.into(), M5.into()).unwrap(), Ordering::Equal);
        assert_eq!(expected_frequency_ordering(M3.into(), M4.into()).unwrap(), Ordering::Less);
        assert!(matches!(
            expected_frequency_ordering(M1.into(), M3.into()),
            Err(Error::IncomparableGraphs { .. })
        ));
    }

    #[test]
    fn ordering_agrees_with_evaluated_frequencies() {
        use MotifClass::*;
        for (a, b) in [(M1, M2), (M3, M4), (M4, M3)] {
            let ord = expected_frequency_ordering(a.into(), b.into()).unwrap();
            for i in 1..100 {
                let params = ErParams::new(10, i as f64 / 100.0).unwrap();
                let fa = expected_motif_frequency(&params, a).unwrap();
                let fb = expected_motif_frequency(&params, b).unwrap();
                assert_eq!(fa.partial_cmp(&fb).unwrap(), ord);
            }
        }
    }

    /// Grid search over p with step 1e-4, independent of the closed form.
    fn grid_argmax(m: MotifClass) -> f64 {
        let mut best = (0.0, f64::NEG_INFINITY);
        for i in 0..=10_000 {
            let p = i as f64 / 10_000.0;
            let f = expected_motif_frequency(&ErParams::new(20, p).unwrap(), m).unwrap();
            if f > best.1 {
                best = (p, f);
            }
        }
        best.0
    }

    #[test]
    fn argmax_examples() {
        assert_eq!(argmax_frequency_p(4, 3).unwrap(), 0.5);
        assert_eq!(argmax_frequency_p(4, 6).unwrap(), 1.0);
        assert!((argmax_frequency_p(4, 4).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(argmax_frequency_p(4, 7), Err(Error::InvalidEdgeCount { .. })));
        for m in MotifClass::ALL {
            let closed = argmax_frequency_p(4, m.edge_count() as usize).unwrap();
            assert!((grid_argmax(m) - closed).abs() <= 1e-4, "{m}");
        }
    }
}

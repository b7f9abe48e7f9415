//! Compact convex sets with closed-form linear minimization oracles.
//!
//! Every oracle returns a vertex. Ties are broken towards the lowest index,
//! and a zero gradient is treated as a full tie, so outputs are deterministic.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::l1_norm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    /// `{x : ‖x‖₁ ≤ r}`
    L1Ball,
    /// `{x : x ≥ 0, Σ x = r}`
    Simplex,
    /// `{x : ‖x‖∞ ≤ r}`
    LinfBox,
}

impl ConstraintKind {
    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::L1Ball => "l1_ball",
            ConstraintKind::Simplex => "simplex",
            ConstraintKind::LinfBox => "linf_box",
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ConstraintKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1_ball" | "l1" => Ok(ConstraintKind::L1Ball),
            "simplex" => Ok(ConstraintKind::Simplex),
            "linf_box" | "linf" => Ok(ConstraintKind::LinfBox),
            other => Err(Error::config(format!("unknown constraint `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSet {
    kind: ConstraintKind,
    radius: f64,
}

impl ConstraintSet {
    pub fn new(kind: ConstraintKind, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::config(format!("radius must be positive, got {radius}")));
        }
        Ok(Self { kind, radius })
    }

    pub fn l1_ball(radius: f64) -> Result<Self> {
        Self::new(ConstraintKind::L1Ball, radius)
    }

    pub fn simplex(radius: f64) -> Result<Self> {
        Self::new(ConstraintKind::Simplex, radius)
    }

    pub fn linf_box(radius: f64) -> Result<Self> {
        Self::new(ConstraintKind::LinfBox, radius)
    }

    pub fn kind(&self) -> ConstraintKind {
        self.kind
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Euclidean diameter in dimension `dim`.
    pub fn diameter(&self, dim: usize) -> f64 {
        match self.kind {
            ConstraintKind::L1Ball => 2.0 * self.radius,
            ConstraintKind::Simplex => self.radius * std::f64::consts::SQRT_2,
            ConstraintKind::LinfBox => 2.0 * self.radius * (dim as f64).sqrt(),
        }
    }

    /// `argmin_{s ∈ X} <g, s>`.
    pub fn lmo(&self, g: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; g.len()];
        self.write_vertex(g, &mut s);
        s
    }

    /// [`lmo`](Self::lmo) into a caller-owned buffer of the same length.
    pub fn lmo_into(&self, g: &[f64], out: &mut [f64]) -> Result<()> {
        if g.len() != out.len() {
            return Err(Error::Dimension {
                expected: g.len(),
                got: out.len(),
            });
        }
        self.write_vertex(g, out);
        Ok(())
    }

    fn write_vertex(&self, g: &[f64], out: &mut [f64]) {
        let r = self.radius;
        match self.kind {
            ConstraintKind::L1Ball => {
                out.fill(0.0);
                if let Some(i) = argmax_abs(g) {
                    out[i] = if g[i] > 0.0 { -r } else { r };
                }
            }
            ConstraintKind::Simplex => {
                out.fill(0.0);
                if let Some(i) = argmin(g) {
                    out[i] = r;
                }
            }
            ConstraintKind::LinfBox => {
                for (o, &gj) in out.iter_mut().zip(g) {
                    *o = if gj > 0.0 { -r } else { r };
                }
            }
        }
    }

    /// Whether `x` lies in the set enlarged by `tol` (in the defining norm).
    /// How far `x` lies outside the set, in the units of the radius; 0 when feasible.
    /// Non-finite entries give infinity.
    pub fn violation(&self, x: &[f64]) -> f64 {
        if x.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        let r = self.radius;
        let excess = match self.kind {
            ConstraintKind::L1Ball => l1_norm(x) - r,
            ConstraintKind::LinfBox => x.iter().fold(0.0f64, |m, v| m.max(v.abs())) - r,
            ConstraintKind::Simplex => {
                let neg: f64 = x.iter().filter(|v| **v < 0.0).map(|v| -v).sum();
                let sum: f64 = x.iter().sum();
                neg.max((sum - r).abs())
            }
        };
        excess.max(0.0)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let r = self.radius;
        match self.kind {
            ConstraintKind::L1Ball => l1_norm(x) <= r + tol,
            ConstraintKind::LinfBox => x.iter().all(|v| v.abs() <= r + tol),
            ConstraintKind::Simplex => {
                let neg: f64 = x.iter().filter(|v| **v < 0.0).map(|v| -v).sum();
                let sum: f64 = x.iter().sum();
                neg <= tol && (sum - r).abs() <= tol
            }
        }
    }
}

/// First index of the largest `|g_i|`.
fn argmax_abs(g: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in g.iter().map(|v| v.abs()).enumerate() {
        if best.map_or(true, |(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// First index of the smallest `g_i`.
fn argmin(g: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in g.iter().enumerate() {
        if best.map_or(true, |(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{lmo_by_enumeration, EnumerationBudget};
    use proptest::prelude::*;

    #[test]
    fn violation_measures_excess() {
        let b = ConstraintSet::l1_ball(2.0).unwrap();
        assert_eq!(b.violation(&[1.0, -0.5]), 0.0);
        assert_eq!(b.violation(&[2.0, -1.0]), 1.0);
        let bx = ConstraintSet::linf_box(1.0).unwrap();
        assert_eq!(bx.violation(&[0.5, -1.5]), 0.5);
        let sx = ConstraintSet::simplex(1.0).unwrap();
        assert_eq!(sx.violation(&[0.25, 0.75]), 0.0);
        assert_eq!(sx.violation(&[-0.25, 1.25]), 0.25);
        assert_eq!(b.violation(&[f64::NAN]), f64::INFINITY);
    }

    #[test]
    fn l1_vertex() {
        let b = ConstraintSet::l1_ball(1.0).unwrap();
        assert_eq!(b.lmo(&[3.0, -1.0, 2.0]), vec![-1.0, 0.0, 0.0]);
        assert_eq!(b.lmo(&[0.0, -4.0]), vec![0.0, 1.0]);
        // lowest index wins ties
        assert_eq!(b.lmo(&[2.0, -2.0]), vec![-1.0, 0.0]);
        let b = ConstraintSet::l1_ball(2.5).unwrap();
        assert_eq!(b.lmo(&[0.0; 3]), vec![2.5, 0.0, 0.0]);
    }

    #[test]
    fn simplex_vertex() {
        let s = ConstraintSet::simplex(1.0).unwrap();
        assert_eq!(s.lmo(&[0.2, -0.5, 0.1]), vec![0.0, 1.0, 0.0]);
        assert_eq!(s.lmo(&[0.0; 3]), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn box_vertex() {
        let b = ConstraintSet::linf_box(2.0).unwrap();
        assert_eq!(b.lmo(&[1.0, -3.0, 0.0]), vec![-2.0, 2.0, 2.0]);
    }

    #[test]
    fn lmo_into_checks_length() {
        let b = ConstraintSet::l1_ball(1.0).unwrap();
        let mut out = vec![0.0; 2];
        assert!(matches!(b.lmo_into(&[1.0; 3], &mut out), Err(Error::Dimension { .. })));
    }

    #[test]
    fn diameters() {
        assert_eq!(ConstraintSet::l1_ball(2000.0).unwrap().diameter(10), 4000.0);
        assert_eq!(ConstraintSet::simplex(1.0).unwrap().diameter(3), 2f64.sqrt());
        assert_eq!(ConstraintSet::linf_box(1.0).unwrap().diameter(4), 4.0);
    }

    #[test]
    fn membership() {
        let b = ConstraintSet::l1_ball(1.0).unwrap();
        assert!(b.contains(&[0.5, -0.5], 0.0));
        assert!(!b.contains(&[1.0001, 0.0], 1e-9));
        assert!(!b.contains(&[f64::NAN, 0.0], 1.0));
        let s = ConstraintSet::simplex(1.0).unwrap();
        assert!(s.contains(&[0.5, 0.5], 0.0));
        assert!(!s.contains(&[1.5, -0.5], 1e-9));
        assert!(!s.contains(&[0.2, 0.2], 1e-9));
        let bx = ConstraintSet::linf_box(1.0).unwrap();
        assert!(bx.contains(&[1.0, -1.0, 0.3], 0.0));
        assert!(!bx.contains(&[1.1, 0.0], 0.0));
    }

    #[test]
    fn rejects_bad_radius() {
        assert!(ConstraintSet::l1_ball(0.0).is_err());
        assert!(ConstraintSet::simplex(-1.0).is_err());
        assert!(ConstraintSet::linf_box(f64::INFINITY).is_err());
    }

    fn kinds() -> impl Strategy<Value = ConstraintKind> {
        prop_oneof![
            Just(ConstraintKind::L1Ball),
            Just(ConstraintKind::Simplex),
            Just(ConstraintKind::LinfBox)
        ]
    }

    proptest! {
        #[test]
        fn lmo_matches_enumeration(
            kind in kinds(),
            r in 0.1f64..100.0,
            g in proptest::collection::vec(-10.0f64..10.0, 1..=10),
        ) {
            let set = ConstraintSet::new(kind, r).unwrap();
            let s = set.lmo(&g);
            let e = lmo_by_enumeration(&set, &g, &EnumerationBudget::default()).unwrap();
            prop_assert_eq!(&s, &e);
            prop_assert!(set.contains(&s, 1e-12));
        }

        #[test]
        fn lmo_is_scale_invariant(
            kind in kinds(),
            c in 1e-3f64..1e3,
            g in proptest::collection::vec(-10.0f64..10.0, 1..=10),
        ) {
            let set = ConstraintSet::new(kind, 3.0).unwrap();
            let scaled: Vec<f64> = g.iter().map(|v| v * c).collect();
            prop_assert_eq!(set.lmo(&g), set.lmo(&scaled));
        }
    }
}

use serde::{Deserialize, Serialize};

use crate::extnum::ext_f64;

/// Closed interval `[lo, hi]`; endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    #[serde(with = "ext_f64")]
    pub lo: f64,
    #[serde(with = "ext_f64")]
    pub hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Self {
        Band { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Sorted list of disjoint, non-touching closed intervals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Band>", into = "Vec<Band>")]
pub struct BandSet {
    bands: Vec<Band>,
}

impl From<Vec<Band>> for BandSet {
    fn from(v: Vec<Band>) -> Self {
        BandSet::new(v)
    }
}

impl From<BandSet> for Vec<Band> {
    fn from(s: BandSet) -> Self {
        s.bands
    }
}

impl BandSet {
    pub fn empty() -> Self {
        BandSet::default()
    }

    pub fn real_line() -> Self {
        BandSet {
            bands: vec![Band::new(f64::NEG_INFINITY, f64::INFINITY)],
        }
    }

    /// Normalizes: drops empty or NaN intervals, sorts, merges overlapping
    /// and touching ones.
    pub fn new(raw: impl IntoIterator<Item = Band>) -> Self {
        let mut v: Vec<Band> = raw.into_iter().filter(|b| b.lo <= b.hi).collect();
        v.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        let mut out: Vec<Band> = Vec::with_capacity(v.len());
        for b in v {
            match out.last_mut() {
                Some(last) if b.lo <= last.hi => last.hi = last.hi.max(b.hi),
                _ => out.push(b),
            }
        }
        BandSet { bands: out }
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        BandSet::new(pairs.iter().map(|&(lo, hi)| Band::new(lo, hi)))
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.bands.iter().any(|b| b.contains(x))
    }

    pub fn union(&self, other: &BandSet) -> BandSet {
        BandSet::new(self.bands.iter().chain(&other.bands).copied())
    }

    pub fn intersection(&self, other: &BandSet) -> BandSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.bands.len() && j < other.bands.len() {
            let (a, b) = (self.bands[i], other.bands[j]);
            let lo = a.lo.max(b.lo);
            let hi = a.hi.min(b.hi);
            if lo <= hi {
                out.push(Band::new(lo, hi));
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        BandSet::new(out)
    }

    /// Finite boundary points, ascending.
    pub fn boundary(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for b in &self.bands {
            for x in [b.lo, b.hi] {
                if x.is_finite() && out.last() != Some(&x) {
                    out.push(x);
                }
            }
        }
        out
    }

    /// Image under `x -> -x`.
    pub fn reflect(&self) -> BandSet {
        BandSet::new(self.bands.iter().map(|b| Band::new(-b.hi, -b.lo)))
    }

    /// Open gaps between consecutive bands plus the unbounded ends not
    /// covered, i.e. the complement as open intervals.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut prev = f64::NEG_INFINITY;
        let mut first = true;
        for b in &self.bands {
            if first {
                if b.lo > f64::NEG_INFINITY {
                    out.push((f64::NEG_INFINITY, b.lo));
                }
            } else {
                out.push((prev, b.lo));
            }
            prev = b.hi;
            first = false;
        }
        if first {
            out.push((f64::NEG_INFINITY, f64::INFINITY));
        } else if prev < f64::INFINITY {
            out.push((prev, f64::INFINITY));
        }
        out
    }

    /// Whether `(x - eps, x)` (left) or `(x, x + eps)` (right) meets the set
    /// for every `eps > 0`.
    pub fn touches_left(&self, x: f64) -> bool {
        self.bands.iter().any(|b| b.lo < x && x <= b.hi)
    }

    pub fn touches_right(&self, x: f64) -> bool {
        self.bands.iter().any(|b| b.lo <= x && x < b.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn touching_merge() {
        let s = BandSet::from_pairs(&[(0.0, f64::INFINITY), (f64::NEG_INFINITY, 0.0)]);
        assert_eq!(s, BandSet::real_line());
        assert!(s.boundary().is_empty());
        assert_eq!(s.gaps(), vec![]);
    }

    #[test]
    fn algebra() {
        let a = BandSet::from_pairs(&[(0.0, 1.0), (3.0, 5.0)]);
        let b = BandSet::from_pairs(&[(0.5, 4.0)]);
        assert_eq!(a.intersection(&b), BandSet::from_pairs(&[(0.5, 1.0), (3.0, 4.0)]));
        assert_eq!(a.union(&b), BandSet::from_pairs(&[(0.0, 5.0)]));
        assert_eq!(a.reflect(), BandSet::from_pairs(&[(-5.0, -3.0), (-1.0, 0.0)]));
        assert_eq!(a.boundary(), vec![0.0, 1.0, 3.0, 5.0]);
        assert_eq!(
            a.gaps(),
            vec![(f64::NEG_INFINITY, 0.0), (1.0, 3.0), (5.0, f64::INFINITY)]
        );
        let point = BandSet::from_pairs(&[(2.0, 2.0)]);
        assert_eq!(point.boundary(), vec![2.0]);
        assert!(!point.touches_left(2.0) && !point.touches_right(2.0));
        assert!(a.touches_left(1.0) && !a.touches_right(1.0));
    }

    #[test]
    fn json_infinities() {
        let s = BandSet::from_pairs(&[(f64::NEG_INFINITY, -1.0), (1.0, f64::INFINITY)]);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"[{"lo":"-inf","hi":-1.0},{"lo":1.0,"hi":"inf"}]"#);
        assert_eq!(serde_json::from_str::<BandSet>(&j).unwrap(), s);
    }
}

//! Discretized cyclic groups and the hue–saturation–luminance product group.
//!
//! Elements are stored as integer indices so the group axioms hold exactly;
//! the realized angle `2πk/N` is derived on demand.

use std::f64::consts::TAU;

/// The cyclic group of order `N`, elements `{2πk/N : 0 ≤ k < N}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclicGroup {
    order: usize,
}

impl CyclicGroup {
    /// `order` must be at least 1.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "cyclic group order must be positive");
        Self { order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            index: 0,
            order: self.order,
        }
    }

    /// Element with index `k` (reduced mod N).
    pub fn element(&self, k: usize) -> GroupElement {
        GroupElement {
            index: k % self.order,
            order: self.order,
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(move |k| self.element(k))
    }
}

/// An element `2πk/N` of a cyclic group, kept as the integer `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupElement {
    index: usize,
    order: usize,
}

impl GroupElement {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Realized angle in `[0, 2π)`.
    pub fn angle(&self) -> f64 {
        TAU * self.index as f64 / self.order as f64
    }

    pub fn is_identity(&self) -> bool {
        self.index == 0
    }

    /// Group operation `(a + b) mod 2π`, exact in index arithmetic.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        assert_eq!(self.order, other.order, "elements from different groups");
        GroupElement {
            index: (self.index + other.index) % self.order,
            order: self.order,
        }
    }

    /// Inverse `2π(N−k)/N mod 2π`.
    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            index: (self.order - self.index) % self.order,
            order: self.order,
        }
    }
}

/// The product group `HSL_{NMR} = H_N × S_M × L_R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HslGroup {
    hue: CyclicGroup,
    sat: CyclicGroup,
    lum: CyclicGroup,
}

impl HslGroup {
    pub fn new(hue_order: usize, sat_order: usize, lum_order: usize) -> Self {
        Self {
            hue: CyclicGroup::new(hue_order),
            sat: CyclicGroup::new(sat_order),
            lum: CyclicGroup::new(lum_order),
        }
    }

    pub fn hue(&self) -> CyclicGroup {
        self.hue
    }

    pub fn sat(&self) -> CyclicGroup {
        self.sat
    }

    pub fn lum(&self) -> CyclicGroup {
        self.lum
    }

    pub fn orders(&self) -> (usize, usize, usize) {
        (self.hue.order(), self.sat.order(), self.lum.order())
    }

    /// Number of elements `N·M·R`.
    pub fn size(&self) -> usize {
        self.hue.order() * self.sat.order() * self.lum.order()
    }

    pub fn identity(&self) -> HslElement {
        HslElement {
            hue: self.hue.identity(),
            sat: self.sat.identity(),
            lum: self.lum.identity(),
        }
    }

    pub fn element(&self, i: usize, j: usize, k: usize) -> HslElement {
        HslElement {
            hue: self.hue.element(i),
            sat: self.sat.element(j),
            lum: self.lum.element(k),
        }
    }

    /// Flat index of `g_ijk`, lum fastest: `(i·M + j)·R + k`.
    pub fn flat_index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.sat.order() + j) * self.lum.order() + k
    }

    /// Elements in flat-index order.
    pub fn elements(&self) -> impl Iterator<Item = HslElement> + '_ {
        let (n, m, r) = self.orders();
        (0..n).flat_map(move |i| {
            (0..m).flat_map(move |j| (0..r).map(move |k| self.element(i, j, k)))
        })
    }
}

/// Element `g_ijk` of the HSL product group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HslElement {
    pub hue: GroupElement,
    pub sat: GroupElement,
    pub lum: GroupElement,
}

impl HslElement {
    pub fn indices(&self) -> (usize, usize, usize) {
        (self.hue.index(), self.sat.index(), self.lum.index())
    }

    pub fn is_identity(&self) -> bool {
        self.hue.is_identity() && self.sat.is_identity() && self.lum.is_identity()
    }

    /// Componentwise cyclic addition.
    pub fn compose(&self, other: &HslElement) -> HslElement {
        HslElement {
            hue: self.hue.compose(&other.hue),
            sat: self.sat.compose(&other.sat),
            lum: self.lum.compose(&other.lum),
        }
    }

    pub fn inverse(&self) -> HslElement {
        HslElement {
            hue: self.hue.inverse(),
            sat: self.sat.inverse(),
            lum: self.lum.inverse(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Associativity, identity, and inverse, exhaustively in index space.
    fn check_axioms(n: usize) {
        let g = CyclicGroup::new(n);
        let e = g.identity();
        for a in g.elements() {
            assert_eq!(a.compose(&e), a);
            assert_eq!(e.compose(&a), a);
            assert_eq!(a.compose(&a.inverse()), e);
            assert_eq!(a.inverse().compose(&a), e);
            for b in g.elements() {
                for c in g.elements() {
                    assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
                }
            }
        }
    }

    #[test]
    fn cyclic_axioms_up_to_8() {
        for n in 1..=8 {
            check_axioms(n);
        }
    }

    #[test]
    fn product_group_axioms() {
        let g = HslGroup::new(2, 4, 2);
        assert_eq!(g.size(), 16);
        let e = g.identity();
        let els: Vec<_> = g.elements().collect();
        assert_eq!(els.len(), 16);
        for a in &els {
            assert_eq!(a.compose(&e), *a);
            assert_eq!(a.compose(&a.inverse()), e);
            for b in &els {
                for c in &els {
                    assert_eq!(a.compose(b).compose(c), a.compose(&b.compose(c)));
                }
            }
        }
    }

    #[test]
    fn angles_match_indices() {
        let g = CyclicGroup::new(4);
        assert_eq!(g.element(1).angle(), TAU / 4.0);
        assert_eq!(g.element(6).index(), 2);
        assert_eq!(g.element(3).inverse().index(), 1);
    }

    #[test]
    fn flat_index_order_matches_iteration() {
        let g = HslGroup::new(3, 2, 2);
        for (flat, el) in g.elements().enumerate() {
            let (i, j, k) = el.indices();
            assert_eq!(g.flat_index(i, j, k), flat);
        }
    }
}

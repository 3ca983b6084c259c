// Copyright contributors to the qmaxwell project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Affine forms over GF(2) in a bounded set of pivot unknowns.
//!
//! A form `a0 + Σ a_p x_p` lives in a fixed 256-bit word array: bit 0 is the
//! constant, bit `1 + p` is the coefficient of pivot slot `p`. Addition and
//! substitution are a handful of word XORs regardless of how many pivots are
//! active.

use std::fmt;
use std::ops::{Add, AddAssign};

const FORM_WORDS: usize = 4;

/// Number of pivot slots an [`AffineForm`] can address.
pub const MAX_PIVOTS: usize = FORM_WORDS * 64 - 1;

/// Index of a pivot slot inside a form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(transparent)]
pub struct PivotSlot(pub usize);

#[inline]
fn locate(bit: usize) -> (usize, u64) {
    (bit / 64, 1u64 << (bit % 64))
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct AffineForm {
    bits: [u64; FORM_WORDS],
}

impl AffineForm {
    pub const ZERO: AffineForm = AffineForm {
        bits: [0; FORM_WORDS],
    };
    pub const ONE: AffineForm = AffineForm {
        bits: [1, 0, 0, 0],
    };

    pub fn constant(value: bool) -> Self {
        if value {
            Self::ONE
        } else {
            Self::ZERO
        }
    }

    /// The form `x_p`.
    pub fn pivot(slot: PivotSlot) -> Self {
        let mut f = Self::ZERO;
        f.toggle_coefficient(slot);
        f
    }

    /// Builds `constant + Σ x_p` over the given slots.
    pub fn from_terms(constant: bool, slots: &[usize]) -> Self {
        let mut f = Self::constant(constant);
        for &p in slots {
            f.toggle_coefficient(PivotSlot(p));
        }
        f
    }

    #[inline]
    pub fn constant_term(&self) -> bool {
        self.bits[0] & 1 == 1
    }

    #[inline]
    pub fn set_constant(&mut self, value: bool) {
        self.bits[0] = (self.bits[0] & !1) | value as u64;
    }

    #[inline]
    pub fn coefficient(&self, slot: PivotSlot) -> bool {
        assert!(slot.0 < MAX_PIVOTS, "pivot slot {} out of range", slot.0);
        let (w, m) = locate(slot.0 + 1);
        self.bits[w] & m != 0
    }

    #[inline]
    pub fn toggle_coefficient(&mut self, slot: PivotSlot) {
        assert!(slot.0 < MAX_PIVOTS, "pivot slot {} out of range", slot.0);
        let (w, m) = locate(slot.0 + 1);
        self.bits[w] ^= m;
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// True when no pivot appears (the form is `0` or `1`).
    #[inline]
    pub fn is_constant(&self) -> bool {
        self.bits[0] >> 1 == 0 && self.bits[1..].iter().all(|&w| w == 0)
    }

    pub fn pivot_count(&self) -> usize {
        (self.bits[0] >> 1).count_ones() as usize
            + self.bits[1..]
                .iter()
                .map(|w| w.count_ones() as usize)
                .sum::<usize>()
    }

    /// Pivot slots with a nonzero coefficient, in slot order.
    pub fn slots(&self) -> impl Iterator<Item = PivotSlot> + '_ {
        self.bits.iter().enumerate().flat_map(|(k, &w)| {
            let mut rest = if k == 0 { w & !1 } else { w };
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let t = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(PivotSlot(k * 64 + t - 1))
                }
            })
        })
    }

    /// Replaces every occurrence of `x_p` by `replacement`.
    ///
    /// Panics if `replacement` itself mentions `x_p`.
    pub fn substitute(&self, slot: PivotSlot, replacement: &AffineForm) -> AffineForm {
        assert!(
            !replacement.coefficient(slot),
            "self-referential substitution of x{}",
            slot.0
        );
        if !self.coefficient(slot) {
            return *self;
        }
        let mut out = *self;
        out.toggle_coefficient(slot);
        out + *replacement
    }

    pub fn evaluate(&self, assignment: &PivotAssignment) -> bool {
        let mut acc = self.bits[0] & 1;
        for (f, a) in self.bits.iter().zip(&assignment.bits) {
            acc ^= ((f & a).count_ones() & 1) as u64;
        }
        acc == 1
    }
}

impl Add for AffineForm {
    type Output = AffineForm;
    #[inline]
    fn add(mut self, rhs: AffineForm) -> AffineForm {
        self += rhs;
        self
    }
}

impl AddAssign for AffineForm {
    #[inline]
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: AffineForm) {
        for (a, b) in self.bits.iter_mut().zip(rhs.bits) {
            *a ^= b;
        }
    }
}

impl fmt::Display for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<String> = Vec::new();
        if self.constant_term() {
            terms.push("1".to_string());
        }
        terms.extend(self.slots().map(|p| format!("x{}", p.0)));
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl fmt::Debug for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AffineForm({self})")
    }
}

/// Values for the pivot unknowns, in the same bit layout as a form.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Debug)]
pub struct PivotAssignment {
    bits: [u64; FORM_WORDS],
}

impl PivotAssignment {
    /// All pivots set to zero.
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_slots(ones: &[PivotSlot]) -> Self {
        let mut a = Self::zero();
        for &s in ones {
            a.set(s, true);
        }
        a
    }

    pub fn set(&mut self, slot: PivotSlot, value: bool) {
        assert!(slot.0 < MAX_PIVOTS);
        let (w, m) = locate(slot.0 + 1);
        if value {
            self.bits[w] |= m;
        } else {
            self.bits[w] &= !m;
        }
    }

    pub fn get(&self, slot: PivotSlot) -> bool {
        let (w, m) = locate(slot.0 + 1);
        self.bits[w] & m != 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PivotRecord {
    /// Creation timestamp; strictly increasing across the registry's life.
    pub created: u64,
    /// Variable whose guess introduced the pivot.
    pub variable: usize,
}

/// The active pivot set of one decoding instance.
///
/// Slots are handed out lowest-free-first and may be reused after a
/// demotion, so creation order is tracked by timestamp rather than by slot.
#[derive(Clone, Debug)]
pub struct PivotRegistry {
    capacity: usize,
    records: Vec<Option<PivotRecord>>,
    occupied: PivotAssignment,
    active: usize,
    last_created: Option<u64>,
}

impl PivotRegistry {
    pub fn new(capacity: usize) -> Self {
        assert!(
            capacity <= MAX_PIVOTS,
            "pivot capacity {capacity} exceeds {MAX_PIVOTS}"
        );
        Self {
            capacity,
            records: vec![None; capacity],
            occupied: PivotAssignment::zero(),
            active: 0,
            last_created: None,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.active
    }

    pub fn is_empty(&self) -> bool {
        self.active == 0
    }

    pub fn is_full(&self) -> bool {
        self.active == self.capacity
    }

    /// Registers a new pivot for `variable` at time `created`. Returns `None`
    /// when the registry is full.
    pub fn create(&mut self, variable: usize, created: u64) -> Option<PivotSlot> {
        if self.is_full() {
            return None;
        }
        if let Some(last) = self.last_created {
            assert!(created > last, "pivot timestamps must strictly increase");
        }
        let slot = (0..self.capacity).find(|&s| self.records[s].is_none())?;
        self.records[slot] = Some(PivotRecord { created, variable });
        self.occupied.set(PivotSlot(slot), true);
        self.active += 1;
        self.last_created = Some(created);
        Some(PivotSlot(slot))
    }

    /// Removes a pivot from the active set.
    pub fn demote(&mut self, slot: PivotSlot) -> PivotRecord {
        let record = self.records[slot.0]
            .take()
            .unwrap_or_else(|| panic!("demoting inactive pivot x{}", slot.0));
        self.occupied.set(slot, false);
        self.active -= 1;
        record
    }

    pub fn get(&self, slot: PivotSlot) -> Option<&PivotRecord> {
        self.records.get(slot.0).and_then(Option::as_ref)
    }

    pub fn is_active(&self, slot: PivotSlot) -> bool {
        self.get(slot).is_some()
    }

    /// The most recently created pivot appearing in `form`.
    pub fn newest_in(&self, form: &AffineForm) -> Option<PivotSlot> {
        form.slots().max_by_key(|&s| {
            self.get(s)
                .unwrap_or_else(|| panic!("form mentions inactive pivot x{}", s.0))
                .created
        })
    }

    /// Active pivots ordered by creation time.
    pub fn active(&self) -> Vec<(PivotSlot, PivotRecord)> {
        let mut out: Vec<_> = self
            .records
            .iter()
            .enumerate()
            .filter_map(|(s, r)| r.map(|r| (PivotSlot(s), r)))
            .collect();
        out.sort_by_key(|(_, r)| r.created);
        out
    }

    /// True when every pivot in `form` is active.
    pub fn covers(&self, form: &AffineForm) -> bool {
        form.slots().all(|s| self.is_active(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const G: usize = 8;

    fn form_from_bits(bits: u16) -> AffineForm {
        let mut f = AffineForm::constant(bits & 1 == 1);
        for p in 0..G {
            if bits >> (p + 1) & 1 == 1 {
                f.toggle_coefficient(PivotSlot(p));
            }
        }
        f
    }

    fn assignment_from_bits(bits: u16) -> PivotAssignment {
        let mut a = PivotAssignment::zero();
        for p in 0..G {
            a.set(PivotSlot(p), bits >> p & 1 == 1);
        }
        a
    }

    #[test]
    fn addition_examples() {
        let a = AffineForm::from_terms(true, &[1]);
        let b = AffineForm::from_terms(false, &[1, 2]);
        assert_eq!(a + b, AffineForm::from_terms(true, &[2]));
        assert_eq!(a + a, AffineForm::ZERO);
        assert_eq!(a + AffineForm::ZERO, a);
    }

    #[test]
    fn substitution_examples() {
        // x2 := x1 + 1 in x1 + x2
        let f = AffineForm::from_terms(false, &[1, 2]);
        let r = AffineForm::from_terms(true, &[1]);
        assert_eq!(f.substitute(PivotSlot(2), &r), AffineForm::ONE);
        let g = AffineForm::from_terms(true, &[0]);
        assert_eq!(g.substitute(PivotSlot(5), &r), g);
    }

    #[test]
    #[should_panic(expected = "self-referential")]
    fn substitution_rejects_self_reference() {
        let f = AffineForm::pivot(PivotSlot(1));
        f.substitute(PivotSlot(1), &AffineForm::pivot(PivotSlot(1)));
    }

    #[test]
    fn evaluation_examples() {
        let any = assignment_from_bits(0b1011_0110);
        assert!(AffineForm::ONE.evaluate(&any));
        let x1 = AffineForm::pivot(PivotSlot(1));
        assert!(x1.evaluate(&PivotAssignment::from_slots(&[PivotSlot(1)])));
        let f = AffineForm::from_terms(true, &[1, 3]);
        assert!(f.evaluate(&PivotAssignment::from_slots(&[PivotSlot(1), PivotSlot(3)])));
    }

    #[test]
    fn structural_queries() {
        let mut reg = PivotRegistry::new(4);
        let x1 = reg.create(10, 1).unwrap();
        let x3 = reg.create(11, 2).unwrap();
        assert!(AffineForm::ZERO.is_zero());
        assert_eq!(reg.newest_in(&AffineForm::ZERO), None);
        let f = AffineForm::pivot(x1) + AffineForm::pivot(x3);
        assert_eq!(reg.newest_in(&f), Some(x3));
        assert!(!AffineForm::ONE.is_zero());
        assert_eq!(reg.newest_in(&AffineForm::ONE), None);
    }

    #[test]
    fn newest_follows_timestamps_after_slot_reuse() {
        let mut reg = PivotRegistry::new(3);
        let a = reg.create(0, 1).unwrap();
        let b = reg.create(1, 2).unwrap();
        reg.demote(a);
        let c = reg.create(2, 3).unwrap();
        assert_eq!(c, a, "lowest free slot is reused");
        let f = AffineForm::pivot(b) + AffineForm::pivot(c);
        assert_eq!(reg.newest_in(&f), Some(c));
        assert_eq!(reg.len(), 2);
        assert_eq!(
            reg.active().iter().map(|(s, _)| *s).collect::<Vec<_>>(),
            vec![b, c]
        );
    }

    #[test]
    fn registry_respects_capacity() {
        let mut reg = PivotRegistry::new(1);
        assert!(reg.create(0, 1).is_some());
        assert!(reg.is_full());
        assert!(reg.create(1, 2).is_none());
        let empty = PivotRegistry::new(0);
        assert!(empty.is_full());
    }

    #[test]
    fn display_rendering() {
        assert_eq!(AffineForm::ZERO.to_string(), "0");
        assert_eq!(AffineForm::from_terms(true, &[1, 3]).to_string(), "1 + x1 + x3");
        assert_eq!(AffineForm::pivot(PivotSlot(200)).to_string(), "x200");
    }

    #[test]
    fn high_slots_round_trip() {
        let p = PivotSlot(MAX_PIVOTS - 1);
        let f = AffineForm::pivot(p);
        assert_eq!(f.slots().collect::<Vec<_>>(), vec![p]);
        assert!(f.evaluate(&PivotAssignment::from_slots(&[p])));
        assert_eq!(f.pivot_count(), 1);
        assert!(!f.is_constant());
    }

    proptest! {
        #[test]
        fn addition_is_an_abelian_involution(a in any::<u16>(), b in any::<u16>(), c in any::<u16>()) {
            let (f, g, h) = (form_from_bits(a >> 7), form_from_bits(b >> 7), form_from_bits(c >> 7));
            prop_assert_eq!(f + g, g + f);
            prop_assert_eq!((f + g) + h, f + (g + h));
            prop_assert_eq!(f + f, AffineForm::ZERO);
        }

        #[test]
        fn evaluation_is_additive(a in 0u16..512, b in 0u16..512) {
            let (f, g) = (form_from_bits(a), form_from_bits(b));
            for x in 0u16..(1 << G) {
                let asg = assignment_from_bits(x);
                prop_assert_eq!((f + g).evaluate(&asg), f.evaluate(&asg) ^ g.evaluate(&asg));
            }
        }

        #[test]
        fn substitution_matches_extended_assignment(a in 0u16..512, r in 0u16..512, p in 0usize..G) {
            let f = form_from_bits(a);
            let mut repl = form_from_bits(r);
            if repl.coefficient(PivotSlot(p)) {
                repl.toggle_coefficient(PivotSlot(p));
            }
            let sub = f.substitute(PivotSlot(p), &repl);
            prop_assert!(!sub.coefficient(PivotSlot(p)));
            for x in 0u16..(1 << G) {
                let mut asg = assignment_from_bits(x);
                let value = repl.evaluate(&asg);
                asg.set(PivotSlot(p), value);
                prop_assert_eq!(sub.evaluate(&asg), f.evaluate(&asg));
            }
        }
    }
}

//! Word-RAM kernels on packed fixed-width fields.
//!
//! A machine word holds several fields of `2*log2(w) + 1` bits each. The top
//! bit of every field is a *control bit*, kept clear at rest; setting it
//! before a word-wide subtraction absorbs per-field borrows so that field-wise
//! comparisons never interfere across field boundaries. All kernels below
//! (merge, duplicate detection, insert, delete) work on whole words and never
//! extract individual fields on their hot path.
//!
//! Two layouts are configured: the native 64-bit layout (13-bit fields, four
//! per word) and a 32-bit layout (11-bit fields, two per word) that forces
//! multi-word code paths in tests.

use crate::counters;
use crate::error::{Error, Result};

/// Machine word carrying packed fields.
pub type Word = u64;

/// Shift amounts used to OR-fold the value bits of every field onto its
/// lowest bit. Subset sums of {1,2,4,8} reach every value-bit position of
/// both layouts.
const FOLD_SHIFTS: [u32; 4] = [1, 2, 4, 8];

/// Field geometry plus precomputed masks for one word width.
#[derive(Debug, PartialEq, Eq)]
pub struct FieldLayout {
    word_bits: u32,
    field_width: u32,
    fields_per_word: u32,
    value_bits: u32,
    field_mask: u64,
    value_mask: u64,
    /// All bits of all fields.
    used: u64,
    /// Value bits of all fields (no control bits).
    value_all: u64,
    /// Control bit of every field.
    ctrl: u64,
    /// Lowest bit of every field.
    lsb: u64,
    /// `pair_lo[j]`: fields whose index has bit `j` clear; the lower halves
    /// of compare-exchange pairs at distance `2^j`.
    pair_lo: [u64; 3],
    /// `fold_masks[i]`: per-field destination bits that stay inside their
    /// field when shifting right by `FOLD_SHIFTS[i]`.
    fold_masks: [u64; 4],
}

/// Native layout: 64-bit words, 13-bit fields, four fields per word.
pub static LAYOUT_W64: FieldLayout = FieldLayout::build(64);

/// Test layout: 32-bit word model, 11-bit fields, two fields per word.
/// Words are still stored in `u64` slots; only the low 22 bits are used.
pub static LAYOUT_W32: FieldLayout = FieldLayout::build(32);

impl FieldLayout {
    const fn build(word_bits: u32) -> FieldLayout {
        let log_w = word_bits.trailing_zeros();
        let field_width = 2 * log_w + 1;
        let raw = word_bits / field_width;
        // Largest power of two <= raw, so merge networks stay uniform.
        let mut fields_per_word = 1;
        while fields_per_word * 2 <= raw {
            fields_per_word *= 2;
        }
        let value_bits = field_width - 1;
        let field_mask = (1u64 << field_width) - 1;
        let value_mask = (1u64 << value_bits) - 1;

        let mut used = 0u64;
        let mut ctrl = 0u64;
        let mut lsb = 0u64;
        let mut i = 0;
        while i < fields_per_word {
            used |= field_mask << (i * field_width);
            ctrl |= 1u64 << (i * field_width + value_bits);
            lsb |= 1u64 << (i * field_width);
            i += 1;
        }

        let mut pair_lo = [0u64; 3];
        let mut j = 0;
        while (1 << j) < fields_per_word {
            let d = 1 << j;
            let mut fi = 0;
            while fi < fields_per_word {
                if fi & d == 0 {
                    pair_lo[j as usize] |= field_mask << (fi * field_width);
                }
                fi += 1;
            }
            j += 1;
        }

        let mut fold_masks = [0u64; 4];
        let mut si = 0;
        while si < 4 {
            let s = FOLD_SHIFTS[si];
            if s < field_width {
                let m = (1u64 << (field_width - s)) - 1;
                let mut fi = 0;
                while fi < fields_per_word {
                    fold_masks[si] |= m << (fi * field_width);
                    fi += 1;
                }
            }
            si += 1;
        }

        FieldLayout {
            word_bits,
            field_width,
            fields_per_word,
            value_bits,
            field_mask,
            value_mask,
            used,
            value_all: used & !ctrl,
            ctrl,
            lsb,
            pair_lo,
            fold_masks,
        }
    }

    /// Layout for the given word width (64 or 32).
    pub fn for_word_bits(bits: u32) -> Result<&'static FieldLayout> {
        match bits {
            64 => Ok(&LAYOUT_W64),
            32 => Ok(&LAYOUT_W32),
            _ => Err(Error::InvalidParameter("word width must be 64 or 32")),
        }
    }

    pub fn word_bits(&self) -> u32 {
        self.word_bits
    }

    pub fn field_width(&self) -> u32 {
        self.field_width
    }

    pub fn fields_per_word(&self) -> u32 {
        self.fields_per_word
    }

    /// Largest storable field value, `2^(field_width - 1) - 1`.
    pub fn max_field_value(&self) -> u64 {
        self.value_mask
    }

    /// All field bits of the first `t` fields.
    #[inline]
    fn low_fields_mask(&self, t: usize) -> u64 {
        if t as u32 >= self.fields_per_word {
            self.used
        } else {
            (1u64 << (t as u32 * self.field_width)) - 1
        }
    }

    /// Field-wise compare-exchange of two packed words with clear control
    /// bits: returns (mins, maxes). One subtraction decides every field at
    /// once; the control bits soak up the borrows.
    #[inline]
    fn cmpx(&self, a: u64, b: u64) -> (u64, u64) {
        counters::word_ops(1);
        let t = (a | self.ctrl).wrapping_sub(b);
        let ge = t & self.ctrl; // control bit set iff a_i >= b_i
        let full = ge | (ge - (ge >> (self.field_width - 1)));
        ((b & full) | (a & !full), (a & full) | (b & !full))
    }

    /// Reverse the field order of a word in log2(fields) swap steps.
    #[inline]
    fn reverse_fields(&self, mut x: u64) -> u64 {
        let fw = self.field_width;
        let mut s = 1u32;
        while s < self.fields_per_word {
            let m = self.pair_lo[s.trailing_zeros() as usize];
            x = ((x & m) << (s * fw)) | ((x >> (s * fw)) & m);
            counters::word_ops(1);
            s *= 2;
        }
        x
    }

    /// Sort a word whose fields form a bitonic sequence.
    #[inline]
    fn sort_bitonic_word(&self, mut x: u64) -> u64 {
        let fw = self.field_width;
        let mut d = self.fields_per_word / 2;
        while d >= 1 {
            let m = self.pair_lo[d.trailing_zeros() as usize];
            let a = x & m;
            let b = (x >> (d * fw)) & m;
            let (mn, mx) = self.cmpx(a, b);
            x = mn | (mx << (d * fw));
            if d == 1 {
                break;
            }
            d /= 2;
        }
        x
    }

    /// Batcher merge of two full sorted words: reverse one operand, run the
    /// bitonic network across and then within words. Returns the sorted
    /// (low word, high word) of the union.
    #[inline]
    fn merge_full_words(&self, x: u64, y: u64) -> (u64, u64) {
        counters::word_ops(1);
        let yr = self.reverse_fields(y);
        let (lo, hi) = self.cmpx(x, yr);
        (self.sort_bitonic_word(lo), self.sort_bitonic_word(hi))
    }
}

/// Index of the most significant set bit.
pub fn msb_index(x: Word) -> Result<u32> {
    if x == 0 {
        return Err(Error::ZeroWord);
    }
    counters::word_ops(1);
    Ok(63 - x.leading_zeros())
}

/// A sorted multiset of small values packed several to a word.
///
/// Occupied fields hold values in nondecreasing order across the whole word
/// sequence; tail fields are zero and occupancy is tracked by `len` (zero is
/// a legal stored value). Control bits are clear at rest.
#[derive(Debug, Clone)]
pub struct PackedList {
    words: Vec<u64>,
    len: usize,
    layout: &'static FieldLayout,
}

impl PackedList {
    pub fn new(layout: &'static FieldLayout) -> Self {
        PackedList { words: Vec::new(), len: 0, layout }
    }

    /// Pack a sorted slice of values into fields (LSB-first).
    pub fn from_sorted(values: &[u64], layout: &'static FieldLayout) -> Result<Self> {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        let k = layout.fields_per_word as usize;
        let fw = layout.field_width;
        let mut words = vec![0u64; values.len().div_ceil(k)];
        for (i, &v) in values.iter().enumerate() {
            if v > layout.value_mask {
                return Err(Error::FieldOverflow { value: v, max: layout.value_mask });
            }
            words[i / k] |= v << ((i % k) as u32 * fw);
        }
        Ok(PackedList { words, len: values.len(), layout })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn layout(&self) -> &'static FieldLayout {
        self.layout
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Value stored in field `i`.
    pub fn get(&self, i: usize) -> u64 {
        let k = self.layout.fields_per_word as usize;
        debug_assert!(i < self.len);
        (self.words[i / k] >> ((i % k) as u32 * self.layout.field_width)) & self.layout.field_mask
    }

    /// Unpack into a plain vector.
    pub fn values(&self) -> Vec<u64> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// True iff every control bit and every bit outside the used region is
    /// clear (the at-rest invariant).
    pub fn control_bits_clear(&self) -> bool {
        self.words.iter().all(|&w| w & !self.layout.value_all == 0)
    }

    /// Words of the list with the trailing partial word padded by maximal
    /// sentinel fields, so stream merging can treat every word as full.
    fn padded_words(&self) -> Vec<u64> {
        let lay = self.layout;
        let k = lay.fields_per_word as usize;
        let mut ws = self.words.clone();
        let r = self.len % k;
        if r != 0 {
            let pad = lay.value_all & !lay.low_fields_mask(r);
            *ws.last_mut().unwrap() |= pad;
        }
        ws
    }

    /// Merge two sorted lists into the sorted multiset union.
    ///
    /// Word pairs are merged by the bitonic network in O(log w) word
    /// operations each; the stream loop always consumes the head word with
    /// the smaller first value, which keeps every emitted low word globally
    /// final. Sentinel padding of partial tail words is trimmed at the end
    /// (sentinels equal the maximal field value, so they sort past every
    /// real value and dropping the tail is exact).
    pub fn merge(&self, other: &PackedList) -> Result<PackedList> {
        if !std::ptr::eq(self.layout, other.layout) {
            return Err(Error::LayoutMismatch);
        }
        if self.len == 0 {
            return Ok(other.clone());
        }
        if other.len == 0 {
            return Ok(self.clone());
        }
        let lay = self.layout;
        let k = lay.fields_per_word as usize;
        let a = self.padded_words();
        let b = other.padded_words();
        let total = self.len + other.len;
        let mut out = Vec::with_capacity(a.len() + b.len());

        let (lo, mut carry) = lay.merge_full_words(a[0], b[0]);
        out.push(lo);
        let (mut i, mut j) = (1usize, 1usize);
        while i < a.len() || j < b.len() {
            let take_a = if i < a.len() && j < b.len() {
                a[i] & lay.field_mask <= b[j] & lay.field_mask
            } else {
                i < a.len()
            };
            let w = if take_a {
                i += 1;
                a[i - 1]
            } else {
                j += 1;
                b[j - 1]
            };
            let (lo, hi) = lay.merge_full_words(carry, w);
            out.push(lo);
            carry = hi;
        }
        out.push(carry);

        let need_words = total.div_ceil(k);
        out.truncate(need_words);
        let tail = total - (need_words - 1) * k;
        if tail < k {
            let m = lay.low_fields_mask(tail);
            *out.last_mut().unwrap() &= m;
        }
        Ok(PackedList { words: out, len: total, layout: lay })
    }

    /// Indices `i >= 1` whose field equals its predecessor.
    ///
    /// Per word: shift the sequence one field up (carrying the previous
    /// word's top field in), subtract under set control bits, distill each
    /// field to one bit by OR-folding its value bits, complement, and read
    /// the set bits off one at a time.
    pub fn duplicates(&self) -> Vec<usize> {
        let lay = self.layout;
        let k = lay.fields_per_word as usize;
        let fw = lay.field_width;
        let mut found = Vec::new();
        if self.len < 2 {
            return found;
        }
        let mut prev_top = 0u64;
        for (wi, &wd) in self.words.iter().enumerate() {
            let occupied = k.min(self.len - wi * k);
            let shifted = ((wd << fw) | prev_top) & lay.used;
            prev_top = (wd >> ((k as u32 - 1) * fw)) & lay.field_mask;
            // Zero value bits in a field <=> field equals its predecessor.
            let z = ((wd | lay.ctrl).wrapping_sub(shifted)) & lay.value_all;
            counters::word_ops(2);
            let mut f = z;
            for (si, &s) in FOLD_SHIFTS.iter().enumerate() {
                f |= (f >> s) & lay.fold_masks[si];
                counters::word_ops(1);
            }
            let mut dup = !f & lay.lsb & lay.low_fields_mask(occupied);
            if wi == 0 {
                dup &= !1u64; // field 0 has no predecessor
            }
            let base = found.len();
            while dup != 0 {
                let p = msb_index(dup).expect("nonzero");
                found.push(wi * k + p as usize / fw as usize);
                dup &= !(1u64 << p);
            }
            found[base..].reverse();
        }
        found
    }

    /// Position of the first occupied field with value >= `v`, or `len` if
    /// all fields are smaller. One broadcast compare per word.
    fn successor_position(&self, v: u64) -> usize {
        let lay = self.layout;
        let k = lay.fields_per_word as usize;
        let fw = lay.field_width;
        // One multiplication broadcasts v into every field.
        let bcast = v.wrapping_mul(lay.lsb);
        counters::word_ops(1);
        for (wi, &wd) in self.words.iter().enumerate() {
            let occupied = k.min(self.len - wi * k);
            let ge = ((wd | lay.ctrl).wrapping_sub(bcast)) & lay.ctrl & lay.low_fields_mask(occupied);
            counters::word_ops(1);
            if ge != 0 {
                return wi * k + ge.trailing_zeros() as usize / fw as usize;
            }
        }
        self.len
    }

    /// Insert `v` at its successor position, keeping the list sorted.
    pub fn insert(&mut self, v: u64) -> Result<()> {
        let lay = self.layout;
        if v > lay.value_mask {
            return Err(Error::FieldOverflow { value: v, max: lay.value_mask });
        }
        let pos = self.successor_position(v);
        self.insert_at(pos, v);
        Ok(())
    }

    fn insert_at(&mut self, pos: usize, v: u64) {
        let lay = self.layout;
        let k = lay.fields_per_word as usize;
        let fw = lay.field_width;
        let wi = pos / k;
        if wi == self.words.len() {
            self.words.push(0);
        }
        let mut incoming = v;
        for (idx, w) in self.words.iter_mut().enumerate().skip(wi) {
            let f = if idx == wi { pos % k } else { 0 };
            let top = (*w >> ((k as u32 - 1) * fw)) & lay.field_mask;
            let keep = *w & lay.low_fields_mask(f);
            let moved = (*w & lay.low_fields_mask(k - 1) & !lay.low_fields_mask(f)) << fw;
            *w = keep | moved | (incoming << (f as u32 * fw));
            incoming = top;
            counters::word_ops(1);
        }
        self.len += 1;
        if self.len > self.words.len() * k {
            self.words.push(incoming);
        }
    }

    /// Remove one occurrence of `v`.
    pub fn delete(&mut self, v: u64) -> Result<()> {
        let lay = self.layout;
        if v > lay.value_mask {
            return Err(Error::FieldNotFound(v));
        }
        let pos = self.successor_position(v);
        if pos == self.len || self.get(pos) != v {
            return Err(Error::FieldNotFound(v));
        }
        self.remove_at(pos);
        Ok(())
    }

    fn remove_at(&mut self, pos: usize) {
        let lay = self.layout;
        let k = lay.fields_per_word as usize;
        let fw = lay.field_width;
        let wi = pos / k;
        for idx in wi..self.words.len() {
            let f = if idx == wi { pos % k } else { 0 };
            let w = self.words[idx];
            let next0 = if idx + 1 < self.words.len() {
                self.words[idx + 1] & lay.field_mask
            } else {
                0
            };
            let keep = w & lay.low_fields_mask(f);
            let down = (w >> fw) & !lay.low_fields_mask(f) & lay.used;
            self.words[idx] = keep | down | (next0 << ((k as u32 - 1) * fw));
            counters::word_ops(1);
        }
        self.len -= 1;
        while self.words.len() > self.len.div_ceil(k) {
            self.words.pop();
        }
    }
}

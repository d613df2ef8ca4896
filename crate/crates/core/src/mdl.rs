//! Two-part description length of a labeled database under a pattern model.
//!
//! Model cost:
//!
//! ```text
//! L(M) = L_N(|M| + 1) + sum over entries [ 1 + L_N(k) + sum over clauses ( L_N(s) + log2 C(m, s) ) ]
//! ```
//!
//! Data cost, per entry with support `U`: the occurrences are sent per label
//! group (`bc(n+, u+) + bc(n-, u-)`), every group clause pays `|U| log2 s` to
//! name its designated member (the lowest-id member present), and the cells
//! `(i, designated member)` for `i` in `U` become covered. Whatever is left
//! uncovered is sent column by column over all `n` rows without labels, as
//! `sum_j bc(n, k_j)`. Here `bc(n, k) = log2 C(n, k) + log2(n + 1)`.
//!
//! Since only patterns see the labels, a pattern pays off when its support
//! splits unevenly across the two groups.

use crate::bitmap::InstanceBitmap;
use crate::corpus::{LabeledTransactionSet, TokenId};
use crate::error::{Error, Result};
use crate::pattern::{Pattern, PatternEntry};

/// Normalizer of the universal integer code.
pub const C0: f64 = 2.865064;

/// Smallest gain, in bits, that counts as an improvement.
pub const DEFAULT_EPSILON_GAIN: f64 = 1e-6;

/// Relative tolerance for comparing description lengths.
pub const REL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeConstants {
    pub c0: f64,
    pub epsilon_gain: f64,
}

impl Default for CodeConstants {
    fn default() -> Self {
        Self { c0: C0, epsilon_gain: DEFAULT_EPSILON_GAIN }
    }
}

/// `|a - b| <= 1e-9 * max(|a|, |b|, 1)`
pub fn lengths_agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Sum that depends only on the multiset of terms, not on their order.
pub(crate) fn stable_sum(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    terms.iter().sum()
}

fn universal_bits(value: u64) -> f64 {
    debug_assert!(value >= 1);
    let mut bits = C0.log2();
    let mut x = (value as f64).log2();
    while x > 0.0 {
        bits += x;
        x = x.log2();
    }
    bits
}

/// Rissanen's universal code length for a positive integer.
pub fn universal_int(value: u64) -> Result<f64> {
    if value == 0 {
        return Err(Error::Domain("universal integer code needs a value >= 1".into()));
    }
    Ok(universal_bits(value))
}

/// `log2 C(n, k)` via log-gamma. Requires `k <= n`.
pub fn log2_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    if k == 0 || k == n {
        return 0.0;
    }
    let (n, k) = (n as f64, k as f64);
    let ln = libm::lgamma(n + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(n - k + 1.0);
    (ln / std::f64::consts::LN_2).max(0.0)
}

fn bc(n: usize, k: usize) -> f64 {
    log2_binomial(n as u64, k as u64) + ((n + 1) as f64).log2()
}

/// Bits to send an `n`-bit vector with `k` ones, including `k` itself.
pub fn binomial_code(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::Domain(format!("binomial code needs k <= n, got k={k} n={n}")));
    }
    Ok(bc(n as usize, k as usize))
}

/// Model cost of one entry over a vocabulary of size `m`.
pub fn entry_model_bits(pattern: &Pattern, m: usize) -> Result<f64> {
    let max = pattern.max_token();
    if max >= m {
        return Err(Error::UnknownTokenId(max));
    }
    let mut terms = vec![1.0, universal_bits(pattern.len() as u64)];
    for c in pattern.clauses() {
        terms.push(universal_bits(c.size() as u64));
        terms.push(log2_binomial(m as u64, c.size() as u64));
    }
    Ok(stable_sum(&mut terms))
}

fn count_bits(entries: usize) -> f64 {
    universal_bits(entries as u64 + 1)
}

/// `L(M)` for the given entries over a vocabulary of size `m`.
pub fn model_length(entries: &[PatternEntry], m: usize) -> Result<f64> {
    let mut terms = entries
        .iter()
        .map(|e| entry_model_bits(&e.pattern, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(count_bits(entries.len()) + stable_sum(&mut terms))
}

/// `L(D | M)` computed from scratch, together with the resulting cover.
pub fn data_length<'a>(db: &'a LabeledTransactionSet, entries: &[PatternEntry]) -> Result<(f64, CoverState<'a>)> {
    let mut state = CoverState::new(db);
    for e in entries {
        state.add(e.clone())?;
    }
    Ok((state.data_bits(), state))
}

/// `L(M) + L(D | M)`.
pub fn total_length(db: &LabeledTransactionSet, entries: &[PatternEntry]) -> Result<f64> {
    let model = model_length(entries, db.m())?;
    let (data, _) = data_length(db, entries)?;
    Ok(model + data)
}

/// Support, cover cells and cost terms of one pattern against a database.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub support: InstanceBitmap,
    pub u_plus: usize,
    pub u_minus: usize,
    /// Designated-member cells per token.
    pub cover: Vec<(TokenId, InstanceBitmap)>,
    pub model_bits: f64,
    pub occurrence_bits: f64,
}

impl Layout {
    pub fn new(pattern: &Pattern, db: &LabeledTransactionSet, support: Option<InstanceBitmap>) -> Result<Self> {
        let model_bits = entry_model_bits(pattern, db.m())?;
        let support = match support {
            Some(s) => s,
            None => pattern.support_bitmap(db)?,
        };
        let u = support.count();
        let u_plus = support.and_count(db.group_plus());
        let u_minus = u - u_plus;
        let mut cover = Vec::with_capacity(pattern.token_count());
        let mut terms = vec![bc(db.n_plus(), u_plus), bc(db.n_minus(), u_minus)];
        for c in pattern.clauses() {
            if c.is_group() {
                terms.push(u as f64 * (c.size() as f64).log2());
                let mut remaining = support.clone();
                for &t in c.members() {
                    let col = db.column(t);
                    cover.push((t, remaining.and(col)));
                    remaining.and_not_assign(col);
                }
            } else {
                cover.push((c.members()[0], support.clone()));
            }
        }
        Ok(Self { support, u_plus, u_minus, cover, model_bits, occurrence_bits: stable_sum(&mut terms) })
    }

    fn tokens(&self) -> impl Iterator<Item = TokenId> + '_ {
        self.cover.iter().map(|(t, _)| *t)
    }
}

#[derive(Debug, Clone)]
struct Slot {
    entry: PatternEntry,
    layout: Layout,
}

/// Current model with its cover index, residual counts and cached lengths.
///
/// Mutations keep the caches exact: every cached sum is recomputed from
/// per-entry and per-column terms, so adding and then removing an entry
/// restores bit-identical totals.
#[derive(Debug, Clone)]
pub struct CoverState<'a> {
    db: &'a LabeledTransactionSet,
    slots: Vec<Slot>,
    covered: Vec<Option<InstanceBitmap>>,
    residual: Vec<usize>,
    residual_bits: Vec<f64>,
    model_bits: f64,
    data_bits: f64,
}

impl<'a> CoverState<'a> {
    /// Empty model.
    pub fn new(db: &'a LabeledTransactionSet) -> Self {
        let n = db.n();
        let residual: Vec<usize> = db.columns().iter().map(InstanceBitmap::count).collect();
        let residual_bits = residual.iter().map(|&k| bc(n, k)).collect();
        let mut state = Self {
            db,
            slots: Vec::new(),
            covered: vec![None; db.m()],
            residual,
            residual_bits,
            model_bits: 0.0,
            data_bits: 0.0,
        };
        state.refresh_totals();
        state
    }

    pub fn db(&self) -> &'a LabeledTransactionSet {
        self.db
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &PatternEntry> {
        self.slots.iter().map(|s| &s.entry)
    }

    pub fn entry(&self, idx: usize) -> &PatternEntry {
        &self.slots[idx].entry
    }

    pub fn support(&self, idx: usize) -> &InstanceBitmap {
        &self.slots[idx].layout.support
    }

    pub fn position(&self, pattern: &Pattern) -> Option<usize> {
        self.slots.iter().position(|s| &s.entry.pattern == pattern)
    }

    /// Covered cells of column `token`.
    pub fn covered(&self, token: TokenId) -> InstanceBitmap {
        self.covered[token].clone().unwrap_or_else(|| InstanceBitmap::empty(self.db.n()))
    }

    /// Residual count `k_j`.
    pub fn residual(&self, token: TokenId) -> usize {
        self.residual[token]
    }

    pub fn model_bits(&self) -> f64 {
        self.model_bits
    }

    pub fn data_bits(&self) -> f64 {
        self.data_bits
    }

    pub fn total_bits(&self) -> f64 {
        self.model_bits + self.data_bits
    }

    fn refresh_totals(&mut self) {
        let mut model: Vec<f64> = self.slots.iter().map(|s| s.layout.model_bits).collect();
        self.model_bits = count_bits(self.slots.len()) + stable_sum(&mut model);
        let mut occ: Vec<f64> = self.slots.iter().map(|s| s.layout.occurrence_bits).collect();
        let mut residual = self.residual_bits.clone();
        self.data_bits = stable_sum(&mut occ) + stable_sum(&mut residual);
    }

    fn refresh_column(&mut self, token: TokenId) {
        let mut acc: Option<InstanceBitmap> = None;
        for slot in &self.slots {
            for (t, cells) in &slot.layout.cover {
                if *t == token {
                    match acc.as_mut() {
                        Some(a) => a.or_assign(cells),
                        None => acc = Some(cells.clone()),
                    }
                }
            }
        }
        let covered = acc.as_ref().map_or(0, InstanceBitmap::count);
        self.residual[token] = self.db.column(token).count() - covered;
        self.residual_bits[token] = bc(self.db.n(), self.residual[token]);
        self.covered[token] = acc;
    }

    pub(crate) fn layout(&self, pattern: &Pattern, support: Option<InstanceBitmap>) -> Result<Layout> {
        Layout::new(pattern, self.db, support)
    }

    /// Appends `entry`. Its supports are refreshed from the database.
    pub fn add(&mut self, entry: PatternEntry) -> Result<()> {
        let layout = self.layout(&entry.pattern, None)?;
        self.add_with_layout(entry, layout)
    }

    pub(crate) fn add_with_layout(&mut self, mut entry: PatternEntry, layout: Layout) -> Result<()> {
        if self.position(&entry.pattern).is_some() {
            return Err(Error::AlreadyInModel(format!("{:?}", entry.pattern)));
        }
        entry.u_plus = layout.u_plus;
        entry.u_minus = layout.u_minus;
        let tokens: Vec<TokenId> = layout.tokens().collect();
        self.slots.push(Slot { entry, layout });
        for t in tokens {
            self.refresh_column(t);
        }
        self.refresh_totals();
        Ok(())
    }

    /// Removes and returns entry `idx`.
    pub fn remove(&mut self, idx: usize) -> PatternEntry {
        let slot = self.slots.remove(idx);
        for t in slot.layout.tokens() {
            self.refresh_column(t);
        }
        self.refresh_totals();
        slot.entry
    }

    /// Change in total length (new minus old) for removing `remove` and
    /// adding `add`, touching only the affected columns.
    pub(crate) fn edit_delta(&self, remove: Option<usize>, add: Option<&Layout>) -> f64 {
        let n = self.db.n();
        let removed = remove.map(|i| &self.slots[i].layout);
        let new_len = self.slots.len() - usize::from(removed.is_some()) + usize::from(add.is_some());
        let mut terms = vec![count_bits(new_len), -count_bits(self.slots.len())];
        if let Some(r) = removed {
            terms.push(-r.model_bits);
            terms.push(-r.occurrence_bits);
        }
        if let Some(a) = add {
            terms.push(a.model_bits);
            terms.push(a.occurrence_bits);
        }

        let mut affected: Vec<TokenId> = removed.into_iter().flat_map(Layout::tokens).collect();
        affected.extend(add.into_iter().flat_map(Layout::tokens));
        affected.sort_unstable();
        affected.dedup();

        for t in affected {
            let touched_by_removed = removed.is_some_and(|r| r.tokens().any(|x| x == t));
            let added_cells: Vec<&InstanceBitmap> = add
                .into_iter()
                .flat_map(|a| a.cover.iter().filter(|(x, _)| *x == t).map(|(_, c)| c))
                .collect();
            let new_covered_count = if touched_by_removed {
                let mut acc = InstanceBitmap::empty(n);
                for (i, slot) in self.slots.iter().enumerate() {
                    if Some(i) == remove {
                        continue;
                    }
                    for (x, cells) in &slot.layout.cover {
                        if *x == t {
                            acc.or_assign(cells);
                        }
                    }
                }
                for c in &added_cells {
                    acc.or_assign(c);
                }
                acc.count()
            } else {
                let current = self.db.column(t).count() - self.residual[t];
                match &self.covered[t] {
                    Some(cov) => current + added_cells.iter().map(|c| c.and_not_count(cov)).sum::<usize>(),
                    None => added_cells.iter().map(|c| c.count()).sum(),
                }
            };
            let k = self.db.column(t).count() - new_covered_count;
            terms.push(bc(n, k) - self.residual_bits[t]);
        }
        stable_sum(&mut terms)
    }

    /// Decrease in total length from adding `pattern`.
    pub fn gain(&self, pattern: &Pattern) -> Result<f64> {
        if self.position(pattern).is_some() {
            return Err(Error::AlreadyInModel(format!("{pattern:?}")));
        }
        let layout = self.layout(pattern, None)?;
        Ok(-self.edit_delta(None, Some(&layout)))
    }

    /// Decrease in total length from removing entry `idx`.
    pub fn removal_gain(&self, idx: usize) -> f64 {
        -self.edit_delta(Some(idx), None)
    }

    /// Decrease in total length from replacing entry `idx` with `pattern`.
    pub fn replace_gain(&self, idx: usize, pattern: &Pattern) -> Result<f64> {
        if self.position(pattern).is_some() {
            return Err(Error::AlreadyInModel(format!("{pattern:?}")));
        }
        let layout = self.layout(pattern, None)?;
        Ok(-self.edit_delta(Some(idx), Some(&layout)))
    }

    /// Group-wise supports `(u+, u-)` of `pattern`.
    pub fn supports(&self, pattern: &Pattern) -> Result<(usize, usize)> {
        let s = pattern.support_bitmap(self.db)?;
        let plus = s.and_count(self.db.group_plus());
        Ok((plus, s.count() - plus))
    }
}

//! Local classical players: lookup tables over (menu slot, η, ξ).

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_menu_distinguishable, infer_direction, PlayerContext};
use crate::cvalspin::SpinModel;
use crate::error::{Error, Result};
use crate::game::{PlayerView, Strategy, Triple};
use crate::hilbert::{Direction, Particle};
use crate::rng::Stream;

const ETAS: usize = 4;

/// One table cell in the JSON exchange format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub slot: usize,
    pub eta_index: usize,
    pub xi_index: usize,
    pub value: i8,
}

/// A total map (slot, η, ξ-index) → ±1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicTable {
    slots: usize,
    xi_len: usize,
    values: Vec<i8>,
}

impl DeterministicTable {
    fn offset(&self, slot: usize, eta_index: usize, xi_index: usize) -> Option<usize> {
        (slot < self.slots && eta_index < ETAS && xi_index < self.xi_len)
            .then(|| (slot * ETAS + eta_index) * self.xi_len + xi_index)
    }

    pub fn from_fn(
        slots: usize,
        xi_len: usize,
        mut f: impl FnMut(usize, usize, usize) -> i8,
    ) -> Result<Self> {
        if slots == 0 || xi_len == 0 {
            return Err(Error::Domain("table dimensions must be positive".into()));
        }
        let mut values = Vec::with_capacity(slots * ETAS * xi_len);
        for slot in 0..slots {
            for eta in 0..ETAS {
                for xi in 0..xi_len {
                    let v = f(slot, eta, xi);
                    if v != 1 && v != -1 {
                        return Err(Error::Domain(format!("table value {v} is not ±1")));
                    }
                    values.push(v);
                }
            }
        }
        Ok(DeterministicTable {
            slots,
            xi_len,
            values,
        })
    }

    pub fn constant(value: i8, slots: usize, xi_len: usize) -> Result<Self> {
        DeterministicTable::from_fn(slots, xi_len, |_, _, _| value)
    }

    pub fn random<R: Rng + ?Sized>(slots: usize, xi_len: usize, rng: &mut R) -> Self {
        DeterministicTable::from_fn(slots, xi_len, |_, _, _| if rng.gen() { 1 } else { -1 })
            .expect("positive dimensions")
    }

    /// Answers the sign of the player's own s̃ (ties to +1). Labels outside
    /// the Born support never occur in play and are filled with +1.
    pub fn sign_of_s_tilde(
        model: &SpinModel,
        menu: &[Direction],
        particle: Particle,
    ) -> Result<Self> {
        let xi = model.xi().support().to_vec();
        let mut failure = None;
        let table = DeterministicTable::from_fn(menu.len(), xi.len(), |slot, eta, k| {
            if !model.in_support(eta) {
                return 1;
            }
            match model.cval_spin(eta, xi[k], &menu[slot], particle) {
                Ok(s) if s >= 0.0 => 1,
                Ok(_) => -1,
                Err(e) => {
                    failure.get_or_insert(e);
                    1
                }
            }
        })?;
        match failure {
            Some(e) => Err(e),
            None => Ok(table),
        }
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn xi_len(&self) -> usize {
        self.xi_len
    }

    pub fn get(&self, slot: usize, eta_index: usize, xi_index: usize) -> Result<i8> {
        self.offset(slot, eta_index, xi_index)
            .map(|i| self.values[i])
            .ok_or(Error::UnknownTableKey {
                slot,
                eta_index,
                xi_index,
            })
    }

    pub fn set(&mut self, slot: usize, eta_index: usize, xi_index: usize, value: i8) -> Result<()> {
        if value != 1 && value != -1 {
            return Err(Error::Domain(format!("table value {value} is not ±1")));
        }
        let i = self
            .offset(slot, eta_index, xi_index)
            .ok_or(Error::UnknownTableKey {
                slot,
                eta_index,
                xi_index,
            })?;
        self.values[i] = value;
        Ok(())
    }

    /// Pure lookup of the answer for a triple received at `slot`.
    pub fn respond(&self, triple: &Triple, slot: usize) -> Result<i8> {
        self.get(slot, triple.eta_index, triple.xi_index)
    }

    pub fn entries(&self) -> Vec<TableEntry> {
        let mut out = Vec::with_capacity(self.values.len());
        for slot in 0..self.slots {
            for eta_index in 0..ETAS {
                for xi_index in 0..self.xi_len {
                    out.push(TableEntry {
                        slot,
                        eta_index,
                        xi_index,
                        value: self.get(slot, eta_index, xi_index).expect("in range"),
                    });
                }
            }
        }
        out
    }

    /// Rebuilds a table from entries; every key of the rectangle spanned by
    /// the largest indices must appear exactly once.
    pub fn from_entries(entries: &[TableEntry]) -> Result<Self> {
        let slots = entries.iter().map(|e| e.slot + 1).max().unwrap_or(0);
        let xi_len = entries.iter().map(|e| e.xi_index + 1).max().unwrap_or(0);
        if entries.iter().any(|e| e.eta_index >= ETAS) {
            return Err(Error::Domain("eta_index must be below 4".into()));
        }
        let mut seen = BTreeSet::new();
        for e in entries {
            if !seen.insert((e.slot, e.eta_index, e.xi_index)) {
                return Err(Error::Domain(format!(
                    "duplicate entry for slot {}, eta {}, xi index {}",
                    e.slot, e.eta_index, e.xi_index
                )));
            }
        }
        let mut table = DeterministicTable::constant(1, slots.max(1), xi_len.max(1))?;
        if seen.len() != slots * ETAS * xi_len {
            let missing = (0..slots)
                .flat_map(|s| (0..ETAS).flat_map(move |e| (0..xi_len).map(move |x| (s, e, x))))
                .find(|k| !seen.contains(k))
                .expect("a key is missing");
            return Err(Error::UnknownTableKey {
                slot: missing.0,
                eta_index: missing.1,
                xi_index: missing.2,
            });
        }
        for e in entries {
            table.set(e.slot, e.eta_index, e.xi_index, e.value)?;
        }
        Ok(table)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.entries())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let entries: Vec<TableEntry> = serde_json::from_str(text)?;
        DeterministicTable::from_entries(&entries)
    }
}

impl Serialize for DeterministicTable {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.entries().serialize(serializer)
    }
}

/// Free-function form of [`DeterministicTable::respond`].
pub fn classical_respond(table: &DeterministicTable, triple: &Triple, slot: usize) -> Result<i8> {
    table.respond(triple, slot)
}

/// Probability of answering +1 for each (slot, η, ξ-index).
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticTable {
    slots: usize,
    xi_len: usize,
    prob_plus: Vec<f64>,
}

impl StochasticTable {
    pub fn uniform(p: f64, slots: usize, xi_len: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
        }
        if slots == 0 || xi_len == 0 {
            return Err(Error::Domain("table dimensions must be positive".into()));
        }
        Ok(StochasticTable {
            slots,
            xi_len,
            prob_plus: vec![p; slots * ETAS * xi_len],
        })
    }

    pub fn prob_plus(&self, slot: usize, eta_index: usize, xi_index: usize) -> Result<f64> {
        if slot >= self.slots || eta_index >= ETAS || xi_index >= self.xi_len {
            return Err(Error::UnknownTableKey {
                slot,
                eta_index,
                xi_index,
            });
        }
        Ok(self.prob_plus[(slot * ETAS + eta_index) * self.xi_len + xi_index])
    }

    pub fn set(&mut self, slot: usize, eta_index: usize, xi_index: usize, p: f64) -> Result<()> {
        self.prob_plus(slot, eta_index, xi_index)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
        }
        self.prob_plus[(slot * ETAS + eta_index) * self.xi_len + xi_index] = p;
        Ok(())
    }
}

/// Ignores its input entirely.
#[derive(Debug, Clone, Copy)]
pub struct ConstantStrategy(pub i32);

impl Strategy for ConstantStrategy {
    fn id(&self) -> String {
        format!("constant:{:+}", self.0)
    }

    fn respond(&mut self, _view: &PlayerView<'_>, _rng: &mut Stream) -> Result<i32> {
        Ok(self.0)
    }
}

/// Infers its slot from s̃, then looks the answer up.
#[derive(Debug, Clone)]
pub struct TableStrategy {
    name: String,
    ctx: PlayerContext,
    table: DeterministicTable,
}

impl TableStrategy {
    pub fn new(
        name: impl Into<String>,
        ctx: PlayerContext,
        table: DeterministicTable,
    ) -> Result<Self> {
        check_menu_distinguishable(&ctx.model, &ctx.menu, ctx.particle, ctx.tol)?;
        if table.slots() != ctx.menu.len() || table.xi_len() != ctx.model.xi().len() {
            return Err(Error::InvalidConfig(format!(
                "table is {}×4×{} but the menu has {} slots and ξ has {} values",
                table.slots(),
                table.xi_len(),
                ctx.menu.len(),
                ctx.model.xi().len()
            )));
        }
        Ok(TableStrategy {
            name: name.into(),
            ctx,
            table,
        })
    }

    pub fn table(&self) -> &DeterministicTable {
        &self.table
    }
}

impl Strategy for TableStrategy {
    fn id(&self) -> String {
        self.name.clone()
    }

    fn respond(&mut self, view: &PlayerView<'_>, _rng: &mut Stream) -> Result<i32> {
        let slot = infer_direction(
            &self.ctx.model,
            view.triple,
            view.menu,
            self.ctx.particle,
            self.ctx.tol,
        )?;
        Ok(i32::from(self.table.respond(view.triple, slot)?))
    }
}

/// Local randomized responses drawn from the player's own stream.
#[derive(Debug, Clone)]
pub struct StochasticStrategy {
    name: String,
    ctx: PlayerContext,
    table: StochasticTable,
}

impl StochasticStrategy {
    pub fn new(
        name: impl Into<String>,
        ctx: PlayerContext,
        table: StochasticTable,
    ) -> Result<Self> {
        check_menu_distinguishable(&ctx.model, &ctx.menu, ctx.particle, ctx.tol)?;
        Ok(StochasticStrategy {
            name: name.into(),
            ctx,
            table,
        })
    }
}

impl Strategy for StochasticStrategy {
    fn id(&self) -> String {
        self.name.clone()
    }

    fn respond(&mut self, view: &PlayerView<'_>, rng: &mut Stream) -> Result<i32> {
        let slot = infer_direction(
            &self.ctx.model,
            view.triple,
            view.menu,
            self.ctx.particle,
            self.ctx.tol,
        )?;
        let p = self
            .table
            .prob_plus(slot, view.triple.eta_index, view.triple.xi_index)?;
        Ok(if rng.gen::<f64>() < p { 1 } else { -1 })
    }
}

//! Elementary cellular automata started from a single live cell.
//!
//! `eca_row_fn(rule, n)` is row `n` read over the window `[-n, n]`, leftmost
//! cell most significant.

use num_bigint::BigUint;
use num_traits::Zero;

use super::{arg_u64, Role, ZooEntry};
use crate::combinators::{incremental_enumerator, restart_enumerator, ProgramHandle};
use crate::costvm::{CostedProgram, Step, Stop, Vm};
use crate::etm::Oracle;

/// A row with finite support over a uniform background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    /// Position of `cells[0]`.
    pub offset: i64,
    pub cells: Vec<bool>,
    /// State of every cell outside `cells`.
    pub background: bool,
}

impl Row {
    pub fn single() -> Row {
        Row { offset: 0, cells: vec![true], background: false }
    }

    pub fn get(&self, pos: i64) -> bool {
        usize::try_from(pos - self.offset).ok().and_then(|i| self.cells.get(i)).copied().unwrap_or(self.background)
    }

    /// Leftmost and rightmost cells that differ from the background.
    pub fn support(&self) -> Option<(i64, i64)> {
        let first = self.cells.iter().position(|&c| c != self.background)?;
        let last = self.cells.iter().rposition(|&c| c != self.background)?;
        Some((self.offset + first as i64, self.offset + last as i64))
    }

    /// Cells `lo..=hi` as a natural, `lo` most significant.
    pub fn window_value(&self, lo: i64, hi: i64) -> BigUint {
        (lo..=hi).fold(BigUint::zero(), |acc, p| (acc << 1u32) | BigUint::from(self.get(p) as u32))
    }
}

fn apply(rule: u8, l: bool, c: bool, r: bool) -> bool {
    let idx = (l as u8) << 2 | (c as u8) << 1 | r as u8;
    rule >> idx & 1 == 1
}

/// One synchronous update. The stored span grows by one cell per side.
pub fn eca_step(row: &Row, rule: u8) -> Row {
    let lo = row.offset - 1;
    let hi = row.offset + row.cells.len() as i64;
    let cells = (lo..=hi).map(|p| apply(rule, row.get(p - 1), row.get(p), row.get(p + 1))).collect();
    let b = row.background;
    Row { offset: lo, cells, background: apply(rule, b, b, b) }
}

pub fn eca_row(rule: u8, n_val: u64) -> Row {
    (0..n_val).fold(Row::single(), |row, _| eca_step(&row, rule))
}

pub fn eca_row_fn(rule: u8, n_val: u64) -> BigUint {
    let w = n_val as i64;
    eca_row(rule, n_val).window_value(-w, w)
}

/// Dense reference: a fixed array of `4n+3` cells, dead outside. Errors from
/// the hard edges travel one cell per step, so after `n` steps the cells in
/// `[-n, n]` are exact.
pub fn oracle_eca_row(rule: u8, n_val: u64) -> BigUint {
    let half = 2 * n_val as usize + 1;
    let mut cells = vec![false; 2 * half + 1];
    cells[half] = true;
    for _ in 0..n_val {
        let prev = cells.clone();
        for (j, c) in cells.iter_mut().enumerate() {
            let l = j.checked_sub(1).map(|k| prev[k]).unwrap_or(false);
            let r = prev.get(j + 1).copied().unwrap_or(false);
            let idx = (l as u8) * 4 + (prev[j] as u8) * 2 + r as u8;
            *c = (rule >> idx) & 1 == 1;
        }
    }
    let lo = half - n_val as usize;
    let hi = half + n_val as usize;
    cells[lo..=hi].iter().fold(BigUint::zero(), |acc, &b| (acc << 1u32) | BigUint::from(b as u32))
}

/// One generation over a `width`-cell span: read it, write the widened span.
fn charge_generation(vm: &mut Vm, width: u64) -> Step {
    vm.read_mem(width)?;
    vm.write_mem(width + 2)?;
    vm.tick()
}

pub fn entry(rule: u8) -> ZooEntry {
    let function = format!("eca{rule}");
    let direct = ProgramHandle::costvm(CostedProgram::new(format!("{function}.direct"), function.clone(), 1, move |vm| {
        let n_val = arg_u64(vm, 0)?;
        let mut row = Row::single();
        for _ in 0..n_val {
            charge_generation(vm, row.cells.len() as u64)?;
            row = eca_step(&row, rule);
        }
        let w = n_val as i64;
        vm.read_mem(2 * n_val + 1)?;
        vm.emit_record(&row.window_value(-w, w))
    }));
    let restart = restart_enumerator(&direct).expect("costed programs restart");
    let oracle = Oracle::new(function.clone(), move |k| oracle_eca_row(rule, k));
    let mut e = ZooEntry::new(&function, oracle, "2*n + 1", 128, "ECA row over the window [-n, n]")
        .with(Role::Direct, "direct", direct)
        .with(Role::Enumerator, "restart", restart);
    // With a quiescent rule the window of row i-1 holds its whole support,
    // so row i follows from f(i-1) alone.
    if rule & 1 == 0 {
        let step = ProgramHandle::costvm(CostedProgram::new(format!("{function}.step"), function.clone(), 2, move |vm| {
            let i = arg_u64(vm, 0)?;
            let prev = vm.arg(1)?;
            let width = 2 * i - 1;
            if prev.bits() > width {
                return Err(Stop::Fault(format!("f({}) wider than its window", i - 1)));
            }
            let half = i as i64 - 1;
            let cells = (0..width).rev().map(|b| prev.bit(b)).collect();
            let row = Row { offset: -half, cells, background: false };
            charge_generation(vm, width)?;
            let next = eca_step(&row, rule);
            vm.emit_record(&next.window_value(-half - 1, half + 1))
        }));
        let inc = incremental_enumerator(&function, eca_row_fn(rule, 1), &step);
        e = e.with(Role::Step, "step", step).with(Role::Enumerator, "incremental", inc);
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::n;

    fn bits(row: &Row) -> String {
        let (lo, hi) = row.support().unwrap();
        (lo..=hi).map(|p| if row.get(p) { '1' } else { '0' }).collect()
    }

    #[test]
    fn single_cell_updates() {
        assert_eq!(bits(&eca_step(&Row::single(), 30)), "111");
        assert_eq!(bits(&eca_step(&Row::single(), 110)), "11");
        assert_eq!(eca_step(&Row::single(), 0).support(), None);
    }

    #[test]
    fn row_values() {
        assert_eq!(eca_row_fn(30, 0), n(1));
        assert_eq!(eca_row_fn(30, 1), n(7));
        // rule 110, two steps: 00100 → 01100 → 11100
        assert_eq!(eca_row_fn(110, 2), n(0b11100));
        for rule in [30u8, 90, 110, 1, 255] {
            for k in 0..20 {
                assert_eq!(eca_row_fn(rule, k), oracle_eca_row(rule, k), "rule {rule} n {k}");
            }
        }
    }
}

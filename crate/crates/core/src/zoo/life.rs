//! Conway's Game of Life and the survivor count `life_alive_count`.
//!
//! Initial configuration `m ≥ 1`: the binary expansion of `m`, most
//! significant bit first, laid row-major into a square of side
//! `ceil(sqrt(bitlen(m)))`; `1` is a live cell. `life_alive_count(n)` counts
//! the configurations `m ≤ n` that still have a live cell after `n`
//! generations. Simulations pad the box by `n` dead cells per side, which a
//! pattern cannot outgrow in `n` generations.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;

use super::{arg_u64, n, succ, Role, ZooEntry};
use crate::combinators::{restart_enumerator, ProgramHandle};
use crate::costvm::{CostedProgram, Step, Vm};
use crate::etm::Oracle;
use crate::natural::{bit_len, encode_bits};

/// A finite rectangular grid; cells beyond the edge are dead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    width: usize,
    height: usize,
    cells: Vec<bool>,
}

impl Grid {
    pub fn new(width: usize, height: usize) -> Grid {
        Grid { width, height, cells: vec![false; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: isize, y: isize) -> bool {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return false;
        }
        self.cells[y as usize * self.width + x as usize]
    }

    pub fn set(&mut self, x: usize, y: usize, alive: bool) {
        self.cells[y * self.width + x] = alive;
    }

    pub fn population(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// The same pattern with `pad` dead cells added on every side.
    pub fn padded(&self, pad: usize) -> Grid {
        let mut g = Grid::new(self.width + 2 * pad, self.height + 2 * pad);
        for y in 0..self.height {
            for x in 0..self.width {
                g.set(x + pad, y + pad, self.get(x as isize, y as isize));
            }
        }
        g
    }

    /// One generation (B3/S23).
    pub fn step(&self) -> Grid {
        let mut next = Grid::new(self.width, self.height);
        for y in 0..self.height as isize {
            for x in 0..self.width as isize {
                let mut live = 0;
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        if (dx, dy) != (0, 0) && self.get(x + dx, y + dy) {
                            live += 1;
                        }
                    }
                }
                let alive = matches!((self.get(x, y), live), (true, 2) | (_, 3));
                next.set(x as usize, y as usize, alive);
            }
        }
        next
    }

    /// Live cells relative to the top-left live cell's bounding corner.
    pub fn shape(&self) -> Vec<(usize, usize)> {
        let live: Vec<(usize, usize)> =
            (0..self.height).flat_map(|y| (0..self.width).map(move |x| (x, y))).filter(|&(x, y)| self.cells[y * self.width + x]).collect();
        let min_x = live.iter().map(|p| p.0).min().unwrap_or(0);
        let min_y = live.iter().map(|p| p.1).min().unwrap_or(0);
        live.into_iter().map(|(x, y)| (x - min_x, y - min_y)).collect()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for y in 0..self.height {
            let row: String = (0..self.width).map(|x| if self.cells[y * self.width + x] { '#' } else { '.' }).collect();
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl FromStr for Grid {
    type Err = String;

    /// Rows of `.` (dead) and `#` (alive), all the same length.
    fn from_str(text: &str) -> Result<Grid, String> {
        let rows: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut g = Grid::new(width, rows.len());
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(format!("row {} has a different width", y + 1));
            }
            for (x, c) in row.chars().enumerate() {
                match c {
                    '#' => g.set(x, y, true),
                    '.' => {}
                    other => return Err(format!("unexpected `{other}` in row {}", y + 1)),
                }
            }
        }
        Ok(g)
    }
}

/// The shipped pattern corpus, by name.
pub const PATTERNS: [(&str, &str); 5] = [
    ("block", include_str!("../../patterns/block.txt")),
    ("blinker", include_str!("../../patterns/blinker.txt")),
    ("beehive", include_str!("../../patterns/beehive.txt")),
    ("toad", include_str!("../../patterns/toad.txt")),
    ("glider", include_str!("../../patterns/glider.txt")),
];

pub fn pattern(name: &str) -> Option<Grid> {
    PATTERNS.iter().find(|(n, _)| *n == name).map(|(_, text)| text.parse().expect("shipped patterns parse"))
}

/// Side of the box holding configuration `m`.
pub fn config_side(m: &BigUint) -> usize {
    let len = bit_len(m) as usize;
    (1..).find(|s| s * s >= len).expect("some square fits")
}

pub fn life_config(m: &BigUint) -> Grid {
    let side = config_side(m);
    let mut g = Grid::new(side, side);
    for (idx, bit) in encode_bits(m).into_iter().enumerate() {
        g.set(idx % side, idx / side, bit);
    }
    g
}

fn survives(m: u64, generations: u64) -> bool {
    let mut g = life_config(&BigUint::from(m)).padded(generations as usize);
    for _ in 0..generations {
        g = g.step();
    }
    g.population() > 0
}

pub fn life_alive_count(n_val: u64) -> u64 {
    (1..=n_val).filter(|&m| survives(m, n_val)).count() as u64
}

/// Reference on an unbounded plane: a set of live coordinates.
pub fn oracle_life_alive_count(n_val: u64) -> u64 {
    let mut count = 0;
    for m in 1..=n_val {
        let bits: Vec<bool> = format!("{m:b}").chars().map(|c| c == '1').collect();
        let side = (bits.len() as f64).sqrt().ceil() as i64;
        let mut live: HashSet<(i64, i64)> =
            bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| (i as i64 % side, i as i64 / side)).collect();
        for _ in 0..n_val {
            let mut candidates: HashSet<(i64, i64)> = HashSet::new();
            for &(x, y) in &live {
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        candidates.insert((x + dx, y + dy));
                    }
                }
            }
            live = candidates
                .into_iter()
                .filter(|&(x, y)| {
                    let k = (-1..=1)
                        .flat_map(|dy| (-1..=1).map(move |dx| (dx, dy)))
                        .filter(|&(dx, dy)| (dx, dy) != (0, 0) && live.contains(&(x + dx, y + dy)))
                        .count();
                    k == 3 || (k == 2 && live.contains(&(x, y)))
                })
                .collect();
        }
        if !live.is_empty() {
            count += 1;
        }
    }
    count
}

/// Costed survivor count: each generation reads and rewrites the padded grid.
fn count_program(vm: &mut Vm, n_val: u64) -> Step<BigUint> {
    let mut count = BigUint::zero();
    let mut m = n(1);
    for _ in 1..=n_val {
        vm.read_mem(bit_len(&m))?;
        let mut g = life_config(&m).padded(n_val as usize);
        let cells = (g.width() * g.height()) as u64;
        for _ in 0..n_val {
            vm.read_mem(cells)?;
            vm.write_mem(cells)?;
            vm.tick()?;
            g = g.step();
        }
        vm.read_mem(cells)?;
        if g.population() > 0 {
            count = succ(vm, &count)?;
        }
        m = succ(vm, &m)?;
    }
    Ok(count)
}

pub fn entry() -> ZooEntry {
    let direct = ProgramHandle::costvm(CostedProgram::new("life.direct", "life", 1, |vm| {
        let n_val = arg_u64(vm, 0)?;
        let c = count_program(vm, n_val)?;
        vm.emit_record(&c)
    }));
    let restart = restart_enumerator(&direct).expect("costed programs restart");
    ZooEntry::new("life", Oracle::new("life", |k| n(oracle_life_alive_count(k))), "log", 8, "configurations alive after n generations")
        .with(Role::Direct, "direct", direct)
        .with(Role::Enumerator, "restart", restart)
}

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};

use super::CouplingError;
use crate::gmodel::{Interval, Word};

static HORIZON_WARNED: AtomicBool = AtomicBool::new(false);

/// How `b_n` continues past the explicit prefix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailRule {
    /// Reuse the last prefix value (logs a warning the first time).
    RepeatLast,
    Constant(usize),
    /// `B_n = ⌈lⁿ/(l-1)⌉`, so `b_n = B_n - B_{n-1}` with `B_0 = 0`.
    Geometric { l: f64 },
}

/// Block lengths `b_1, b_2, ...` with partial sums `B_n` and blocks
/// `J_n = [1 - B_n, -B_{n-1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSchedule {
    prefix: Vec<usize>,
    tail: TailRule,
}

impl BlockSchedule {
    pub fn constant(b: usize) -> Result<Self, CouplingError> {
        if b == 0 {
            return Err(CouplingError::InvalidSchedule("block length 0".into()));
        }
        Ok(Self {
            prefix: Vec::new(),
            tail: TailRule::Constant(b),
        })
    }

    pub fn explicit(prefix: Vec<usize>) -> Result<Self, CouplingError> {
        Self::with_tail(prefix, TailRule::RepeatLast)
    }

    pub fn geometric(l: f64) -> Result<Self, CouplingError> {
        Self::with_tail(Vec::new(), TailRule::Geometric { l })
    }

    pub fn with_tail(prefix: Vec<usize>, tail: TailRule) -> Result<Self, CouplingError> {
        if prefix.contains(&0) {
            return Err(CouplingError::InvalidSchedule("block length 0".into()));
        }
        match tail {
            TailRule::RepeatLast if prefix.is_empty() => {
                return Err(CouplingError::InvalidSchedule("empty schedule".into()))
            }
            TailRule::Constant(0) => {
                return Err(CouplingError::InvalidSchedule("block length 0".into()))
            }
            TailRule::Geometric { l } if !(l > 1.0 && l.is_finite()) => {
                return Err(CouplingError::InvalidSchedule(format!(
                    "geometric ratio {l} must exceed 1"
                )))
            }
            _ => {}
        }
        Ok(Self { prefix, tail })
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    pub fn tail(&self) -> TailRule {
        self.tail
    }

    /// Number of explicitly tabulated lengths, `None` if the tail rule is a
    /// closed form.
    pub fn horizon(&self) -> Option<usize> {
        match self.tail {
            TailRule::RepeatLast => Some(self.prefix.len()),
            _ => None,
        }
    }

    /// `b_n` for `n ≥ 1`.
    pub fn b(&self, n: usize) -> usize {
        assert!(n >= 1, "block lengths are indexed from 1");
        if let Some(&b) = self.prefix.get(n - 1) {
            return b;
        }
        match self.tail {
            TailRule::RepeatLast => {
                if !HORIZON_WARNED.swap(true, Ordering::Relaxed) {
                    log::warn!(
                        "block index {n} beyond the tabulated schedule of length {}; reusing the last length",
                        self.prefix.len()
                    );
                }
                *self.prefix.last().expect("validated non-empty")
            }
            TailRule::Constant(b) => b,
            TailRule::Geometric { l } => geometric_partial(l, n) - geometric_partial(l, n - 1),
        }
    }

    /// `B_n = b_1 + ... + b_n`, `B_0 = 0`.
    #[allow(non_snake_case)]
    pub fn B(&self, n: usize) -> usize {
        if self.prefix.is_empty() {
            if let TailRule::Geometric { l } = self.tail {
                return geometric_partial(l, n);
            }
        }
        (1..=n).map(|i| self.b(i)).sum()
    }

    /// `J_n = [1 - B_n, -B_{n-1}]` for `n ≥ 1`.
    #[allow(non_snake_case)]
    pub fn J(&self, n: usize) -> Interval {
        Interval::new(1 - self.B(n) as i64, -(self.B(n - 1) as i64))
    }

    pub fn lengths(&self, count: usize) -> Vec<usize> {
        (1..=count).map(|n| self.b(n)).collect()
    }
}

/// `⌈lⁿ/(l-1)⌉` for `n ≥ 1`, `0` for `n = 0`. Values within rounding noise of
/// an integer are treated as that integer.
pub(crate) fn geometric_partial(l: f64, n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let x = l.powi(n as i32) / (l - 1.0);
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

impl fmt::Display for BlockSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tail {
            TailRule::Constant(b) if self.prefix.is_empty() => write!(f, "const:{b}"),
            TailRule::Geometric { l } if self.prefix.is_empty() => write!(f, "geometric:{l}"),
            _ => {
                let parts: Vec<String> = self.prefix.iter().map(|b| b.to_string()).collect();
                write!(f, "explicit:{}", parts.join(","))
            }
        }
    }
}

/// Parses `const:<b>`, `explicit:<b1>,<b2>,...` or `geometric:<l>`.
impl FromStr for BlockSchedule {
    type Err = CouplingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CouplingError::InvalidSchedule(format!("cannot parse schedule {s:?}"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "const" | "constant" => Self::constant(rest.trim().parse().map_err(|_| bad())?),
            "explicit" => {
                let prefix = rest
                    .split(',')
                    .map(|t| t.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| bad())?;
                Self::explicit(prefix)
            }
            "geometric" => Self::geometric(rest.trim().parse().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }
}

/// Two sequences grown leftward from coordinate 0 block by block.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingState {
    // index j holds coordinate -j
    x: Vec<usize>,
    y: Vec<usize>,
    run: usize,
    blocks: usize,
}

impl Default for CouplingState {
    fn default() -> Self {
        Self::new()
    }
}

impl CouplingState {
    pub fn new() -> Self {
        Self {
            x: Vec::new(),
            y: Vec::new(),
            run: 0,
            blocks: 0,
        }
    }

    /// Number of consecutive agreeing blocks immediately preceding.
    pub fn agreement_run(&self) -> usize {
        self.run
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// Right endpoint `a_n` of the next block is `a_n`; the filled region
    /// is `(a_n, 0]`.
    pub fn right_end(&self) -> i64 {
        -(self.x.len() as i64)
    }

    pub fn depth(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> Word {
        self.word(&self.x)
    }

    pub fn y(&self) -> Word {
        self.word(&self.y)
    }

    fn word(&self, side: &[usize]) -> Word {
        Word::new(self.right_end() + 1, side.iter().rev().copied().collect())
    }

    /// Known coordinates of one side, leftmost first, followed by `tail`.
    pub(crate) fn context(&self, second: bool, tail: &[usize]) -> Vec<usize> {
        let side = if second { &self.y } else { &self.x };
        side.iter().rev().chain(tail).copied().collect()
    }

    /// Appends a block (symbols leftmost first) to each side and updates
    /// the agreement run.
    pub fn push(&mut self, x_block: &[usize], y_block: &[usize]) {
        assert_eq!(x_block.len(), y_block.len());
        self.x.extend(x_block.iter().rev());
        self.y.extend(y_block.iter().rev());
        self.run = if x_block == y_block { self.run + 1 } else { 0 };
        self.blocks += 1;
    }
}

/// Interval of the next block: length `b_{k+1}` where `k` is the current
/// agreement run, ending at `a_n`.
pub fn next_block(state: &CouplingState, schedule: &BlockSchedule) -> Interval {
    let b = schedule.b(state.agreement_run() + 1) as i64;
    let a = state.right_end();
    Interval::new(a - b + 1, a)
}

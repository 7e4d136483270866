//! g-functions on a finite alphabet.
//!
//! A g-function assigns to every one-sided sequence `x = (x_0, x_1, ...)` the
//! conditional probability of `x_0` given `(x_1, x_2, ...)`, so that
//! `Σ_s g(s x_1 x_2 ...) = 1` for every context. Two families are provided:
//!
//! * [`FiniteMemory`]: `g` depends on `x_0..=x_M` only and is stored as a
//!   table in lexicographic order, coordinate 0 most significant.
//! * [`LongRangeLinear`]: binary alphabet with sign map `s`, and
//!   `g(x) = 1/2 + θ s(x_0) Σ_{k≥1} a_k s(x_k)`, `0 < θ < 1/2`, `Σ a_k ≤ 1`.
//!
//! Every evaluation on a finite word returns an [`Estimate`]: a point value
//! together with a bound on how far any completion of the word can move it.

mod law;
mod profile;
mod word;

use thiserror::Error;

pub use law::CoefficientLaw;
pub use profile::{ProfileKind, TailModel, VariationProfile};
pub use word::{Alphabet, Interval, Word};

pub(crate) use law::Coefficients;
pub(crate) use word::{lex_decode, lex_index};

const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GModelError {
    #[error("alphabet needs at least two distinct symbols")]
    AlphabetTooSmall,
    #[error("duplicate symbol {0:?} in alphabet")]
    DuplicateSymbol(String),
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("symbol index {index} outside alphabet of size {size}")]
    SymbolOutOfRange { index: usize, size: usize },
    #[error("table has {got} entries, expected {expected}")]
    TableSize { expected: usize, got: usize },
    #[error("table entry {index} is {value}, not a probability")]
    TableEntry { index: usize, value: f64 },
    #[error("probabilities for context {context} sum to {sum}")]
    NotNormalized { context: usize, sum: f64 },
    #[error(
        "context of length {got} is shorter than the memory window {needed}; \
         g is only known to lie in [{lower}, {upper}]"
    )]
    ShortContext {
        needed: usize,
        got: usize,
        lower: f64,
        upper: f64,
    },
    #[error("model is not strictly positive")]
    NonPositive,
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("word must be anchored at 0 and non-empty")]
    BadAnchor,
    #[error("intervals {left} and {right} are not adjacent")]
    IntervalMismatch { left: Interval, right: Interval },
    #[error("{states} states exceed the budget of {budget}")]
    Budget { states: usize, budget: usize },
}

/// Point value with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }

    pub fn lower(&self) -> f64 {
        self.value - self.error
    }

    pub fn upper(&self) -> f64 {
        self.value + self.error
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower() <= x && x <= self.upper()
    }
}

/// Exact conditional distribution of a block given a finite context, over
/// all `|S|^b` block words (leftmost coordinate most significant).
#[derive(Debug, Clone)]
pub struct BlockDistribution {
    pub probs: Vec<f64>,
    /// Per-word absolute truncation error.
    pub errors: Vec<f64>,
}

impl BlockDistribution {
    pub fn total_error(&self) -> f64 {
        self.errors.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMemory {
    alphabet: Alphabet,
    memory: usize,
    table: Vec<f64>,
}

impl FiniteMemory {
    pub fn new(alphabet: Alphabet, memory: usize, table: Vec<f64>) -> Result<Self, GModelError> {
        let base = alphabet.size();
        let contexts = checked_pow(base, memory)?;
        let expected = contexts * base;
        if table.len() != expected {
            return Err(GModelError::TableSize {
                expected,
                got: table.len(),
            });
        }
        if let Some((index, &value)) = table
            .iter()
            .enumerate()
            .find(|(_, &v)| !(0.0..=1.0).contains(&v))
        {
            return Err(GModelError::TableEntry { index, value });
        }
        for context in 0..contexts {
            let sum: f64 = (0..base).map(|s| table[s * contexts + context]).sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(GModelError::NotNormalized { context, sum });
            }
        }
        Ok(Self {
            alphabet,
            memory,
            table,
        })
    }

    /// Memory-0 model: i.i.d. symbols with the given marginal.
    pub fn iid(alphabet: Alphabet, probs: Vec<f64>) -> Result<Self, GModelError> {
        Self::new(alphabet, 0, probs)
    }

    /// Builds the table from a closure over windows `(x_0, ..., x_M)`.
    pub fn from_fn(
        alphabet: Alphabet,
        memory: usize,
        mut g: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self, GModelError> {
        let base = alphabet.size();
        let size = checked_pow(base, memory + 1)?;
        let mut window = vec![0; memory + 1];
        let table = (0..size)
            .map(|i| {
                lex_decode(i, base, memory + 1, &mut window);
                g(&window)
            })
            .collect();
        Self::new(alphabet, memory, table)
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Exact value on a window of length at least `M + 1`.
    pub fn entry(&self, window: &[usize]) -> f64 {
        self.table[lex_index(&window[..=self.memory], self.alphabet.size())]
    }

    /// Range of `g` over all completions of `window`.
    fn range(&self, window: &[usize]) -> (f64, f64) {
        if window.len() > self.memory {
            let v = self.entry(window);
            return (v, v);
        }
        let base = self.alphabet.size();
        let span = base.pow((self.memory + 1 - window.len()) as u32);
        let start = lex_index(window, base) * span;
        self.table[start..start + span]
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

#[derive(Debug, Clone)]
pub struct LongRangeLinear {
    alphabet: Alphabet,
    theta: f64,
    coeffs: Coefficients,
    signs: [f64; 2],
}

impl PartialEq for LongRangeLinear {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.theta == other.theta
            && self.coeffs.law() == other.coeffs.law()
            && self.signs == other.signs
    }
}

impl LongRangeLinear {
    /// `signs[s]` is the sign of symbol `s`; exactly one symbol must map to
    /// each of `-1` and `+1`.
    pub fn new(
        alphabet: Alphabet,
        theta: f64,
        law: CoefficientLaw,
        signs: [i8; 2],
    ) -> Result<Self, GModelError> {
        if alphabet.size() != 2 {
            return Err(GModelError::InvalidParameter(
                "the long-range linear family needs a binary alphabet".into(),
            ));
        }
        if !(theta > 0.0 && theta < 0.5) {
            return Err(GModelError::InvalidParameter(format!(
                "theta = {theta} must lie in (0, 1/2)"
            )));
        }
        if !matches!(signs, [-1, 1] | [1, -1]) {
            return Err(GModelError::InvalidParameter(
                "sign map must send one symbol to -1 and the other to +1".into(),
            ));
        }
        law.validate()?;
        let coeffs = Coefficients::new(law);
        let (_, total) = coeffs.total();
        if total > 1.0 {
            return Err(GModelError::InvalidParameter(format!(
                "coefficients sum to (at most) {total}, must not exceed 1"
            )));
        }
        Ok(Self {
            alphabet,
            theta,
            coeffs,
            signs: [f64::from(signs[0]), f64::from(signs[1])],
        })
    }

    /// Binary alphabet `{0, 1}` with `s(0) = -1`, `s(1) = +1`.
    pub fn binary(theta: f64, law: CoefficientLaw) -> Result<Self, GModelError> {
        Self::new(Alphabet::binary(), theta, law, [-1, 1])
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn law(&self) -> CoefficientLaw {
        self.coeffs.law()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn sign(&self, symbol: usize) -> f64 {
        self.signs[symbol]
    }

    pub fn coefficient(&self, k: usize) -> f64 {
        self.coeffs.a(k)
    }

    /// Bounds on `Σ_{k>n} a_k`.
    pub fn tail(&self, n: usize) -> (f64, f64) {
        self.coeffs.tail(n)
    }

    /// Bounds on `1/2 - θ Σ_k a_k`, the smallest value `g` can approach.
    pub fn floor(&self) -> (f64, f64) {
        let (lo, hi) = self.coeffs.total();
        (0.5 - self.theta * hi, 0.5 - self.theta * lo)
    }

    /// Value from the known window (unknown coordinates contribute 0) and
    /// the half-width `θ T_{w-1}` covering every completion.
    fn estimate(&self, window: &[usize]) -> Estimate {
        let s0 = self.signs[window[0]];
        let inner: f64 = window[1..]
            .iter()
            .enumerate()
            .map(|(i, &x)| self.coeffs.a(i + 1) * self.signs[x])
            .sum();
        Estimate {
            value: 0.5 + self.theta * s0 * inner,
            error: self.theta * self.coeffs.tail_upper(window.len() - 1),
        }
    }

    /// `ρ_[0,n](g) = 1 + 2θ T_n / (1/2 - θ Σ a_k)`, as an interval.
    fn rho(&self, n: usize) -> (f64, f64) {
        let (t_lo, t_hi) = self.coeffs.tail(n);
        let (floor_lo, floor_hi) = self.floor();
        (
            1.0 + 2.0 * self.theta * t_lo / floor_hi,
            1.0 + 2.0 * self.theta * t_hi / floor_lo,
        )
    }

    fn block_distribution(&self, block_len: usize, context: &[usize]) -> BlockDistribution {
        let b = block_len;
        let theta = self.theta;
        // Context contribution and truncation error per block site.
        let mut shift = vec![0.0; b];
        let mut err = vec![0.0; b];
        for j in 0..b {
            let offset = b - j;
            shift[j] = context
                .iter()
                .enumerate()
                .map(|(t, &x)| self.coeffs.a(offset + t) * self.signs[x])
                .sum();
            err[j] = theta * self.coeffs.tail_upper(offset + context.len() - 1);
        }
        let size = 1usize << b;
        let mut probs = Vec::with_capacity(size);
        let mut errors = Vec::with_capacity(size);
        let mut word = vec![0usize; b];
        for w in 0..size {
            lex_decode(w, 2, b, &mut word);
            let mut p = 1.0;
            let mut p_hi = 1.0;
            for j in 0..b {
                let inner: f64 = (1..b - j)
                    .map(|k| self.coeffs.a(k) * self.signs[word[j + k]])
                    .sum::<f64>()
                    + shift[j];
                let v = 0.5 + theta * self.signs[word[j]] * inner;
                p *= v;
                p_hi *= v + err[j];
            }
            probs.push(p);
            errors.push(p_hi - p);
        }
        BlockDistribution { probs, errors }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GModel {
    FiniteMemory(FiniteMemory),
    LongRangeLinear(LongRangeLinear),
}

impl From<FiniteMemory> for GModel {
    fn from(m: FiniteMemory) -> Self {
        GModel::FiniteMemory(m)
    }
}

impl From<LongRangeLinear> for GModel {
    fn from(m: LongRangeLinear) -> Self {
        GModel::LongRangeLinear(m)
    }
}

impl GModel {
    pub fn alphabet(&self) -> &Alphabet {
        match self {
            GModel::FiniteMemory(m) => &m.alphabet,
            GModel::LongRangeLinear(m) => &m.alphabet,
        }
    }

    /// `Some(M)` for finite-memory models.
    pub fn memory(&self) -> Option<usize> {
        match self {
            GModel::FiniteMemory(m) => Some(m.memory),
            GModel::LongRangeLinear(_) => None,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            GModel::FiniteMemory(m) => m.table.iter().all(|&v| v > 0.0),
            GModel::LongRangeLinear(m) => m.floor().0 > 0.0,
        }
    }

    /// `(point, lower, upper)` for `g` on a window starting at coordinate 0.
    fn factor(&self, window: &[usize]) -> (f64, f64, f64) {
        match self {
            GModel::FiniteMemory(m) => {
                let (lo, hi) = m.range(window);
                (0.5 * (lo + hi), lo, hi)
            }
            GModel::LongRangeLinear(m) => {
                let e = m.estimate(window);
                (e.value, e.lower(), e.upper())
            }
        }
    }

    /// `g` on the cylinder fixed by `word` (anchored at 0), using at most
    /// `truncation` leading coordinates.
    ///
    /// Finite-memory models with fewer than `M + 1` known coordinates give
    /// [`GModelError::ShortContext`] carrying the attainable range.
    pub fn eval_g(&self, word: &Word, truncation: usize) -> Result<Estimate, GModelError> {
        if word.anchor() != 0 || word.is_empty() {
            return Err(GModelError::BadAnchor);
        }
        self.alphabet().check(word)?;
        let w = word.len().min(truncation.max(1));
        let window = &word.symbols()[..w];
        match self {
            GModel::FiniteMemory(m) => {
                if w <= m.memory {
                    let (lower, upper) = m.range(window);
                    return Err(GModelError::ShortContext {
                        needed: m.memory + 1,
                        got: w,
                        lower,
                        upper,
                    });
                }
                Ok(Estimate::exact(m.entry(window)))
            }
            GModel::LongRangeLinear(m) => Ok(m.estimate(window)),
        }
    }

    /// `π_[m,n]([block] | block·context) = Π_{i=m}^{n} g(T^i x)` for a block on
    /// `[m, n]` and a context on `[n+1, n+L]`.
    pub fn cylinder_prob(&self, block: &Word, context: &Word) -> Result<Estimate, GModelError> {
        self.alphabet().check(block)?;
        self.alphabet().check(context)?;
        if !context.is_empty() && context.anchor() != block.interval().end + 1 {
            return Err(GModelError::IntervalMismatch {
                left: block.interval(),
                right: context.interval(),
            });
        }
        let mut joined = block.symbols().to_vec();
        joined.extend_from_slice(context.symbols());
        Ok(self.product(&joined, block.len()))
    }

    fn product(&self, joined: &[usize], block_len: usize) -> Estimate {
        let (mut point, mut lo, mut hi) = (1.0, 1.0, 1.0);
        for j in 0..block_len {
            let (p, l, h) = self.factor(&joined[j..]);
            point *= p;
            lo *= l.max(0.0);
            hi *= h;
        }
        Estimate {
            value: point,
            error: (hi - point).max(point - lo).max(0.0),
        }
    }

    /// Conditional law of a block of `block_len` symbols immediately left of
    /// `context` (given leftmost-first).
    pub fn block_distribution(&self, block_len: usize, context: &[usize]) -> BlockDistribution {
        match self {
            GModel::LongRangeLinear(m) => m.block_distribution(block_len, context),
            GModel::FiniteMemory(m) => {
                let base = m.alphabet.size();
                let size = base.pow(block_len as u32);
                let mut joined = vec![0; block_len + context.len()];
                joined[block_len..].copy_from_slice(context);
                let mut probs = Vec::with_capacity(size);
                let mut errors = Vec::with_capacity(size);
                for w in 0..size {
                    lex_decode(w, base, block_len, &mut joined[..block_len]);
                    let e = self.product(&joined, block_len);
                    probs.push(e.value);
                    errors.push(e.error);
                }
                BlockDistribution { probs, errors }
            }
        }
    }

    /// Bounds `(lower, upper)` on `ρ_[0,n](g)`, the largest ratio `g(x)/g(y)`
    /// over pairs agreeing on coordinates `0..=n`.
    pub fn rho_interval(&self, n: usize) -> Result<(f64, f64), GModelError> {
        if !self.is_positive() {
            return Err(GModelError::NonPositive);
        }
        match self {
            GModel::FiniteMemory(m) => {
                if n >= m.memory {
                    return Ok((1.0, 1.0));
                }
                let base = m.alphabet.size();
                let span = base.pow((m.memory - n) as u32);
                let rho = m
                    .table
                    .chunks(span)
                    .map(|group| {
                        let (lo, hi) = group
                            .iter()
                            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                        hi / lo
                    })
                    .fold(1.0, f64::max);
                Ok((rho, rho))
            }
            GModel::LongRangeLinear(m) => Ok(m.rho(n)),
        }
    }

    /// `var_[0,n](log g)` for `n = 0..=horizon`.
    ///
    /// Finite-memory models and exponential coefficient laws are exact;
    /// power laws give upper bounds. Non-positive finite-memory models get
    /// infinite variation where a zero entry is reachable.
    pub fn variation_profile(&self, horizon: usize) -> VariationProfile {
        match self {
            GModel::FiniteMemory(m) => {
                let values = (0..=horizon)
                    .map(|n| match self.rho_interval(n) {
                        Ok((_, hi)) => hi.ln(),
                        Err(_) if n >= m.memory => 0.0,
                        Err(_) => f64::INFINITY,
                    })
                    .collect();
                VariationProfile {
                    kind: ProfileKind::Exact,
                    values,
                    tail: Some(TailModel::ZeroBeyond { memory: m.memory }),
                }
            }
            GModel::LongRangeLinear(m) => {
                let values = (0..=horizon).map(|n| m.rho(n).1.ln()).collect();
                let floor = m.floor().0;
                let (kind, tail) = match m.law() {
                    CoefficientLaw::Power { c, p } => (
                        ProfileKind::UpperBound,
                        TailModel::PowerLaw {
                            scale: 2.0 * m.theta * c / ((p - 1.0) * floor),
                            exponent: p - 1.0,
                        },
                    ),
                    CoefficientLaw::Exponential { c, r } => (
                        ProfileKind::Exact,
                        TailModel::Exponential {
                            scale: 2.0 * m.theta * c * r / ((1.0 - r) * floor),
                            rate: r,
                        },
                    ),
                };
                VariationProfile {
                    kind,
                    values,
                    tail: Some(tail),
                }
            }
        }
    }

    /// Memory-`memory` surrogate together with
    /// `sup_x Σ_s |g(sx) - g_t(sx)|`.
    pub fn truncated(&self, memory: usize) -> Result<(FiniteMemory, f64), GModelError> {
        let base = self.alphabet().size();
        let size = checked_pow(base, memory + 1)?;
        if size > TRUNCATION_BUDGET {
            return Err(GModelError::Budget {
                states: size,
                budget: TRUNCATION_BUDGET,
            });
        }
        match self {
            GModel::FiniteMemory(m) => {
                if memory < m.memory {
                    return Err(GModelError::InvalidParameter(format!(
                        "surrogate memory {memory} below model memory {}",
                        m.memory
                    )));
                }
                let fm = FiniteMemory::from_fn(m.alphabet.clone(), memory, |w| m.entry(w))?;
                Ok((fm, 0.0))
            }
            GModel::LongRangeLinear(m) => {
                let fm = FiniteMemory::from_fn(m.alphabet.clone(), memory, |w| m.estimate(w).value)?;
                Ok((fm, 2.0 * m.theta * m.coeffs.tail_upper(memory)))
            }
        }
    }
}

/// Largest surrogate table built by [`GModel::truncated`].
pub const TRUNCATION_BUDGET: usize = 1 << 22;

fn checked_pow(base: usize, exp: usize) -> Result<usize, GModelError> {
    base.checked_pow(exp as u32).ok_or(GModelError::Budget {
        states: usize::MAX,
        budget: TRUNCATION_BUDGET,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn iid() -> GModel {
        FiniteMemory::iid(Alphabet::binary(), vec![0.3, 0.7]).unwrap().into()
    }

    fn long_range() -> LongRangeLinear {
        LongRangeLinear::binary(0.25, CoefficientLaw::power_normalized_p2(0.5)).unwrap()
    }

    fn random_fm(rng: &mut ChaCha8Rng, base: usize, memory: usize) -> FiniteMemory {
        let contexts = base.pow(memory as u32);
        let mut table = vec![0.0; contexts * base];
        for c in 0..contexts {
            let w: Vec<f64> = (0..base).map(|_| rng.gen_range(0.05..1.0)).collect();
            let z: f64 = w.iter().sum();
            for s in 0..base {
                table[s * contexts + c] = w[s] / z;
            }
        }
        let ab = Alphabet::new((0..base).map(|i| i.to_string())).unwrap();
        FiniteMemory::new(ab, memory, table).unwrap()
    }

    #[test]
    fn iid_reads_table() {
        let g = iid();
        let e = g.eval_g(&Word::new(0, vec![0]), 1).unwrap();
        assert_eq!(e, Estimate::exact(0.3));
    }

    #[test]
    fn long_range_two_symbol_word() {
        let m = long_range();
        let a1 = 0.5 * 6.0 / std::f64::consts::PI.powi(2);
        let g: GModel = m.clone().into();
        let e = g.eval_g(&Word::new(0, vec![1, 1]), 2).unwrap();
        assert!((e.value - (0.5 + 0.25 * a1)).abs() < 1e-15);
        let tail = 0.5 - a1;
        assert!(e.error >= 0.25 * tail && e.error - 0.25 * tail < 1e-8, "{}", e.error);
    }

    #[test]
    fn short_context_is_signalled() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g: GModel = random_fm(&mut rng, 2, 2).into();
        match g.eval_g(&Word::new(0, vec![1]), 5) {
            Err(GModelError::ShortContext {
                needed: 3,
                got: 1,
                lower,
                upper,
            }) => assert!(lower <= upper),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            g.eval_g(&Word::new(0, vec![2, 0, 0]), 3),
            Err(GModelError::SymbolOutOfRange { .. })
        ));
        assert_eq!(g.eval_g(&Word::new(1, vec![0]), 1), Err(GModelError::BadAnchor));
    }

    #[test]
    fn table_validation() {
        let ab = Alphabet::binary();
        assert!(matches!(
            FiniteMemory::new(ab.clone(), 1, vec![0.5, 0.5, 0.5]),
            Err(GModelError::TableSize { .. })
        ));
        assert!(matches!(
            FiniteMemory::new(ab.clone(), 1, vec![0.5, 0.4, 0.4, 0.6]),
            Err(GModelError::NotNormalized { .. })
        ));
        assert!(matches!(
            FiniteMemory::new(ab, 0, vec![1.5, -0.5]),
            Err(GModelError::TableEntry { .. })
        ));
        assert!(LongRangeLinear::binary(0.5, CoefficientLaw::power_normalized_p2(0.5)).is_err());
        assert!(LongRangeLinear::binary(0.2, CoefficientLaw::Power { c: 1.0, p: 2.0 }).is_err());
        assert!(LongRangeLinear::new(
            Alphabet::binary(),
            0.2,
            CoefficientLaw::power_normalized_p2(0.5),
            [1, 1]
        )
        .is_err());
    }

    #[test]
    fn normalization_over_random_contexts() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let models: Vec<GModel> = vec![
            long_range().into(),
            LongRangeLinear::binary(0.4, CoefficientLaw::Exponential { c: 0.9, r: 0.5 })
                .unwrap()
                .into(),
            random_fm(&mut rng, 3, 2).into(),
            random_fm(&mut rng, 2, 3).into(),
        ];
        for g in &models {
            let base = g.alphabet().size();
            for _ in 0..1000 {
                let len = rng.gen_range(4..40);
                let ctx: Vec<usize> = (0..len).map(|_| rng.gen_range(0..base)).collect();
                let (mut sum, mut err) = (0.0, 0.0);
                for s in 0..base {
                    let mut w = vec![s];
                    w.extend_from_slice(&ctx);
                    let e = g.eval_g(&Word::new(0, w), usize::MAX).unwrap();
                    sum += e.value;
                    err += e.error;
                }
                assert!((sum - 1.0).abs() <= err + 1e-12, "{sum} ± {err}");
            }
        }
    }

    #[test]
    fn cylinder_prob_iid_product() {
        let g = iid();
        let e = g
            .cylinder_prob(&Word::new(-1, vec![0, 1]), &Word::empty(1))
            .unwrap();
        assert!((e.value - 0.21).abs() < 1e-15);
        assert_eq!(e.error, 0.0);
    }

    #[test]
    fn cylinder_prob_memory_one_hand_product() {
        // table[s * 2 + c] = g(s | c)
        let g: GModel = FiniteMemory::new(Alphabet::binary(), 1, vec![0.9, 0.2, 0.1, 0.8])
            .unwrap()
            .into();
        // block "10" on [-1, 0], context "1" on [1, 1]:
        // g(1 | 0) * g(0 | 1) = 0.1 * 0.2
        let e = g
            .cylinder_prob(&Word::new(-1, vec![1, 0]), &Word::new(1, vec![1]))
            .unwrap();
        assert!((e.value - 0.02).abs() < 1e-15);
        assert_eq!(e.error, 0.0);
        assert!(matches!(
            g.cylinder_prob(&Word::new(-1, vec![1, 0]), &Word::new(2, vec![1])),
            Err(GModelError::IntervalMismatch { .. })
        ));
    }

    #[test]
    fn consistency_identity_on_random_splits() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let models: Vec<GModel> = vec![long_range().into(), random_fm(&mut rng, 3, 2).into()];
        for g in &models {
            let base = g.alphabet().size();
            for _ in 0..500 {
                let len = rng.gen_range(2..9);
                let m = -(len as i64) + 1;
                let block: Vec<usize> = (0..len).map(|_| rng.gen_range(0..base)).collect();
                let ctx: Vec<usize> = (0..6).map(|_| rng.gen_range(0..base)).collect();
                let block = Word::new(m, block);
                let ctx = Word::new(1, ctx);
                let split = rng.gen_range(m..0);
                let whole = g.cylinder_prob(&block, &ctx).unwrap().value;
                let left = block.slice(m, split);
                let right = block.slice(split + 1, 0);
                let right_ctx = right.concat(&ctx).unwrap();
                let p_left = g.cylinder_prob(&left, &right_ctx).unwrap().value;
                let p_right = g.cylinder_prob(&right, &ctx).unwrap().value;
                assert!((whole - p_left * p_right).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn block_distribution_matches_cylinder_prob() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let models: Vec<GModel> = vec![long_range().into(), random_fm(&mut rng, 2, 2).into()];
        for g in &models {
            let ctx: Vec<usize> = (0..5).map(|_| rng.gen_range(0..2)).collect();
            let d = g.block_distribution(3, &ctx);
            let total: f64 = d.probs.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            let mut word = [0usize; 3];
            for (w, (&p, &e)) in d.probs.iter().zip(&d.errors).enumerate() {
                lex_decode(w, 2, 3, &mut word);
                let c = g
                    .cylinder_prob(&Word::new(-2, word.to_vec()), &Word::new(1, ctx.clone()))
                    .unwrap();
                assert!((c.value - p).abs() < 1e-14);
                assert!((c.error - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rho_for_finite_memory() {
        let g = iid();
        assert_eq!(g.rho_interval(0).unwrap(), (1.0, 1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fm = random_fm(&mut rng, 2, 2);
        let g: GModel = fm.clone().into();
        assert_eq!(g.rho_interval(4).unwrap(), (1.0, 1.0));
        assert_eq!(g.rho_interval(2).unwrap(), (1.0, 1.0));
        // brute force over pairs agreeing on coordinate 0
        let mut brute = 1.0f64;
        let mut a = [0usize; 3];
        let mut b = [0usize; 3];
        for i in 0..8 {
            for j in 0..8 {
                lex_decode(i, 2, 3, &mut a);
                lex_decode(j, 2, 3, &mut b);
                if a[0] == b[0] {
                    brute = brute.max(fm.entry(&a) / fm.entry(&b));
                }
            }
        }
        let (lo, hi) = g.rho_interval(0).unwrap();
        assert_eq!(lo, hi);
        assert!((hi - brute).abs() < 1e-15);
        let zero: GModel = FiniteMemory::iid(Alphabet::binary(), vec![0.0, 1.0]).unwrap().into();
        assert_eq!(zero.rho_interval(0), Err(GModelError::NonPositive));
    }

    #[test]
    fn long_range_rho_dominates_random_search() {
        let m = long_range();
        let g: GModel = m.clone().into();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [0usize, 1, 3, 8] {
            let (lo, hi) = g.rho_interval(n).unwrap();
            assert!(lo <= hi);
            let mut best = 1.0f64;
            for _ in 0..2000 {
                let len = n + 1 + 60;
                let x: Vec<usize> = (0..len).map(|_| rng.gen_range(0..2)).collect();
                let mut y = x.clone();
                for v in y.iter_mut().skip(n + 1) {
                    *v = rng.gen_range(0..2);
                }
                let gx = m.estimate(&x).value;
                let gy = m.estimate(&y).value;
                best = best.max(gx / gy).max(gy / gx);
            }
            assert!(best <= hi, "n={n}: search {best} above bound {hi}");
        }
    }

    #[test]
    fn long_range_rho_attained_by_extremal_pair() {
        let m = long_range();
        let n = 2;
        let len = 3000;
        // x_0 = 0 (sign -1), coordinates 1..=n sign +1 push g towards its floor;
        // tails opposite to maximize the ratio.
        let mut x = vec![1usize; len];
        x[0] = 0;
        let mut y = x.clone();
        for k in n + 1..len {
            x[k] = 0;
            y[k] = 1;
        }
        let ratio = m.estimate(&x).value / m.estimate(&y).value;
        let (lo, hi) = GModel::from(m).rho_interval(n).unwrap();
        assert!(ratio <= hi);
        assert!(ratio >= lo - 1e-3, "{ratio} vs [{lo}, {hi}]");
    }

    #[test]
    fn variation_profiles() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g: GModel = random_fm(&mut rng, 2, 3).into();
        let p = g.variation_profile(8);
        assert_eq!(p.kind, ProfileKind::Exact);
        assert!(p.values[3..].iter().all(|&v| v == 0.0));
        assert!(p.values[..3].iter().all(|&v| v > 0.0));
        assert!(p.is_non_increasing());

        let lr: GModel = long_range().into();
        let p = lr.variation_profile(200);
        assert_eq!(p.kind, ProfileKind::UpperBound);
        assert!(p.is_non_increasing());
        for n in 0..=200 {
            let (lo, hi) = lr.rho_interval(n).unwrap();
            assert!((p.values[n] - hi.ln()).abs() < 1e-15);
            assert!(p.values[n] >= lo.ln());
        }
        // tail model dominates the tabulated values past n = 0
        let tail = p.tail.unwrap();
        for n in 1..=200 {
            assert!(tail.value(n) >= p.values[n]);
        }

        let ex: GModel = LongRangeLinear::binary(0.3, CoefficientLaw::Exponential { c: 0.5, r: 0.6 })
            .unwrap()
            .into();
        let p = ex.variation_profile(30);
        assert_eq!(p.kind, ProfileKind::Exact);
        let tail = p.tail.unwrap();
        for n in 0..=30 {
            assert!(tail.value(n) >= p.values[n]);
        }
    }

    #[test]
    fn truncated_surrogate() {
        let lr: GModel = long_range().into();
        let (fm, err) = lr.truncated(6).unwrap();
        assert_eq!(fm.memory(), 6);
        let GModel::LongRangeLinear(m) = &lr else { unreachable!() };
        assert!((err - 2.0 * 0.25 * m.tail(6).1).abs() < 1e-15);
        assert!(matches!(lr.truncated(30), Err(GModelError::Budget { .. })));
    }
}

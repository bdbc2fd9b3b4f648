use crate::error::{Error, Result};
use crate::{ceil_tol, floor_tol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GowersMode {
    Paper,
    /// User-set layer count, growth and thresholds.
    Toy,
}

impl GowersMode {
    pub fn name(self) -> &'static str {
        match self {
            GowersMode::Paper => "paper",
            GowersMode::Toy => "toy",
        }
    }
}

/// Growth function of the `m` sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Growth {
    /// `φ(m) = max(⌊e^{m/16}⌋, 2)`.
    Exponential,
    /// `φ(m) = c` for every `m`.
    Constant(u64),
}

impl Growth {
    pub fn apply(self, m: u64) -> Result<u64> {
        match self {
            Growth::Exponential => phi(m),
            Growth::Constant(c) => Ok(c),
        }
    }
}

/// `φ(m) = max(⌊e^{m/16}⌋, 2)`.
pub fn phi(m: u64) -> Result<u64> {
    let x = (m as f64 / 16.0).exp().floor();
    if x >= u64::MAX as f64 {
        return Err(Error::Overflow(format!("phi({m}) = e^({m}/16) exceeds u64")));
    }
    Ok((x as u64).max(2))
}

/// `t = ⌊¼ log₇(1/ε) − 3⌋`, possibly negative.
pub fn paper_t(eps: f64) -> i64 {
    floor_tol(0.25 * (1.0 / eps).ln() / 7f64.ln() - 3.0) as i64
}

/// `s₀ = ⌈4/δ⁴⌉`.
pub fn s0(delta: f64) -> Result<u64> {
    let x = ceil_tol(4.0 / delta.powi(4));
    if !x.is_finite() || x >= u64::MAX as f64 {
        return Err(Error::Overflow(format!("s0 = 4/delta^4 exceeds u64 at delta = {delta}")));
    }
    Ok(x as u64)
}

/// Toy-mode settings; `None` keeps the paper-mode value.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyOverrides {
    pub t: usize,
    pub growth: Growth,
    pub s0: Option<u64>,
}

impl Default for ToyOverrides {
    fn default() -> Self {
        Self { t: 3, growth: Growth::Exponential, s0: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GowersParams {
    pub eps: f64,
    pub delta: f64,
    pub mode: GowersMode,
    pub t: usize,
    pub s0: u64,
    pub growth: Growth,
    /// `m_0 = 1, m_1, ..., m_t`.
    pub m: Vec<u64>,
    /// Every deviation from the paper-mode constants.
    pub relaxations: Vec<String>,
}

impl GowersParams {
    /// `M_r = m_r / m_{r-1}` for `r = 1..=t`.
    pub fn ratio(&self, r: usize) -> u64 {
        self.m[r] / self.m[r - 1]
    }

    /// Whether the layer-`r` link is certified by quasirandomness.
    pub fn quasirandom_layer(&self, r: usize) -> bool {
        self.m[r - 1] >= self.s0
    }
}

/// `m_r = m_{r-1}·s₀` when `m_{r-1} < s₀ ≤ φ(m_{r-1})`, else
/// `m_{r-1}·φ(m_{r-1})`; checked against `u64`.
pub fn m_sequence(t: usize, s0: u64, growth: Growth) -> Result<Vec<u64>> {
    let mut m = vec![1u64];
    for r in 1..=t {
        let prev = m[r - 1];
        let g = growth.apply(prev)?;
        let factor = if prev < s0 && g >= s0 { s0 } else { g };
        let next = prev
            .checked_mul(factor)
            .ok_or_else(|| Error::Overflow(format!("m_{r} = {prev} * {factor} exceeds u64")))?;
        m.push(next);
    }
    Ok(m)
}

pub fn build_sequence(eps: f64, delta: f64, mode: GowersMode, toy: Option<ToyOverrides>) -> Result<GowersParams> {
    if !(delta > 0.0 && delta <= eps && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < delta <= eps < 1, got eps = {eps}, delta = {delta}"
        )));
    }
    match mode {
        GowersMode::Paper => {
            if toy.is_some() {
                return Err(Error::InvalidParameter("paper mode takes no overrides".into()));
            }
            let t = paper_t(eps);
            if t < 1 {
                return Err(Error::Infeasible(format!(
                    "paper layer count floor(log7(1/eps)/4 - 3) = {t} at eps = {eps}; \
                     needs eps <= 7^-16, use toy mode"
                )));
            }
            let s0 = s0(delta)?;
            let m = m_sequence(t as usize, s0, Growth::Exponential)?;
            Ok(GowersParams {
                eps,
                delta,
                mode,
                t: t as usize,
                s0,
                growth: Growth::Exponential,
                m,
                relaxations: Vec::new(),
            })
        }
        GowersMode::Toy => {
            let toy = toy.unwrap_or_default();
            if toy.t == 0 {
                return Err(Error::InvalidParameter("toy mode needs t >= 1".into()));
            }
            if let Growth::Constant(c) = toy.growth {
                if c < 2 {
                    return Err(Error::InvalidParameter(format!("constant growth must be at least 2, got {c}")));
                }
            }
            let mut relaxations = vec![format!("t = {} (paper mode gives {})", toy.t, paper_t(eps))];
            let s0 = match toy.s0 {
                Some(v) => {
                    relaxations.push(format!("s0 = {v} (paper mode gives {})", s0(delta)?));
                    v.max(1)
                }
                None => s0(delta)?,
            };
            if let Growth::Constant(c) = toy.growth {
                relaxations.push(format!("growth constant {c} in place of max(floor(e^(m/16)), 2)"));
            }
            let m = m_sequence(toy.t, s0, toy.growth)?;
            for r in 1..=toy.t {
                let bound = phi(m[r - 1])?;
                if m[r] / m[r - 1] > bound {
                    relaxations.push(format!(
                        "M_{r} = {} exceeds phi(m_{}) = {bound}; orthogonal families may not exist",
                        m[r] / m[r - 1],
                        r - 1
                    ));
                }
            }
            Ok(GowersParams { eps, delta, mode, t: toy.t, s0, growth: toy.growth, m, relaxations })
        }
    }
}

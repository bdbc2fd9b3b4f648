use crate::error::{Error, Result};
use crate::{ceil_tol, floor_tol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Constants exactly as in the proofs; usually infeasible.
    Paper,
    /// Adaptive anchor coverage and a user-set link tolerance.
    Practical,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Paper => "paper",
            Mode::Practical => "practical",
        }
    }
}

/// Tolerances for the tuple-partition step.
#[derive(Clone, Debug, PartialEq)]
pub struct ToleranceParams {
    pub eps: f64,
    pub k: usize,
    /// Bound on the size of the link partitions.
    pub r: usize,
    pub mode: Mode,
    /// Homogeneity required of link partitions.
    pub link_eps: f64,
    /// Practical mode: stop drawing anchors after this many.
    pub max_anchors: usize,
}

pub const DEFAULT_MAX_ANCHORS: usize = 100_000;

impl ToleranceParams {
    pub fn new(eps: f64, k: usize, r: usize, mode: Mode) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::InvalidParameter(format!("eps must lie in (0, 1/2), got {eps}")));
        }
        if k < 2 {
            return Err(Error::InvalidParameter(format!("uniformity must be at least 2, got {k}")));
        }
        if r == 0 {
            return Err(Error::InvalidParameter("link partition bound r must be positive".into()));
        }
        Ok(Self {
            eps,
            k,
            r,
            mode,
            link_eps: tuple_link_eps(eps, k),
            max_anchors: DEFAULT_MAX_ANCHORS,
        })
    }

    /// Overrides the link tolerance (practical mode only).
    pub fn with_link_eps(mut self, link_eps: f64) -> Result<Self> {
        if self.mode == Mode::Paper {
            return Err(Error::InvalidParameter(
                "paper mode fixes the link tolerance".into(),
            ));
        }
        if !(0.0..0.5).contains(&link_eps) {
            return Err(Error::InvalidParameter(format!("link eps must lie in [0, 1/2), got {link_eps}")));
        }
        self.link_eps = link_eps;
        Ok(self)
    }

    pub fn with_max_anchors(mut self, max_anchors: usize) -> Self {
        self.max_anchors = max_anchors.max(1);
        self
    }

    /// `γ = ε / (6k)`.
    pub fn gamma(&self) -> f64 {
        self.eps / (6.0 * self.k as f64)
    }

    /// `γ' = γ³ / 48`.
    pub fn gamma_prime(&self) -> f64 {
        gamma_prime(self.gamma())
    }

    /// `q = ⌈(1 - γ) 3r / γ⌉` of the similarity step.
    pub fn paper_q(&self) -> u64 {
        paper_q(self.gamma(), self.r)
    }

    /// Anchor count `(q / γ)^{k-1} ln(2 / ε)`.
    pub fn paper_anchor_count(&self) -> f64 {
        (self.paper_q() as f64 / self.gamma()).powi(self.k as i32 - 1) * (2.0 / self.eps).ln()
    }
}

pub fn gamma_prime(gamma: f64) -> f64 {
    gamma.powi(3) / 48.0
}

pub fn paper_q(gamma: f64, r: usize) -> u64 {
    ceil_tol((1.0 - gamma) * 3.0 * r as f64 / gamma) as u64
}

/// `ε' = (1/48)(ε / 6k)³`.
pub fn tuple_link_eps(eps: f64, k: usize) -> f64 {
    gamma_prime(eps / (6.0 * k as f64))
}

/// Link tolerance of the whole pipeline at target ε: the tuple step runs at
/// `ε²/(8k)`, so `ε' = (1/48)(ε² / 48k²)³`.
pub fn composed_link_eps(eps: f64, k: usize) -> f64 {
    tuple_link_eps(eps * eps / (8.0 * k as f64), k)
}

/// Block size and block count of the similarity step.
///
/// Paper mode: `m = γn/(3r)` (must be an integer) and `q = ⌈(1 - γ)3r/γ⌉`.
/// Practical: `m = max(1, ⌊γn/(3r)⌋)` and `q = ⌈(1 - γ)n/m⌉`, which equals
/// the paper-mode value whenever `m` divides evenly and always leaves
/// `n - qm ≤ γn`.
pub fn similarity_shape(gamma: f64, r: usize, n: usize, mode: Mode) -> Result<(usize, usize)> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if r == 0 {
        return Err(Error::InvalidParameter("r must be positive".into()));
    }
    let exact = gamma * n as f64 / (3.0 * r as f64);
    match mode {
        Mode::Paper => {
            let m = floor_tol(exact);
            if m < 1.0 || (exact - m).abs() > 1e-9 {
                return Err(Error::Divisibility(format!(
                    "block size gamma*n/(3r) = {exact} is not a positive integer"
                )));
            }
            let m = m as usize;
            let q = paper_q(gamma, r) as usize;
            if q * m > n {
                return Err(Error::Infeasible(format!("q*m = {q}*{m} exceeds n = {n}")));
            }
            Ok((m, q))
        }
        Mode::Practical => {
            let m = (floor_tol(exact) as usize).max(1);
            let q = ceil_tol((1.0 - gamma) * n as f64 / m as f64) as usize;
            if q * m > n {
                return Err(Error::Infeasible(format!("q*m = {q}*{m} exceeds n = {n}")));
            }
            Ok((m, q))
        }
    }
}

/// Chain-twin count a tuple needs to be excellent: `(γn/q)^{k-1}`.
pub fn excellence_threshold(gamma: f64, q: usize, n: usize, k: usize) -> f64 {
    (gamma * n as f64 / q as f64).powi(k as i32 - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_formula() {
        assert_eq!(paper_q(0.1, 5), 135);
    }

    #[test]
    fn gamma_prime_value() {
        assert!((gamma_prime(0.1) - 1e-3 / 48.0).abs() < 1e-18);
        assert!((gamma_prime(0.1) - 2.083e-5).abs() < 1e-8);
    }

    #[test]
    fn complete_graph_shape() {
        assert_eq!(similarity_shape(0.3, 1, 120, Mode::Paper).unwrap(), (12, 7));
        assert_eq!(similarity_shape(0.3, 1, 120, Mode::Practical).unwrap(), (12, 7));
    }

    #[test]
    fn paper_anchor_count_is_astronomical() {
        let p = ToleranceParams::new(0.3, 3, 2, Mode::Paper).unwrap();
        assert!((p.gamma() - 1.0 / 60.0).abs() < 1e-15);
        assert_eq!(p.paper_q(), 354);
        let expected = (354.0f64 * 60.0).powi(2) * (2.0f64 / 0.3).ln();
        assert!((p.paper_anchor_count() / expected - 1.0).abs() < 1e-9);
        assert!(p.paper_anchor_count() > 8e8);
    }

    #[test]
    fn excellence_threshold_value() {
        assert!((excellence_threshold(0.3, 7, 120, 3) - (36.0f64 / 7.0).powi(2)).abs() < 1e-9);
    }

    #[test]
    fn composed_link_eps_composes() {
        let e = 0.2;
        let inner = e * e / 24.0;
        assert!((composed_link_eps(e, 3) - (inner / 18.0).powi(3) / 48.0).abs() < 1e-30);
    }
}

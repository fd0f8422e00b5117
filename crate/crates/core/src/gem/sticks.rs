use crate::error::{Error, Result};
use crate::randkit::{beta_pair, ln_gamma_variate, std_normal, uniform01, Stream};

use super::GemParams;

/// Per-replica limit on generated sticks.
pub const DEFAULT_STICK_CAP: u64 = 10_000_000;

#[derive(Debug, Clone)]
enum Kernel {
    // alpha = 0: 1 - H = U^{1/theta}
    OneParameter,
    // alpha = 1/2: H_i = g_i / (Z_i + g_i), Z_{i+1} = Z_i + g_i with g_i ~ Gamma(1/2)
    // and Z_1 ~ Gamma(theta + 1/2). Independence of the ratios follows from the
    // beta-gamma algebra, and each ratio is Beta(1/2, theta + i/2).
    HalfChain { z: Option<f64> },
    General,
}

/// Sequential generator of the sticks `H_1, H_2, ...` with
/// `H_i ~ Beta(1 - alpha, theta + i alpha)`.
#[derive(Debug, Clone)]
pub struct StickStream {
    params: GemParams,
    emitted: u64,
    kernel: Kernel,
    rng: Stream,
}

impl StickStream {
    pub fn new(params: GemParams, rng: Stream) -> Self {
        let kernel = if params.alpha() == 0.0 {
            Kernel::OneParameter
        } else if params.alpha() == 0.5 {
            Kernel::HalfChain { z: None }
        } else {
            Kernel::General
        };
        Self { params, emitted: 0, kernel, rng }
    }

    /// Same law, but every stick is drawn as an explicit ratio of gammas.
    pub fn new_generic(params: GemParams, rng: Stream) -> Self {
        Self { params, emitted: 0, kernel: Kernel::General, rng }
    }

    pub fn params(&self) -> GemParams {
        self.params
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    /// Next stick as `(H, 1 - H)`, both strictly positive.
    #[inline]
    pub fn next_pair(&mut self) -> (f64, f64) {
        self.emitted += 1;
        let theta = self.params.theta();
        match &mut self.kernel {
            Kernel::OneParameter => {
                let l = uniform01(&mut self.rng).ln() / theta;
                let keep = l.exp().max(f64::MIN_POSITIVE);
                let h = (-l.exp_m1()).max(f64::MIN_POSITIVE);
                (h, keep)
            }
            Kernel::HalfChain { z } => {
                let zi = match *z {
                    Some(v) => v,
                    None => ln_gamma_variate(theta + 0.5, &mut self.rng).exp(),
                };
                let n = std_normal(&mut self.rng);
                let g = 0.5 * n * n;
                let total = zi + g;
                *z = Some(total);
                ((g / total).max(f64::MIN_POSITIVE), (zi / total).max(f64::MIN_POSITIVE))
            }
            Kernel::General => {
                let (a, b) = self.params.stick_shapes(self.emitted);
                beta_pair(a, b, &mut self.rng)
            }
        }
    }
}

/// Lazily extended stick-breaking state. Residuals `R_k = prod_{i<=k} (1 - H_i)`
/// are stored, and cut points are `Y_k = 1 - R_k`.
#[derive(Debug, Clone)]
pub struct CutPoints {
    sticks: Vec<f64>,
    residuals: Vec<f64>,
    source: StickStream,
    cap: u64,
}

impl CutPoints {
    pub fn new(params: GemParams, rng: Stream) -> Self {
        Self::with_cap(params, rng, DEFAULT_STICK_CAP)
    }

    pub fn with_cap(params: GemParams, rng: Stream, cap: u64) -> Self {
        Self::from_stream(StickStream::new(params, rng), cap)
    }

    pub fn from_stream(source: StickStream, cap: u64) -> Self {
        Self { sticks: Vec::new(), residuals: Vec::new(), source, cap }
    }

    pub fn params(&self) -> GemParams {
        self.source.params()
    }

    /// Number of generated sticks.
    pub fn len(&self) -> usize {
        self.sticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sticks.is_empty()
    }

    pub fn sticks(&self) -> &[f64] {
        &self.sticks
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Unallocated mass after the generated sticks.
    pub fn residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(1.0)
    }

    /// Cut point `Y_k` (1-based, `Y_0 = 0`).
    pub fn cut(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            1.0 - self.residuals[k - 1]
        }
    }

    /// Atom `p_k = Y_k - Y_{k-1}` (1-based).
    pub fn prob(&self, k: usize) -> f64 {
        let before = if k == 1 { 1.0 } else { self.residuals[k - 2] };
        before * self.sticks[k - 1]
    }

    fn push_one(&mut self) -> Result<()> {
        if self.sticks.len() as u64 >= self.cap {
            return Err(Error::CapExceeded { cap: self.cap, what: "sticks per replica" });
        }
        let (h, keep) = self.source.next_pair();
        let r = self.residual() * keep;
        self.sticks.push(h);
        self.residuals.push(r);
        Ok(())
    }

    /// Appends sticks until the largest cut exceeds `target` (at least one stick).
    pub fn extend_cuts(&mut self, target: f64) -> Result<()> {
        self.extend_below(1.0 - target)
    }

    /// Appends sticks until the residual drops below `level`.
    pub fn extend_below(&mut self, level: f64) -> Result<()> {
        if self.is_empty() {
            self.push_one()?;
        }
        while self.residual() >= level {
            self.push_one()?;
        }
        Ok(())
    }

    pub fn ensure_sticks(&mut self, count: usize) -> Result<()> {
        while self.sticks.len() < count {
            self.push_one()?;
        }
        Ok(())
    }

    /// Value `min{k : R_k < w}` of a sample with tail coordinate `w = 1 - U`.
    pub fn locate(&mut self, w: f64) -> Result<u64> {
        self.extend_below(w)?;
        Ok(self.residuals.partition_point(|&r| r >= w) as u64 + 1)
    }

    /// Realised discrete hazard rates `h_1..h_{j_max}`. For a GEM cut-point
    /// sequence these are the sticks themselves.
    pub fn hazards(&mut self, j_max: usize) -> Result<HazardSequence> {
        self.ensure_sticks(j_max.max(1))?;
        Ok(HazardSequence { values: self.sticks[..j_max].to_vec() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HazardSequence {
    pub values: Vec<f64>,
}

//! Random channel generation for the downlink simulator.
//!
//! Batches are generated deterministically from a `(config, seed)` pair. The
//! draw order is fixed: per sample, per user, entries row-major, real part
//! before imaginary part; each sample uses its own derived stream so
//! generation order (or parallel generation) cannot change the result.

use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::ComplexMatrix;
use crate::rng::{Purpose, SeedStream};

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Dimensions shared by every sample of a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelDims {
    pub users: usize,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
}

impl ChannelDims {
    pub fn stacked_rows(&self) -> usize {
        self.users * self.rx_antennas
    }
}

/// A set of channel realizations: per sample the stacked matrix
/// `H in C^{K*N_r x N_t}`, per-user noise variances, and optional per-sample
/// per-user path-loss gains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBatch {
    pub dims: ChannelDims,
    pub samples: Vec<ComplexMatrix>,
    /// Per-user noise variances (linear power), length K.
    pub sigma2: Vec<f64>,
    /// Per-sample per-user gains in (0, 1], row-major `[sample][user]`;
    /// empty when no large-scale fading was applied.
    pub pathloss: Vec<f64>,
}

impl ChannelBatch {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn has_pathloss(&self) -> bool {
        !self.pathloss.is_empty()
    }

    /// User `k`'s block of sample `i` (an `N_r x N_t` matrix).
    pub fn user_channel(&self, i: usize, k: usize) -> ComplexMatrix {
        self.samples[i].slice_rows(k * self.dims.rx_antennas, self.dims.rx_antennas)
    }

    pub fn pathloss_of(&self, i: usize, k: usize) -> f64 {
        if self.pathloss.is_empty() {
            1.0
        } else {
            self.pathloss[i * self.dims.users + k]
        }
    }
}

/// i.i.d. Rayleigh fading: every entry is CN(0, 1).
pub fn gen_rayleigh(dims: ChannelDims, sigma2: &[f64], n: usize, seed: u64) -> ChannelBatch {
    assert!(n >= 1, "need at least one sample");
    assert_eq!(sigma2.len(), dims.users);
    let rows = dims.stacked_rows();
    let cols = dims.tx_antennas;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = SeedStream::for_purpose(seed, Purpose::ChannelEntries, i as u64);
        let mut h = ComplexMatrix::zeros(rows, cols);
        for idx in 0..rows * cols {
            let (re, im) = s.complex_normal(1.0);
            h.re[idx] = re;
            h.im[idx] = im;
        }
        samples.push(h);
    }
    ChannelBatch {
        dims,
        samples,
        sigma2: sigma2.to_vec(),
        pathloss: Vec::new(),
    }
}

/// Geometric narrowband mmWave channel for single-antenna users.
///
/// Per user, `H_k = sqrt(N_t / I_p) * sum_l alpha_l * a(theta_l)^H` with
/// `alpha_l ~ CN(0,1)`, `theta_l ~ Uniform[-30 deg, 30 deg]`, and the
/// unit-norm half-wavelength ULA steering vector
/// `a(theta) = [exp(j pi m sin theta)]_m / sqrt(N_t)`, so that
/// `E |H_k|_F^2 = N_t`.
///
/// Draw order per sample, per user, per path: one CN pair for `alpha`
/// (from the entry stream), then one uniform for `theta` (from the angle
/// stream).
pub fn gen_mmwave(
    dims: ChannelDims,
    sigma2: &[f64],
    paths: usize,
    n: usize,
    seed: u64,
) -> ChannelBatch {
    assert!(n >= 1);
    assert!(paths >= 1, "need at least one propagation path");
    assert_eq!(
        dims.rx_antennas, 1,
        "geometric mmWave model is defined for single-antenna users"
    );
    assert_eq!(sigma2.len(), dims.users);
    let nt = dims.tx_antennas;
    let deg30 = core::f64::consts::PI / 6.0;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let mut gains = SeedStream::for_purpose(seed, Purpose::ChannelEntries, i as u64);
        let mut angles = SeedStream::for_purpose(seed, Purpose::ChannelAngles, i as u64);
        let mut h = ComplexMatrix::zeros(dims.users, nt);
        for k in 0..dims.users {
            for _ in 0..paths {
                let (ar, ai) = gains.complex_normal(1.0);
                let theta = angles.uniform_in(-deg30, deg30);
                let scale = (nt as f64 / paths as f64).sqrt() / (nt as f64).sqrt();
                for m in 0..nt {
                    let phase = core::f64::consts::PI * m as f64 * theta.sin();
                    // alpha * conj(e^{j phase}) = alpha * e^{-j phase}
                    let (c, s) = (phase.cos(), phase.sin());
                    h.re[k * nt + m] += scale * (ar * c + ai * s);
                    h.im[k * nt + m] += scale * (ai * c - ar * s);
                }
            }
        }
        samples.push(h);
    }
    ChannelBatch {
        dims,
        samples,
        sigma2: sigma2.to_vec(),
        pathloss: Vec::new(),
    }
}

/// Large-scale fading over a disc cell.
///
/// Users are dropped area-uniformly in a disc of the given radius around the
/// BS; with distance `d_k` the gain is `rho_k = 1 / (1 + (d_k/d0)^delta)`
/// and the channel block is scaled by `sqrt(rho_k)`. Two uniforms are drawn
/// per user (radius then angle), in sample-major, user-major order.
pub fn apply_pathloss(
    batch: &ChannelBatch,
    d0: f64,
    delta: f64,
    radius: f64,
    seed: u64,
) -> ChannelBatch {
    assert!(d0 > 0.0 && delta > 0.0 && radius >= 0.0);
    let k = batch.dims.users;
    let nr = batch.dims.rx_antennas;
    let mut out = batch.clone();
    out.pathloss = vec![0.0; batch.len() * k];
    for i in 0..batch.len() {
        let mut s = SeedStream::for_purpose(seed, Purpose::UserPositions, i as u64);
        for user in 0..k {
            let d = radius * s.uniform().sqrt();
            let _angle = s.uniform_in(0.0, 2.0 * core::f64::consts::PI);
            let rho = 1.0 / (1.0 + (d / d0).powf(delta));
            out.pathloss[i * k + user] = rho;
            let g = rho.sqrt();
            let sample = &mut out.samples[i];
            let cols = sample.cols;
            for r in user * nr..(user + 1) * nr {
                for c in 0..cols {
                    sample.re[r * cols + c] *= g;
                    sample.im[r * cols + c] *= g;
                }
            }
        }
    }
    out
}

/// Pilot-observation noise for one batch: per sample, per user an
/// `N_r x T_p` matrix with CN(0, sigma2_k) entries. Uses a stream
/// independent of the channel draws so that common-random-number runs can
/// pin both.
pub fn gen_pilot_noise(
    dims: ChannelDims,
    sigma2: &[f64],
    pilot_len: usize,
    n: usize,
    seed: u64,
) -> Vec<Vec<ComplexMatrix>> {
    let mut all = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = SeedStream::for_purpose(seed, Purpose::PilotNoise, i as u64);
        let mut per_user = Vec::with_capacity(dims.users);
        for k in 0..dims.users {
            let mut m = ComplexMatrix::zeros(dims.rx_antennas, pilot_len);
            for idx in 0..m.re.len() {
                let (re, im) = s.complex_normal(sigma2[k]);
                m.re[idx] = re;
                m.im[idx] = im;
            }
            per_user.push(m);
        }
        all.push(per_user);
    }
    all
}

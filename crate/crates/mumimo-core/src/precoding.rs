//! Classical (non-learned) precoder evaluation and solvers.
//!
//! Holds the achievable-rate and MSE-matrix evaluators, the zero-forcing and
//! regularized zero-forcing precoders, and the iterative WMMSE solver. These
//! are both the reference baselines and the structural template for the
//! learned precoder head.
//!
//! Rates are natural-log internally; conversion to bits happens at the
//! reporting layer.

use alloc::vec::Vec;

use crate::matrix::{ComplexMatrix, LinalgError, Result};

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// A combined downlink precoding matrix `V = [V_1, ..., V_K]` of shape
/// `N_t x K*N_r`, carrying its power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecodingMatrix {
    pub v: ComplexMatrix,
    pub users: usize,
    pub rx_antennas: usize,
    pub power: f64,
}

impl PrecodingMatrix {
    /// Wrap an unnormalized matrix, rescaling so that `Tr(V V^H) = power`
    /// holds exactly.
    pub fn normalized(v: ComplexMatrix, users: usize, rx_antennas: usize, power: f64) -> Self {
        assert_eq!(v.cols, users * rx_antennas);
        let tr = v.fro_norm_sq();
        assert!(tr > 0.0, "cannot normalize an all-zero precoder");
        let v = v.scale((power / tr).sqrt());
        Self {
            v,
            users,
            rx_antennas,
            power,
        }
    }

    /// User `k`'s block `V_k in C^{N_t x N_r}`.
    pub fn block(&self, k: usize) -> ComplexMatrix {
        self.v.slice_cols(k * self.rx_antennas, self.rx_antennas)
    }

    /// `|Tr(VV^H) - power| / power`.
    pub fn power_residual(&self) -> f64 {
        (self.v.fro_norm_sq() - self.power).abs() / self.power
    }
}

/// WMMSE iterate: receive filters, weight matrices, the precoder, and the
/// sum-rate trajectory so far.
#[derive(Debug, Clone)]
pub struct WmmseState {
    pub receive_filters: Vec<ComplexMatrix>,
    pub weights: Vec<ComplexMatrix>,
    pub precoder: PrecodingMatrix,
    pub iteration: usize,
    pub sum_rate_trace: Vec<f64>,
    pub converged: bool,
}

fn user_block(h: &ComplexMatrix, k: usize, nr: usize) -> ComplexMatrix {
    h.slice_rows(k * nr, nr)
}

/// Interference-plus-noise covariance at user `k`:
/// `sigma2_k I + sum_{i != k} H_k V_i V_i^H H_k^H`.
fn interference_cov(
    hk: &ComplexMatrix,
    v: &PrecodingMatrix,
    k: usize,
    sigma2_k: f64,
) -> Result<ComplexMatrix> {
    let nr = v.rx_antennas;
    let f = hk.matmul(&v.v)?; // N_r x K*N_r, user k sees H_k V
    let own = f.slice_cols(k * nr, nr);
    let all = f.matmul(&f.hermitian())?;
    let own_part = own.matmul(&own.hermitian())?;
    all.sub(&own_part)?.add_scaled_eye(sigma2_k)
}

/// Achievable rate of user `k` in nats:
/// `log det(I + H_k V_k V_k^H H_k^H (sigma2_k I + interference)^{-1})`,
/// the signal-covariance form that matches `log det(E_k^{-1})`.
pub fn user_rate(
    hk: &ComplexMatrix,
    v: &PrecodingMatrix,
    k: usize,
    sigma2_k: f64,
) -> Result<f64> {
    let nr = v.rx_antennas;
    let inn = interference_cov(hk, v, k, sigma2_k)?;
    let g = hk.matmul(&v.block(k))?; // N_r x N_r
    let signal = g.matmul(&g.hermitian())?;
    let a = signal.matmul(&inn.inverse()?)?.add_scaled_eye(1.0)?;
    a.logdet_abs()
}

/// Sum of user rates in nats for a stacked channel `H in C^{K*N_r x N_t}`.
pub fn sum_rate(h: &ComplexMatrix, v: &PrecodingMatrix, sigma2: &[f64]) -> Result<f64> {
    let nr = v.rx_antennas;
    if h.rows != v.users * nr || h.cols != v.v.rows {
        return Err(LinalgError::ShapeMismatch {
            op: "sum_rate",
            lhs: h.shape(),
            rhs: v.v.shape(),
        });
    }
    let mut total = 0.0;
    for k in 0..v.users {
        let hk = user_block(h, k, nr);
        total += user_rate(&hk, v, k, sigma2[k])?;
    }
    Ok(total)
}

/// Mean-square-error matrix `E_k` of user `k` under an MMSE receiver.
pub fn mse_matrix(
    hk: &ComplexMatrix,
    v: &PrecodingMatrix,
    k: usize,
    sigma2_k: f64,
) -> Result<ComplexMatrix> {
    let inn = interference_cov(hk, v, k, sigma2_k)?;
    let g = hk.matmul(&v.block(k))?;
    let m = g.hermitian().matmul(&inn.inverse()?)?.matmul(&g)?;
    m.add_scaled_eye(1.0)?.inverse()
}

/// `E_k^{-1}` without the double inversion; Hermitian by construction.
fn mse_matrix_inv(
    hk: &ComplexMatrix,
    v: &PrecodingMatrix,
    k: usize,
    sigma2_k: f64,
) -> Result<ComplexMatrix> {
    let inn = interference_cov(hk, v, k, sigma2_k)?;
    let g = hk.matmul(&v.block(k))?;
    let m = g.hermitian().matmul(&inn.inverse()?)?.matmul(&g)?;
    // Symmetrize away rounding asymmetry so downstream Cholesky is safe.
    let sym = m.add(&m.hermitian())?.scale(0.5);
    sym.add_scaled_eye(1.0)
}

/// Regularized zero forcing: `V = gamma H^H (H H^H + beta I)^{-1}` with
/// `beta = sum_k sigma2_k N_r / E_s` and `gamma` enforcing the power budget.
pub fn rzf(h: &ComplexMatrix, power: f64, sigma2: &[f64], rx_antennas: usize) -> Result<PrecodingMatrix> {
    let users = sigma2.len();
    let beta: f64 = sigma2.iter().map(|s| s * rx_antennas as f64 / power).sum();
    rzf_with_beta(h, power, beta, users, rx_antennas)
}

/// Zero forcing: the `beta = 0` limit of RZF.
pub fn zf(h: &ComplexMatrix, power: f64, users: usize, rx_antennas: usize) -> Result<PrecodingMatrix> {
    rzf_with_beta(h, power, 0.0, users, rx_antennas)
}

fn rzf_with_beta(
    h: &ComplexMatrix,
    power: f64,
    beta: f64,
    users: usize,
    rx_antennas: usize,
) -> Result<PrecodingMatrix> {
    let gram = h.matmul(&h.hermitian())?.add_scaled_eye(beta)?;
    let v = h.hermitian().matmul(&gram.inverse()?)?;
    Ok(PrecodingMatrix::normalized(v, users, rx_antennas, power))
}

/// One full WMMSE update: receive filters, weights, then the precoder.
pub fn wmmse_step(
    h: &ComplexMatrix,
    state: &WmmseState,
    power: f64,
    sigma2: &[f64],
) -> Result<WmmseState> {
    let users = state.precoder.users;
    let nr = state.precoder.rx_antennas;
    let nt = h.cols;
    let v = &state.precoder;

    let mut filters = Vec::with_capacity(users);
    let mut weights = Vec::with_capacity(users);
    for k in 0..users {
        let hk = user_block(h, k, nr);
        // Full receive covariance includes the desired stream.
        let f = hk.matmul(&v.v)?;
        let den = f.matmul(&f.hermitian())?.add_scaled_eye(sigma2[k])?;
        let u = v
            .block(k)
            .hermitian()
            .matmul(&hk.hermitian())?
            .matmul(&den.inverse()?)?;
        let w = mse_matrix_inv(&hk, v, k, sigma2[k])?;
        filters.push(u);
        weights.push(w);
    }

    let mut beta = 0.0;
    let mut a = ComplexMatrix::zeros(nt, nt);
    let mut rhs_blocks: Vec<ComplexMatrix> = Vec::with_capacity(users);
    for k in 0..users {
        let hk = user_block(h, k, nr);
        let u = &filters[k];
        let w = &weights[k];
        let uu = u.matmul(&u.hermitian())?;
        beta += sigma2[k] / power * w.matmul(&uu)?.trace_real()?;
        // H_k^H U_k^H W_k and its product with U_k H_k.
        let t = hk.hermitian().matmul(&u.hermitian())?.matmul(w)?;
        a = a.add(&t.matmul(u)?.matmul(&hk)?)?;
        rhs_blocks.push(t);
    }
    let a = a.add_scaled_eye(beta)?;
    let rhs_refs: Vec<&ComplexMatrix> = rhs_blocks.iter().collect();
    let v_tilde = a.inverse()?.matmul(&ComplexMatrix::hstack(&rhs_refs))?;
    let precoder = PrecodingMatrix::normalized(v_tilde, users, nr, power);

    let rate = sum_rate(h, &precoder, sigma2)?;
    let mut trace = state.sum_rate_trace.clone();
    trace.push(rate);
    Ok(WmmseState {
        receive_filters: filters,
        weights,
        precoder,
        iteration: state.iteration + 1,
        sum_rate_trace: trace,
        converged: false,
    })
}

/// Iterate [`wmmse_step`] from `init` until the sum-rate change falls below
/// `tol` (nats) or `max_iter` is reached.
pub fn wmmse_solve(
    h: &ComplexMatrix,
    power: f64,
    sigma2: &[f64],
    init: PrecodingMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<WmmseState> {
    let rate0 = sum_rate(h, &init, sigma2)?;
    let mut state = WmmseState {
        receive_filters: Vec::new(),
        weights: Vec::new(),
        precoder: init,
        iteration: 0,
        sum_rate_trace: alloc::vec![rate0],
        converged: false,
    };
    let mut last = rate0;
    for _ in 0..max_iter {
        state = wmmse_step(h, &state, power, sigma2)?;
        let rate = *state.sum_rate_trace.last().unwrap();
        if (rate - last).abs() < tol {
            state.converged = true;
            return Ok(state);
        }
        last = rate;
    }
    Ok(state)
}

/// Default convergence tolerance (nats of sum-rate change per iteration).
pub const WMMSE_TOL: f64 = 1e-6;
/// Default iteration cap.
pub const WMMSE_MAX_ITER: usize = 500;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{gen_rayleigh, ChannelDims};
    use crate::rng::SeedStream;
    use num_complex::Complex64;

    fn random_h(k: usize, nt: usize, nr: usize, seed: u64) -> ComplexMatrix {
        gen_rayleigh(
            ChannelDims {
                users: k,
                tx_antennas: nt,
                rx_antennas: nr,
            },
            &alloc::vec![1.0; k],
            1,
            seed,
        )
        .samples
        .remove(0)
    }

    #[test]
    fn rate_vanishes_with_vanishing_precoder() {
        let h = random_h(2, 4, 2, 1);
        let v = PrecodingMatrix::normalized(ComplexMatrix::eye(4), 2, 2, 1.0);
        let tiny = PrecodingMatrix {
            v: v.v.scale(1e-9),
            users: 2,
            rx_antennas: 2,
            power: 1e-18,
        };
        let r = sum_rate(&h, &tiny, &[0.1, 0.1]).unwrap();
        assert!(r < 1e-14, "rate {r}");
    }

    #[test]
    fn matched_filter_rate_closed_form() {
        let mut s = SeedStream::new(2, 0);
        let h = ComplexMatrix::from_fn(1, 3, |_, _| {
            let (re, im) = s.complex_normal(1.0);
            Complex64::new(re, im)
        });
        let es = 2.0;
        let sigma2 = 0.3;
        let v = PrecodingMatrix::normalized(h.hermitian(), 1, 1, es);
        let r = sum_rate(&h, &v, &[sigma2]).unwrap();
        let want = (1.0 + es * h.fro_norm_sq() / sigma2).ln();
        assert!((r - want).abs() < 1e-12 * want);
    }

    #[test]
    fn mse_identity_when_unserved() {
        let h = random_h(1, 2, 2, 3);
        // Zero block for the (single) user: E_k = I.
        let v = PrecodingMatrix {
            v: ComplexMatrix::zeros(2, 2),
            users: 1,
            rx_antennas: 2,
            power: 1.0,
        };
        let e = mse_matrix(&h, &v, 0, 0.5).unwrap();
        assert!(e.sub(&ComplexMatrix::eye(2)).unwrap().fro_norm() < 1e-12);
        assert!((e.trace_real().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mse_scalar_matched_filter() {
        let mut s = SeedStream::new(4, 0);
        let h = ComplexMatrix::from_fn(1, 2, |_, _| {
            let (re, im) = s.complex_normal(1.0);
            Complex64::new(re, im)
        });
        let es = 1.0;
        let sigma2 = 0.2;
        let v = PrecodingMatrix::normalized(h.hermitian(), 1, 1, es);
        let e = mse_matrix(&h, &v, 0, sigma2).unwrap();
        let snr = es * h.fro_norm_sq() / sigma2;
        assert!((e.get(0, 0).re - 1.0 / (1.0 + snr)).abs() < 1e-12);
    }

    #[test]
    fn rate_mse_bridge() {
        for seed in 0..50 {
            let h = random_h(2, 4, 2, 100 + seed);
            let raw = random_h(4, 4, 1, 200 + seed); // reuse generator for a random V
            let v = PrecodingMatrix::normalized(raw, 2, 2, 1.0);
            let sigma2 = [0.2, 0.4];
            let mut lhs = 0.0;
            let mut rhs = 0.0;
            for k in 0..2 {
                let hk = h.slice_rows(k * 2, 2);
                let e = mse_matrix(&hk, &v, k, sigma2[k]).unwrap();
                lhs += -e.logdet_hpd().unwrap();
                rhs += user_rate(&hk, &v, k, sigma2[k]).unwrap();
            }
            assert!(
                (lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0),
                "bridge violated: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn rzf_single_user_is_matched_filter_direction() {
        let h = random_h(1, 4, 1, 5);
        let v = rzf(&h, 1.0, &[0.1], 1).unwrap();
        // cosine similarity between v and h^H
        let hh = h.hermitian();
        let dot = hh.hermitian().matmul(&v.v).unwrap();
        let cos = dot.get(0, 0).norm() / (hh.fro_norm() * v.v.fro_norm());
        assert!(cos > 1.0 - 1e-12, "cosine {cos}");
    }

    #[test]
    fn rzf_power_equality() {
        let h = random_h(3, 6, 2, 6);
        let v = rzf(&h, 2.5, &[0.1, 0.2, 0.3], 2).unwrap();
        assert!(v.power_residual() < 1e-12);
    }

    #[test]
    fn zf_nulls_interference_at_high_snr() {
        let h = random_h(2, 4, 2, 7);
        let v = zf(&h, 1.0, 2, 2).unwrap();
        for k in 0..2 {
            for i in 0..2 {
                if i == k {
                    continue;
                }
                let hk = h.slice_rows(k * 2, 2);
                let leak = hk.matmul(&v.block(i)).unwrap().fro_norm();
                assert!(leak < 1e-6, "leakage {leak}");
            }
        }
    }

    #[test]
    fn zf_rank_deficient_errors() {
        // K*N_r > N_t makes H H^H singular.
        let h = random_h(3, 2, 1, 8);
        assert!(matches!(
            zf(&h, 1.0, 3, 1),
            Err(LinalgError::Singular { .. })
        ));
    }

    #[test]
    fn rzf_approaches_zf_as_noise_vanishes() {
        let h = random_h(2, 4, 2, 9);
        let vzf = zf(&h, 1.0, 2, 2).unwrap();
        let mut prev = f64::INFINITY;
        for sigma2 in [1e-2, 1e-4, 1e-6] {
            let vr = rzf(&h, 1.0, &[sigma2, sigma2], 2).unwrap();
            let d = vr.v.sub(&vzf.v).unwrap().fro_norm();
            assert!(d < prev);
            prev = d;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn wmmse_weights_match_mse_inverse() {
        let h = random_h(2, 4, 2, 10);
        let sigma2 = [0.2, 0.2];
        let init = rzf(&h, 1.0, &sigma2, 2).unwrap();
        let state = WmmseState {
            receive_filters: Vec::new(),
            weights: Vec::new(),
            precoder: init.clone(),
            iteration: 0,
            sum_rate_trace: alloc::vec![],
            converged: false,
        };
        let next = wmmse_step(&h, &state, 1.0, &sigma2).unwrap();
        for k in 0..2 {
            let hk = h.slice_rows(k * 2, 2);
            // Weight is built from the pre-update precoder.
            let e = mse_matrix(&hk, &init, k, sigma2[k]).unwrap();
            let w_ref = e.inverse().unwrap();
            let d = next.weights[k].sub(&w_ref).unwrap().fro_norm();
            assert!(d < 1e-9, "weight mismatch {d}");
            // Hermitian up to 1e-12.
            let asym = next.weights[k]
                .sub(&next.weights[k].hermitian())
                .unwrap()
                .fro_norm();
            assert!(asym < 1e-12);
        }
    }

    #[test]
    fn wmmse_monotone_and_fixed_point() {
        let h = random_h(2, 4, 2, 11);
        let sigma2 = [0.1, 0.1];
        let init = rzf(&h, 1.0, &sigma2, 2).unwrap();
        let state = wmmse_solve(&h, 1.0, &sigma2, init, 1e-10, 400).unwrap();
        assert!(state.converged);
        for w in state.sum_rate_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "trace decreased: {} -> {}", w[0], w[1]);
        }
        // Feeding the converged state back changes the rate negligibly.
        let again = wmmse_step(&h, &state, 1.0, &sigma2).unwrap();
        let last = state.sum_rate_trace.last().unwrap();
        let next = again.sum_rate_trace.last().unwrap();
        assert!((next - last).abs() < 1e-8);
        assert!(state.precoder.power_residual() < 1e-9);
    }

    #[test]
    fn wmmse_beats_rzf_start() {
        for seed in 0..10 {
            let h = random_h(2, 2, 1, 40 + seed);
            let sigma2 = [0.1, 0.1];
            let init = rzf(&h, 1.0, &sigma2, 1).unwrap();
            let r0 = sum_rate(&h, &init, &sigma2).unwrap();
            let state = wmmse_solve(&h, 1.0, &sigma2, init, 1e-8, 300).unwrap();
            assert!(*state.sum_rate_trace.last().unwrap() >= r0 - 1e-9);
        }
    }
}

//! Finite-dimensional cone/positivity machinery. The physical cone on
//! `H = H_e (x) H_ph` is fiberwise over the phonon position coordinates:
//! a vector belongs to the cone iff, after transforming the phonon factor
//! to the position frame, every fiber — matricized over the one-species
//! space — is a positive semidefinite matrix. On top of the membership
//! test this module provides seeded cone sampling, heat-semigroup
//! positivity checks with a structure-breaking negative control, the
//! ergodicity witness `<F,F;f| e^{-beta H} |F,F;g>`, the projected
//! semigroup operators `F_beta(X) = P_X e^{-beta H_0} Q_X e^{-beta H_0} P_X`
//! with their small-beta asymptotics, path products `E_beta(p)`, and
//! dominant-configuration extraction.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::fock::{config_vector, matricize, ElectronConfiguration, SpinfulBasis};
use crate::graph::ConfigPath;
use crate::linalg::{eigh_ascending, max_abs_dense, zdot, znorm, CsrMatrix, HermitianEig, C64};
use crate::ops::{projector, ProjectorKind};
use crate::phonon::{PhononSpace, PositionFrame};
use crate::{PamError, Result};

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Reshape a full-space vector (electron-major index `e * ph_dim + k`)
/// into an `(e_dim, ph_dim)` coefficient matrix.
fn reshape(phi: &[C64], e_dim: usize, ph_dim: usize) -> Result<Array2<C64>> {
    if phi.len() != e_dim * ph_dim {
        return Err(PamError::Operator(format!(
            "vector length {} does not factor as {e_dim} x {ph_dim}",
            phi.len()
        )));
    }
    let mut c = Array2::<C64>::zeros((e_dim, ph_dim));
    for e in 0..e_dim {
        for k in 0..ph_dim {
            c[(e, k)] = phi[e * ph_dim + k];
        }
    }
    Ok(c)
}

fn flatten(c: &Array2<C64>) -> Vec<C64> {
    let (e_dim, ph_dim) = c.dim();
    let mut out = vec![C64::new(0.0, 0.0); e_dim * ph_dim];
    for e in 0..e_dim {
        for k in 0..ph_dim {
            out[e * ph_dim + k] = c[(e, k)];
        }
    }
    out
}

/// Outcome of a fiberwise positive-semidefiniteness test.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConeReport {
    pub member: bool,
    /// Smallest fiber eigenvalue encountered (of the Hermitian parts).
    pub worst_eigenvalue: f64,
    /// Index of the position-frame node attaining it.
    pub worst_fiber: usize,
    /// Largest fiber non-Hermiticity `||M - M*||_max`.
    pub herm_residual: f64,
}

/// Fiberwise cone membership: transform the phonon factor to the position
/// frame, matricize each fiber over the one-species space, and require
/// minimum eigenvalue `>= -tol` (and Hermiticity within `max(tol, 1e-10)`)
/// for every fiber.
pub fn cone_membership(
    phi: &[C64],
    basis: &SpinfulBasis,
    frame: &PositionFrame,
    tol: f64,
) -> Result<ConeReport> {
    let e_dim = basis.dim();
    let coeff = reshape(phi, e_dim, frame.dim())?;
    let framed = frame.to_frame_columns(&coeff);
    let herm_tol = tol.max(1e-10);
    let mut worst = f64::INFINITY;
    let mut worst_fiber = 0usize;
    let mut herm_residual = 0.0f64;
    for k in 0..frame.dim() {
        let fiber: Vec<C64> = (0..e_dim).map(|e| framed[(e, k)]).collect();
        let m = matricize(&fiber, basis);
        let mh = m.t().mapv(|z| z.conj());
        let asym = max_abs_dense(&(&m - &mh));
        herm_residual = herm_residual.max(asym);
        let sym = (&m + &mh).mapv(|z| z * 0.5);
        let (vals, _) = eigh_ascending(&sym)?;
        if vals[0] < worst {
            worst = vals[0];
            worst_fiber = k;
        }
    }
    Ok(ConeReport {
        member: worst >= -tol && herm_residual <= herm_tol,
        worst_eigenvalue: worst,
        worst_fiber,
        herm_residual,
    })
}

/// The canonical interior-pointing cone vector: the identity matrix on the
/// electron factor tensored with the uniform (all-ones) position-frame
/// phonon vector, normalized.
pub fn canonical_cone_vector(basis: &SpinfulBasis, frame: &PositionFrame) -> Vec<C64> {
    let e_dim = basis.dim();
    let d = basis.up().len();
    let mut coeff = Array2::<C64>::zeros((e_dim, frame.dim()));
    let f = Array2::from_shape_fn((1, frame.dim()), |_| one());
    let f_num = frame.from_frame_columns(&f);
    for i in 0..d {
        let e = basis.index(i, i);
        for k in 0..frame.dim() {
            coeff[(e, k)] = f_num[(0, k)];
        }
    }
    let mut v = flatten(&coeff);
    let nrm = znorm(&v);
    for z in &mut v {
        *z /= nrm;
    }
    v
}

/// Rotate a state's global phase so its overlap with the canonical cone
/// vector is real nonnegative (a unique ground state of a cone-ergodic
/// semigroup then lands on its positive representative).
pub fn align_to_cone(phi: &mut [C64], basis: &SpinfulBasis, frame: &PositionFrame) {
    let canon = canonical_cone_vector(basis, frame);
    let ov = zdot(&canon, phi);
    if ov.norm() == 0.0 {
        return;
    }
    let rot = ov.conj() / ov.norm();
    for z in phi.iter_mut() {
        *z *= rot;
    }
}

/// Seeded random cone element: a PSD fiber matrix `G G*` (fixed across
/// fibers) tensored with a nonnegative position-frame phonon vector.
pub fn sample_cone_element(
    seed: u64,
    rank: usize,
    basis: &SpinfulBasis,
    frame: &PositionFrame,
) -> Result<Vec<C64>> {
    if rank == 0 {
        return Err(PamError::InvalidParams("cone sample rank must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = basis.up().len();
    let mut g = Array2::<C64>::zeros((d, rank));
    for i in 0..d {
        for j in 0..rank {
            g[(i, j)] = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
    }
    let a = g.dot(&g.t().mapv(|z| z.conj()));
    let f = Array2::from_shape_fn((1, frame.dim()), |_| C64::new(rng.gen::<f64>(), 0.0));
    let f_num = frame.from_frame_columns(&f);
    let e_dim = basis.dim();
    let mut coeff = Array2::<C64>::zeros((e_dim, frame.dim()));
    for i in 0..d {
        for j in 0..d {
            let e = basis.index(i, j);
            for k in 0..frame.dim() {
                coeff[(e, k)] = a[(i, j)] * f_num[(0, k)];
            }
        }
    }
    let mut v = flatten(&coeff);
    let nrm = znorm(&v);
    if nrm > 0.0 {
        for z in &mut v {
            *z /= nrm;
        }
    }
    Ok(v)
}

/// Per-sample outcome of a semigroup positivity check.
#[derive(Clone, Debug, Serialize)]
pub struct SemigroupReport {
    pub beta: f64,
    pub n_samples: usize,
    pub failures: usize,
    pub worst_eigenvalue: f64,
    pub per_sample_worst: Vec<f64>,
}

/// Apply `e^{-beta H}` (dense spectral exponential) to seeded cone samples
/// and test cone membership of each output at fiber-eigenvalue tolerance
/// `-tol`.
pub fn semigroup_positivity_check(
    heig: &HermitianEig,
    beta: f64,
    n_samples: usize,
    seed: u64,
    basis: &SpinfulBasis,
    frame: &PositionFrame,
    tol: f64,
) -> Result<SemigroupReport> {
    let mut failures = 0usize;
    let mut worst = f64::INFINITY;
    let mut per_sample_worst = Vec::with_capacity(n_samples);
    for s in 0..n_samples {
        let v = sample_cone_element(seed.wrapping_add(s as u64), 1 + s % 3, basis, frame)?;
        let out = heig.apply_expm(C64::new(-beta, 0.0), &v);
        let report = cone_membership(&out, basis, frame, tol)?;
        per_sample_worst.push(report.worst_eigenvalue);
        if !report.member {
            failures += 1;
        }
        worst = worst.min(report.worst_eigenvalue);
    }
    Ok(SemigroupReport {
        beta,
        n_samples,
        failures,
        worst_eigenvalue: worst,
        per_sample_worst,
    })
}

/// Structure-breaking negative control: add the spin-asymmetric term
/// `eps (n^d_{0,up} - n^d_{0,down}) (x) 1`, which destroys the
/// positivity-compatible form while staying Hermitian.
pub fn negative_control(
    h: &CsrMatrix,
    basis: &SpinfulBasis,
    ph_dim: usize,
    eps: f64,
) -> CsrMatrix {
    let n = basis.n_sites();
    let bit = crate::fock::hat_mode(n, crate::fock::Species::D, 0);
    let diag: Vec<C64> = (0..basis.dim())
        .map(|i| {
            let (iu, idn) = basis.split(i);
            let nu = ((basis.up().state(iu) >> bit) & 1) as f64;
            let nd = ((basis.down().state(idn) >> bit) & 1) as f64;
            C64::new(eps * (nu - nd), 0.0)
        })
        .collect();
    let pert = CsrMatrix::from_diagonal(&diag).kron(&CsrMatrix::identity(ph_dim));
    h.add_scaled(one(), &pert, one())
}

/// The matrix element `<F,F; f| e^{-beta H} |F,F; g>` for phonon vectors
/// given by nonnegative position-frame coordinates.
pub fn ergodicity_witness(
    heig: &HermitianEig,
    basis: &SpinfulBasis,
    frame: &PositionFrame,
    f_frame: &[f64],
    g_frame: &[f64],
    beta: f64,
) -> Result<f64> {
    if f_frame.len() != frame.dim() || g_frame.len() != frame.dim() {
        return Err(PamError::InvalidParams(
            "frame coordinate length mismatch".into(),
        ));
    }
    if f_frame.iter().chain(g_frame).any(|&v| v < 0.0) {
        return Err(PamError::InvalidParams(
            "witness phonon vectors must be nonnegative in the frame".into(),
        ));
    }
    let n = basis.n_sites();
    let f_cfg = ElectronConfiguration::full_f(n);
    let idx = config_vector(&f_cfg, basis.up())?;
    let e = basis.index(idx, idx);
    let embed = |coords: &[f64]| -> Vec<C64> {
        let row = Array2::from_shape_fn((1, frame.dim()), |(_, k)| C64::new(coords[k], 0.0));
        let num = frame.from_frame_columns(&row);
        let mut v = vec![C64::new(0.0, 0.0); basis.dim() * frame.dim()];
        for k in 0..frame.dim() {
            v[e * frame.dim() + k] = num[(0, k)];
        }
        v
    };
    let fv = embed(f_frame);
    let gv = embed(g_frame);
    let out = heig.apply_expm(C64::new(-beta, 0.0), &gv);
    Ok(zdot(&fv, &out).re)
}

fn full_projector(
    kind: ProjectorKind,
    cfg: &ElectronConfiguration,
    basis: &SpinfulBasis,
    ph_dim: usize,
) -> Array2<C64> {
    projector(kind, cfg, basis)
        .kron(&CsrMatrix::identity(ph_dim))
        .to_dense()
}

/// `F_beta(X) = P_X e^{-beta H_0} Q_X e^{-beta H_0} P_X` as a dense matrix
/// (`h0` is the spectral decomposition of `H_0`).
pub fn f_beta(
    cfg: &ElectronConfiguration,
    beta: f64,
    h0: &HermitianEig,
    basis: &SpinfulBasis,
    ph: &PhononSpace,
) -> Result<Array2<C64>> {
    let p = full_projector(ProjectorKind::P, cfg, basis, ph.dim());
    let q = full_projector(ProjectorKind::Q, cfg, basis, ph.dim());
    let e = h0.expm(C64::new(-beta, 0.0));
    Ok(p.dot(&e).dot(&q).dot(&e).dot(&p))
}

/// Small-beta asymptotics record for `F_beta(X)`.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticsReport {
    pub config: ElectronConfiguration,
    /// `4 |X|_triangle`, the leading order in beta.
    pub exponent: u32,
    pub betas: Vec<f64>,
    /// `|| beta^{-4|X|_tri} F_beta(X) - V^{4|X|_tri} E_X ||_max` per beta.
    pub residuals: Vec<f64>,
    /// Residuals decrease monotonically and the final ratio is `>= 1.5`.
    pub pass: bool,
    /// Set when the standing assumption `V != 0` is violated.
    pub outside_assumptions: bool,
}

/// Verify `F_beta(X) = beta^{4|X|_tri} V^{4|X|_tri} E_X + o(...)` over a
/// decreasing beta schedule: the normalized residual must shrink
/// monotonically, and the last two residuals must differ by a factor
/// `>= 1.5`. (The relative correction is O(beta), so halving beta drives
/// the ratio toward 2; the largest beta in a default schedule need not be
/// in the asymptotic regime yet, hence the ratio test applies to the
/// final step only.)
pub fn asymptotic_check(
    cfg: &ElectronConfiguration,
    schedule: &[f64],
    h0: &HermitianEig,
    basis: &SpinfulBasis,
    ph: &PhononSpace,
    v: f64,
) -> Result<AsymptoticsReport> {
    if schedule.len() < 3 {
        return Err(PamError::InvalidParams(
            "asymptotics schedule needs at least 3 points".into(),
        ));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) || schedule.iter().any(|&b| b <= 0.0) {
        return Err(PamError::InvalidParams(
            "schedule must be positive and strictly decreasing".into(),
        ));
    }
    let m = cfg.sym_diff_size() as u32;
    let exponent = 4 * m;
    let target = full_projector(ProjectorKind::EE, cfg, basis, ph.dim())
        .mapv(|z| z * C64::new(v.powi(exponent as i32), 0.0));
    let mut residuals = Vec::with_capacity(schedule.len());
    for &beta in schedule {
        let fb = f_beta(cfg, beta, h0, basis, ph)?;
        let scaled = fb.mapv(|z| z / C64::new(beta.powi(exponent as i32), 0.0));
        residuals.push(max_abs_dense(&(&scaled - &target)));
    }
    let outside_assumptions = v == 0.0;
    let monotone = residuals.windows(2).all(|w| w[1] < w[0]);
    let last_ratio_ok = residuals
        .windows(2)
        .last()
        .map(|w| w[1] > 0.0 && w[0] / w[1] >= 1.5)
        .unwrap_or(false);
    let pass = !outside_assumptions && monotone && last_ratio_ok;
    Ok(AsymptoticsReport {
        config: *cfg,
        exponent,
        betas: schedule.to_vec(),
        residuals,
        pass,
        outside_assumptions,
    })
}

/// Path product `E_beta(p) = E_{X_1} e^{-beta H_0} E_{X_2} ... E_{X_n}`.
pub fn e_beta_path(
    path: &ConfigPath,
    beta: f64,
    h0: &HermitianEig,
    basis: &SpinfulBasis,
    ph: &PhononSpace,
) -> Result<Array2<C64>> {
    if path.is_empty() {
        return Err(PamError::InvalidParams("empty path".into()));
    }
    let e = h0.expm(C64::new(-beta, 0.0));
    let mut acc = full_projector(ProjectorKind::EE, &path.configs[0], basis, ph.dim());
    for cfg in &path.configs[1..] {
        acc = acc
            .dot(&e)
            .dot(&full_projector(ProjectorKind::EE, cfg, basis, ph.dim()));
    }
    Ok(acc)
}

/// Convergence record for `beta^{-2(|p|-1)} E_beta(p) |X,X; phi>`.
#[derive(Clone, Debug, Serialize)]
pub struct PathProductReport {
    pub betas: Vec<f64>,
    /// Overlap of the `|F,F>` fiber with the reference phonon vector.
    pub c_values: Vec<f64>,
    /// Relative weight outside the `|F,F>` electron component.
    pub off_residuals: Vec<f64>,
    pub pass: bool,
}

/// Check that the normalized path product applied to `|X,X; phi>`
/// converges to a positive multiple of `|F,F>` tensored with a phonon
/// vector: `c` at the smallest beta must be positive and the off-component
/// residual below `off_tol`. The path must run from `F` to `X`.
pub fn path_product_check(
    path: &ConfigPath,
    schedule: &[f64],
    h0: &HermitianEig,
    basis: &SpinfulBasis,
    ph: &PhononSpace,
    frame: &PositionFrame,
    phi_frame: &[f64],
    off_tol: f64,
) -> Result<PathProductReport> {
    let n = basis.n_sites();
    let f_cfg = ElectronConfiguration::full_f(n);
    if *path.first() != f_cfg {
        return Err(PamError::InvalidParams(format!(
            "path must start at F, got {:?}",
            path.first()
        )));
    }
    if phi_frame.len() != frame.dim() || phi_frame.iter().any(|&x| x < 0.0) {
        return Err(PamError::InvalidParams(
            "fiber must be nonnegative frame coordinates".into(),
        ));
    }
    let x_cfg = path.last();
    let ix = config_vector(x_cfg, basis.up())?;
    let if_ = config_vector(&f_cfg, basis.up())?;
    let e_x = basis.index(ix, ix);
    let e_f = basis.index(if_, if_);
    let row = Array2::from_shape_fn((1, frame.dim()), |(_, k)| C64::new(phi_frame[k], 0.0));
    let fiber_num = frame.from_frame_columns(&row);
    let mut input = vec![C64::new(0.0, 0.0); basis.dim() * ph.dim()];
    for k in 0..ph.dim() {
        input[e_x * ph.dim() + k] = fiber_num[(0, k)];
    }
    let exponent = 2 * (path.len() as i32 - 1);
    let mut c_values = Vec::new();
    let mut off_residuals = Vec::new();
    for &beta in schedule {
        let op = e_beta_path(path, beta, h0, basis, ph)?;
        let mut w = vec![C64::new(0.0, 0.0); input.len()];
        for r in 0..input.len() {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..input.len() {
                acc += op[(r, c)] * input[c];
            }
            w[r] = acc / C64::new(beta.powi(exponent), 0.0);
        }
        let total: f64 = znorm(&w);
        let mut ff_overlap = C64::new(0.0, 0.0);
        let mut ff_norm2 = 0.0f64;
        for k in 0..ph.dim() {
            let z = w[e_f * ph.dim() + k];
            ff_overlap += fiber_num[(0, k)].conj() * z;
            ff_norm2 += z.norm_sqr();
        }
        let off = (total * total - ff_norm2).max(0.0).sqrt();
        c_values.push(ff_overlap.re);
        off_residuals.push(if total > 0.0 { off / total } else { 0.0 });
    }
    let pass = c_values.last().copied().unwrap_or(0.0) > 0.0
        && off_residuals.last().copied().unwrap_or(1.0) < off_tol;
    Ok(PathProductReport {
        betas: schedule.to_vec(),
        c_values,
        off_residuals,
        pass,
    })
}

/// Dominant-configuration extraction result.
#[derive(Clone, Debug, Serialize)]
pub struct DominantConfig {
    pub config: ElectronConfiguration,
    pub fiber_norm: f64,
    /// `|| E_X phi - |X,X> (x) phi_XX ||`.
    pub identity_residual: f64,
}

/// Among configurations `Z` with nonzero diagonal fiber `phi_{Z,Z}`, pick
/// one with the largest `|Z|_triangle` (ties by enumeration order) and
/// verify `E_X phi = |X,X> (x) phi_{X,X}` as a vector identity.
pub fn dominant_config(
    phi: &[C64],
    basis: &SpinfulBasis,
    ph: &PhononSpace,
    threshold: f64,
) -> Result<DominantConfig> {
    let n = basis.n_sites();
    let configs = crate::graph::enumerate_configs(n);
    let mut best: Option<(ElectronConfiguration, f64)> = None;
    for cfg in &configs {
        let i = config_vector(cfg, basis.up())?;
        let e = basis.index(i, i);
        let norm: f64 = (0..ph.dim())
            .map(|k| phi[e * ph.dim() + k].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm <= threshold {
            continue;
        }
        let better = match best {
            None => true,
            Some((b, _)) => cfg.sym_diff_size() > b.sym_diff_size(),
        };
        if better {
            best = Some((*cfg, norm));
        }
    }
    let (config, fiber_norm) = best.ok_or_else(|| {
        PamError::Operator(
            "all diagonal fibers vanish (contradicts cone membership of a nonzero vector)".into(),
        )
    })?;
    let i = config_vector(&config, basis.up())?;
    let e = basis.index(i, i);
    let ee = projector(ProjectorKind::EE, &config, basis).kron(&CsrMatrix::identity(ph.dim()));
    let projected = ee.matvec(phi);
    let mut expected = vec![C64::new(0.0, 0.0); phi.len()];
    for k in 0..ph.dim() {
        expected[e * ph.dim() + k] = phi[e * ph.dim() + k];
    }
    let mut diff = projected;
    for (d, x) in diff.iter_mut().zip(&expected) {
        *d -= *x;
    }
    Ok(DominantConfig {
        config,
        fiber_norm,
        identity_residual: znorm(&diff),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ham::{build_deformed, Model, ModelParams};
    use crate::lattice::{build_lattice, LatticeKind};

    fn setup(n: usize, n_max: usize) -> (crate::lattice::Lattice, SpinfulBasis, PhononSpace, PositionFrame) {
        let lat = build_lattice(&LatticeKind::Chain { n }, 1.0).unwrap();
        let basis = SpinfulBasis::half_filled(n).unwrap();
        let ph = PhononSpace::new(n, n_max).unwrap();
        let frame = PositionFrame::new(&ph).unwrap();
        (lat, basis, ph, frame)
    }

    fn d_params(g: f64) -> ModelParams {
        let mut p = ModelParams {
            epsilon_f: 0.0,
            u_f: 2.0,
            u_d: 1.0,
            v: 1.0,
            g,
            omega0: 1.0,
            model: Model::DCoupled,
        };
        p.epsilon_f = p.symmetric_epsilon_f();
        p
    }

    #[test]
    fn membership_examples() {
        let (_, basis, ph, frame) = setup(1, 3);
        // |X,X> (x) vacuum is a member: rank-one PSD fibers with positive
        // vacuum frame weights.
        let cfg = ElectronConfiguration::new(1, 0);
        let i = config_vector(&cfg, basis.up()).unwrap();
        let e = basis.index(i, i);
        let mut v = vec![C64::new(0.0, 0.0); basis.dim() * ph.dim()];
        let vac = ph.vacuum();
        for k in 0..ph.dim() {
            v[e * ph.dim() + k] = vac[k];
        }
        let r = cone_membership(&v, &basis, &frame, 1e-12).unwrap();
        assert!(r.member, "worst {}", r.worst_eigenvalue);
        // |X,Y> + |Y,X| with X != Y: indefinite fiber.
        let cfg2 = ElectronConfiguration::new(0, 1);
        let j = config_vector(&cfg2, basis.up()).unwrap();
        let mut w = vec![C64::new(0.0, 0.0); basis.dim() * ph.dim()];
        for k in 0..ph.dim() {
            w[basis.index(i, j) * ph.dim() + k] = vac[k];
            w[basis.index(j, i) * ph.dim() + k] = vac[k];
        }
        let r = cone_membership(&w, &basis, &frame, 1e-12).unwrap();
        assert!(!r.member);
        assert!(r.worst_eigenvalue < -0.1);
        // The zero vector is a (boundary) member.
        let z = vec![C64::new(0.0, 0.0); basis.dim() * ph.dim()];
        assert!(cone_membership(&z, &basis, &frame, 0.0).unwrap().member);
    }

    #[test]
    fn samples_are_members_and_convex() {
        let (_, basis, ph, frame) = setup(1, 3);
        let a = sample_cone_element(11, 1, &basis, &frame).unwrap();
        let b = sample_cone_element(12, 2, &basis, &frame).unwrap();
        assert!(cone_membership(&a, &basis, &frame, 1e-12).unwrap().member);
        assert!(cone_membership(&b, &basis, &frame, 1e-12).unwrap().member);
        // Reproducibility.
        let a2 = sample_cone_element(11, 1, &basis, &frame).unwrap();
        assert_eq!(a, a2);
        // Convexity.
        let mix: Vec<C64> = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x + y) * C64::new(0.5, 0.0))
            .collect();
        assert!(cone_membership(&mix, &basis, &frame, 1e-12).unwrap().member);
        let _ = ph;
    }

    #[test]
    fn semigroup_preserves_cone_and_control_breaks_it() {
        let (lat, basis, ph, frame) = setup(1, 4);
        let set = build_deformed(&lat, &d_params(0.3), &basis, &ph).unwrap();
        let heig = HermitianEig::new(&set.h.to_dense(), 1e-10).unwrap();
        // beta = 0 is the identity: all samples pass trivially.
        let r0 = semigroup_positivity_check(&heig, 0.0, 10, 3, &basis, &frame, 1e-8).unwrap();
        assert_eq!(r0.failures, 0);
        let r = semigroup_positivity_check(&heig, 0.5, 50, 3, &basis, &frame, 1e-8).unwrap();
        assert_eq!(r.failures, 0, "worst fiber eigenvalue {}", r.worst_eigenvalue);
        // Monotonicity <u| e^{-bH} v> >= <u| e^{-bH0} v> >= 0 on samples.
        let h0eig = HermitianEig::new(&set.h0.to_dense(), 1e-10).unwrap();
        for s in 0..10u64 {
            let u = sample_cone_element(100 + s, 1, &basis, &frame).unwrap();
            let v = sample_cone_element(200 + s, 2, &basis, &frame).unwrap();
            let hv = heig.apply_expm(C64::new(-0.5, 0.0), &v);
            let h0v = h0eig.apply_expm(C64::new(-0.5, 0.0), &v);
            let a = zdot(&u, &hv).re;
            let b = zdot(&u, &h0v).re;
            assert!(b >= -1e-12, "e^-bH0 matrix element {b}");
            assert!(a >= b - 1e-10, "monotonicity violated: {a} < {b}");
        }
        // Negative control: a spin-asymmetric perturbation must produce
        // at least one failure.
        let bad = negative_control(&set.h, &basis, ph.dim(), 0.6);
        let beig = HermitianEig::new(&bad.to_dense(), 1e-10).unwrap();
        let rb = semigroup_positivity_check(&beig, 1.0, 50, 3, &basis, &frame, 1e-8).unwrap();
        assert!(rb.failures > 0, "negative control produced no failures");
    }

    #[test]
    fn interaction_preserves_cone() {
        // R_0 and R_1 are positive multiples of diagonal projectors in the
        // theorem regime; they map cone samples into the cone.
        let (lat, basis, ph, frame) = setup(1, 3);
        let set = build_deformed(&lat, &d_params(0.3), &basis, &ph).unwrap();
        for (s, r) in [(0u64, &set.r0), (1, &set.r1)] {
            let v = sample_cone_element(40 + s, 2, &basis, &frame).unwrap();
            let out = r.matvec(&v);
            let rep = cone_membership(&out, &basis, &frame, 1e-10).unwrap();
            assert!(rep.member, "worst {}", rep.worst_eigenvalue);
        }
    }

    #[test]
    fn deformed_ground_state_is_strictly_positive() {
        let (lat, basis, ph, frame) = setup(1, 4);
        let set = build_deformed(&lat, &d_params(0.3), &basis, &ph).unwrap();
        let gs = crate::spectral::ground_state(&set.h, &crate::spectral::SolverOpts::default())
            .unwrap();
        assert!(gs.is_unique());
        let mut psi = gs.psi.clone();
        align_to_cone(&mut psi, &basis, &frame);
        let rep = cone_membership(&psi, &basis, &frame, 1e-8).unwrap();
        assert!(rep.member, "worst {}", rep.worst_eigenvalue);
        // Strictly positive overlap with every sample.
        for s in 0..20u64 {
            let v = sample_cone_element(500 + s, 1 + (s % 3) as usize, &basis, &frame).unwrap();
            let ov = zdot(&v, &psi).re;
            assert!(ov > 1e-10, "sample {s}: overlap {ov}");
        }
    }

    #[test]
    fn witness_is_positive() {
        let (lat, basis, ph, frame) = setup(1, 4);
        let set = build_deformed(&lat, &d_params(0.3), &basis, &ph).unwrap();
        let heig = HermitianEig::new(&set.h.to_dense(), 1e-10).unwrap();
        // Truncated vacuum in frame coordinates (all positive).
        let vac = ph.vacuum();
        let row = Array2::from_shape_fn((1, ph.dim()), |(_, k)| vac[k]);
        let framed = frame.to_frame_columns(&row);
        let coords: Vec<f64> = (0..ph.dim()).map(|k| framed[(0, k)].re.max(0.0)).collect();
        // beta = 0 reduces to <f|g> > 0.
        let w0 = ergodicity_witness(&heig, &basis, &frame, &coords, &coords, 0.0).unwrap();
        assert!(w0 > 0.0);
        for beta in [0.01, 0.05, 0.5, 1.0] {
            let w = ergodicity_witness(&heig, &basis, &frame, &coords, &coords, beta).unwrap();
            assert!(w > 0.0, "witness at beta {beta} was {w}");
        }
    }

    #[test]
    fn f_beta_at_zero_is_ee_for_balanced_configs() {
        let (lat, basis, ph, _) = setup(1, 3);
        let set = build_deformed(&lat, &d_params(0.3), &basis, &ph).unwrap();
        let h0 = HermitianEig::new(&set.h0.to_dense(), 1e-10).unwrap();
        // At beta -> 0, F_0(X) = P_X Q_X P_X; with X_d = X_f this equals
        // E_X. n = 1 has no balanced config (|X_d|+|X_f| odd), so check
        // the operator identity at n = 2 with a trivial (zero) H_0, where
        // e^{-beta H_0} drops out for every beta.
        let lat2 = build_lattice(&LatticeKind::Chain { n: 2 }, 1.0).unwrap();
        let basis2 = SpinfulBasis::half_filled(2).unwrap();
        let ph1 = PhononSpace::new(2, 1).unwrap();
        let cfg = ElectronConfiguration::new(0b01, 0b01);
        let full_dim = basis2.dim() * ph1.dim();
        let h0_triv =
            HermitianEig::new(&CsrMatrix::zeros(full_dim, full_dim).to_dense(), 1e-10).unwrap();
        let f0 = f_beta(&cfg, 0.0, &h0_triv, &basis2, &ph1).unwrap();
        let ee = full_projector(ProjectorKind::EE, &cfg, &basis2, ph1.dim());
        assert!(max_abs_dense(&(&f0 - &ee)) < 1e-12);
        let _ = (h0, lat2);
    }

    #[test]
    fn f_beta_is_cone_positive_on_samples() {
        let (lat, basis, ph, frame) = setup(1, 3);
        let set = build_deformed(&lat, &d_params(0.3), &basis, &ph).unwrap();
        let h0 = HermitianEig::new(&set.h0.to_dense(), 1e-10).unwrap();
        let cfg = ElectronConfiguration::new(1, 0);
        let fb = f_beta(&cfg, 0.3, &h0, &basis, &ph).unwrap();
        for s in 0..10u64 {
            let v = sample_cone_element(700 + s, 1, &basis, &frame).unwrap();
            let mut out = vec![C64::new(0.0, 0.0); v.len()];
            for r in 0..v.len() {
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..v.len() {
                    acc += fb[(r, c)] * v[c];
                }
                out[r] = acc;
            }
            let rep = cone_membership(&out, &basis, &frame, 1e-9).unwrap();
            assert!(rep.member, "sample {s}: worst {}", rep.worst_eigenvalue);
        }
    }

    #[test]
    fn asymptotics_converge_for_n1() {
        let (lat, basis, ph, _) = setup(1, 4);
        let set = build_deformed(&lat, &d_params(0.3), &basis, &ph).unwrap();
        let h0 = HermitianEig::new(&set.h0.to_dense(), 1e-10).unwrap();
        let cfg = ElectronConfiguration::new(1, 0);
        let rep =
            asymptotic_check(&cfg, &[0.2, 0.1, 0.05, 0.025], &h0, &basis, &ph, 1.0).unwrap();
        assert_eq!(rep.exponent, 4);
        assert!(rep.pass, "residuals {:?}", rep.residuals);
        // Schedule validation.
        assert!(asymptotic_check(&cfg, &[0.1, 0.2, 0.05], &h0, &basis, &ph, 1.0).is_err());
        assert!(asymptotic_check(&cfg, &[0.2, 0.1], &h0, &basis, &ph, 1.0).is_err());
    }

    #[test]
    fn trivial_path_product_is_identity_on_ff() {
        let (lat, basis, ph, frame) = setup(1, 3);
        let set = build_deformed(&lat, &d_params(0.3), &basis, &ph).unwrap();
        let h0 = HermitianEig::new(&set.h0.to_dense(), 1e-10).unwrap();
        let f = ElectronConfiguration::full_f(1);
        let path = ConfigPath { configs: vec![f] };
        let vac = ph.vacuum();
        let row = Array2::from_shape_fn((1, ph.dim()), |(_, k)| vac[k]);
        let framed = frame.to_frame_columns(&row);
        let coords: Vec<f64> = (0..ph.dim()).map(|k| framed[(0, k)].re.max(0.0)).collect();
        let rep =
            path_product_check(&path, &[0.1], &h0, &basis, &ph, &frame, &coords, 1e-8).unwrap();
        assert!(rep.pass);
        assert!((rep.c_values[0] - 1.0).abs() < 1e-10);
        assert!(rep.off_residuals[0] < 1e-12);
        let _ = lat;
    }

    #[test]
    fn length_two_path_product_converges() {
        let (lat, basis, ph, frame) = setup(1, 4);
        let set = build_deformed(&lat, &d_params(0.3), &basis, &ph).unwrap();
        let h0 = HermitianEig::new(&set.h0.to_dense(), 1e-10).unwrap();
        let f = ElectronConfiguration::full_f(1);
        let x = ElectronConfiguration::new(1, 0);
        let path = ConfigPath {
            configs: vec![f, x],
        };
        assert!(crate::graph::validate_path(&path, &lat).unwrap().valid);
        let vac = ph.vacuum();
        let row = Array2::from_shape_fn((1, ph.dim()), |(_, k)| vac[k]);
        let framed = frame.to_frame_columns(&row);
        let coords: Vec<f64> = (0..ph.dim()).map(|k| framed[(0, k)].re.max(0.0)).collect();
        let rep = path_product_check(
            &path,
            &[0.2, 0.1, 0.05, 0.025],
            &h0,
            &basis,
            &ph,
            &frame,
            &coords,
            1e-6,
        )
        .unwrap();
        assert!(rep.pass, "c {:?} off {:?}", rep.c_values, rep.off_residuals);
        assert!(rep.c_values.last().unwrap() > &0.0);
    }

    #[test]
    fn dominant_config_examples() {
        let (_, basis, ph, frame) = setup(1, 3);
        // phi = |X,X> (x) vacuum returns X.
        let x = ElectronConfiguration::new(1, 0);
        let i = config_vector(&x, basis.up()).unwrap();
        let mut v = vec![C64::new(0.0, 0.0); basis.dim() * ph.dim()];
        let vac = ph.vacuum();
        for k in 0..ph.dim() {
            v[basis.index(i, i) * ph.dim() + k] = vac[k];
        }
        let d = dominant_config(&v, &basis, &ph, 1e-12).unwrap();
        assert_eq!(d.config, x);
        assert!(d.identity_residual < 1e-12);
        // Mixture of |F,F> and |X,X|: both have |.|_tri = 1 at n = 1; the
        // tie breaks by enumeration order (F = (d[], f[0]) comes first).
        let f = ElectronConfiguration::full_f(1);
        let j = config_vector(&f, basis.up()).unwrap();
        let mut w = v.clone();
        for k in 0..ph.dim() {
            w[basis.index(j, j) * ph.dim() + k] = vac[k];
        }
        let d = dominant_config(&w, &basis, &ph, 1e-12).unwrap();
        assert_eq!(d.config, f);
        // Random cone sample satisfies the identity.
        let s = sample_cone_element(9, 2, &basis, &frame).unwrap();
        let d = dominant_config(&s, &basis, &ph, 1e-12).unwrap();
        assert!(d.identity_residual < 1e-10, "residual {}", d.identity_residual);
        // All-zero input errors.
        let z = vec![C64::new(0.0, 0.0); basis.dim() * ph.dim()];
        assert!(dominant_config(&z, &basis, &ph, 1e-12).is_err());
    }
}

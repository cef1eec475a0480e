//! Model Hamiltonians restricted to the half-filled `S^3_tot = 0` sector:
//! the bare periodic Anderson model (PAM), its two phonon-coupled variants,
//! the deformed operators `H = H_0 - R` produced by the Lang–Firsov /
//! phonon-rotation / hole–particle transformations, and the reference
//! Hubbard Hamiltonian used by the overlap argument for the total spin.
//!
//! Conventions (electron part on `H_e`, phonons on the right kron factor):
//!
//! * `H_PAM = sum (-t_{xy}) d*_x d_y + eps_f sum n^f + V sum (f* d + d* f)
//!    + U^f sum n^f_up n^f_down`,
//! * model `d`: `H_PAM + U^d sum n^d_up n^d_down
//!    + g sum_x n^d_x (b*_x + b_x) + omega0 N_p`, and model `f` likewise
//!   with `n^f_x` in the coupling,
//! * deformed (model `d`, at the symmetric `eps_f`):
//!   `H_0 = T_up(Phi) + T_down(-Phi) + V_up(Phi) + V_down(-Phi)
//!    + (U^d_eff / 2) sum n^d + omega0 N_p`, `H = H_0 - R` with
//!   `R = (U^f/2) [sum n^f_up n^f_down + sum (1 - n^f_up)(1 - n^f_down)]
//!    + U^d_eff sum n^d_up n^d_down`, and the spectral shift
//!   `spec(H) = spec(bold H) + 2 g^2 |Lambda| / omega0 - U^d_eff |Lambda|/2`;
//! * deformed (model `f`): `H^f_0 = T_up + T_down + V_up(-Phi) + V_down(Phi)
//!    + (U^d/2) sum n^d + omega0 N_p`, `R_f` with `U^f_eff` in place of
//!   `U^f` and `U^d` in place of `U^d_eff`, and shift `- U^d |Lambda|`.

use serde::{Deserialize, Serialize};

use crate::fock::{build_spinful_op, Species, Spin, SpinfulBasis, Term};
use crate::lattice::Lattice;
use crate::linalg::{C64, CsrMatrix};
use crate::phonon::PhononSpace;
use crate::{PamError, Result};

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Which model to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    /// Bare PAM, no phonons.
    Pam,
    /// Phonons coupled to the conduction density `n^d` (model 1).
    DCoupled,
    /// Phonons coupled to the localized density `n^f` (model 2).
    FCoupled,
}

/// Coupling constants. `v != 0` and `omega0 > 0` are standing assumptions.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ModelParams {
    pub epsilon_f: f64,
    pub u_f: f64,
    pub u_d: f64,
    pub v: f64,
    pub g: f64,
    pub omega0: f64,
    pub model: Model,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.v == 0.0 {
            return Err(PamError::InvalidParams("hybridization V must be nonzero".into()));
        }
        if self.omega0 <= 0.0 {
            return Err(PamError::InvalidParams("omega0 must be positive".into()));
        }
        Ok(())
    }

    /// `U^d_eff = U^d - 2 g^2 / omega0`.
    pub fn u_d_eff(&self) -> f64 {
        self.u_d - 2.0 * self.g * self.g / self.omega0
    }

    /// `U^f_eff = U^f - 2 g^2 / omega0`.
    pub fn u_f_eff(&self) -> f64 {
        self.u_f - 2.0 * self.g * self.g / self.omega0
    }

    /// The theorem-regime (particle-hole symmetric) f-level:
    /// `-U^f/2` for the bare PAM, `(U^d - U^f)/2 -+ 2 g^2 / omega0` for the
    /// d-coupled / f-coupled models.
    pub fn symmetric_epsilon_f(&self) -> f64 {
        match self.model {
            Model::Pam => -self.u_f / 2.0,
            Model::DCoupled => {
                0.5 * (self.u_d - self.u_f) - 2.0 * self.g * self.g / self.omega0
            }
            Model::FCoupled => {
                0.5 * (self.u_d - self.u_f) + 2.0 * self.g * self.g / self.omega0
            }
        }
    }

    /// Whether `epsilon_f` sits at the symmetric point (exact within 1e-12).
    pub fn at_symmetric_point(&self) -> bool {
        let s = self.symmetric_epsilon_f();
        (self.epsilon_f - s).abs() <= 1e-12 * s.abs().max(1.0)
    }

    /// Copy with `epsilon_f` replaced by the symmetric value.
    pub fn with_symmetric_epsilon_f(mut self) -> Self {
        self.epsilon_f = self.symmetric_epsilon_f();
        self
    }

    /// Spectral shift relating the deformed operator to the original:
    /// `spec(H) = spec(bold H) + shift`.
    pub fn deformation_shift(&self, n_sites: usize) -> f64 {
        let n = n_sites as f64;
        match self.model {
            Model::DCoupled => {
                2.0 * self.g * self.g / self.omega0 * n - self.u_d_eff() * n / 2.0
            }
            Model::FCoupled => -self.u_d * n,
            Model::Pam => 0.0,
        }
    }
}

fn check_hermitian(m: &CsrMatrix, what: &str) -> Result<()> {
    let r = m.hermiticity_residual();
    let tol = 1e-12 * m.max_abs().max(1.0);
    if r > tol {
        return Err(PamError::Hermiticity(format!(
            "{what}: residual {r:.3e} exceeds {tol:.3e}"
        )));
    }
    Ok(())
}

/// Diagonal operator from a function of the (up, down) hat masks.
fn diagonal_electron_op(basis: &SpinfulBasis, f: impl Fn(u32, u32) -> f64) -> CsrMatrix {
    let diag: Vec<C64> = (0..basis.dim())
        .map(|i| {
            let (iu, idn) = basis.split(i);
            C64::new(f(basis.up().state(iu), basis.down().state(idn)), 0.0)
        })
        .collect();
    CsrMatrix::from_diagonal(&diag)
}

fn bit(mask: u32, b: usize) -> f64 {
    ((mask >> b) & 1) as f64
}

/// Terms of the bare PAM on the spinful modes.
fn pam_terms(lattice: &Lattice, params: &ModelParams) -> Vec<Term> {
    let n = lattice.n_sites();
    let mut terms = Vec::new();
    for spin in [Spin::Up, Spin::Down] {
        for (x, y) in lattice.hopping_pairs() {
            let dx = crate::fock::spinful_mode(n, Species::D, x, spin);
            let dy = crate::fock::spinful_mode(n, Species::D, y, spin);
            terms.push(Term::new(
                C64::new(-lattice.t(x, y), 0.0),
                &[(dx, true), (dy, false)],
            ));
        }
        for x in 0..n {
            let f = crate::fock::spinful_mode(n, Species::F, x, spin);
            let d = crate::fock::spinful_mode(n, Species::D, x, spin);
            terms.push(Term::new(
                C64::new(params.epsilon_f, 0.0),
                &[(f, true), (f, false)],
            ));
            terms.push(Term::new(C64::new(params.v, 0.0), &[(f, true), (d, false)]));
            terms.push(Term::new(C64::new(params.v, 0.0), &[(d, true), (f, false)]));
        }
    }
    terms
}

/// Pair-occupation diagonal `sum_x n_{x,up} n_{x,down}` for one species.
fn pair_occupation(basis: &SpinfulBasis, species: Species) -> CsrMatrix {
    let n = basis.n_sites();
    diagonal_electron_op(basis, |up, dn| {
        (0..n)
            .map(|x| {
                let b = crate::fock::hat_mode(n, species, x);
                bit(up, b) * bit(dn, b)
            })
            .sum()
    })
}

/// Bare PAM on the electronic sector.
pub fn build_pam(lattice: &Lattice, params: &ModelParams, basis: &SpinfulBasis) -> Result<CsrMatrix> {
    params.validate()?;
    let quad = build_spinful_op(&pam_terms(lattice, params), basis, basis)?;
    let uf = pair_occupation(basis, Species::F).scaled(C64::new(params.u_f, 0.0));
    let h = quad.add_scaled(one(), &uf, one());
    check_hermitian(&h, "H_PAM")?;
    Ok(h)
}

/// Full model Hamiltonian in the half-filled `S^3 = 0` sector. For the
/// phonon-coupled models the result acts on `H_e (x) H_ph`.
pub fn build_model(
    lattice: &Lattice,
    params: &ModelParams,
    basis: &SpinfulBasis,
    phonons: Option<&PhononSpace>,
) -> Result<CsrMatrix> {
    params.validate()?;
    match params.model {
        Model::Pam => {
            if phonons.is_some() {
                return Err(PamError::InvalidParams(
                    "bare PAM takes no phonon space".into(),
                ));
            }
            build_pam(lattice, params, basis)
        }
        Model::DCoupled | Model::FCoupled => {
            let ph = phonons.ok_or_else(|| {
                PamError::InvalidParams("phonon-coupled model needs a phonon space".into())
            })?;
            if ph.n_sites() != lattice.n_sites() {
                return Err(PamError::InvalidParams(
                    "phonon modes must match lattice sites".into(),
                ));
            }
            let species = if params.model == Model::DCoupled {
                Species::D
            } else {
                Species::F
            };
            let n = lattice.n_sites();
            let e_part = build_pam(lattice, params, basis)?.add_scaled(
                one(),
                &pair_occupation(basis, Species::D).scaled(C64::new(params.u_d, 0.0)),
                one(),
            );
            let mut h = e_part.kron(&ph.identity());
            // g sum_x n_x (b*_x + b_x)
            for x in 0..n {
                let nx = diagonal_electron_op(basis, |up, dn| {
                    let b = crate::fock::hat_mode(n, species, x);
                    bit(up, b) + bit(dn, b)
                });
                let bx = ph.b(x);
                let coupling = bx.adjoint().add_scaled(one(), &bx, one());
                h = h.add_scaled(one(), &nx.kron(&coupling), C64::new(params.g, 0.0));
            }
            let np = CsrMatrix::identity(basis.dim()).kron(&ph.number_op());
            let h = h.add_scaled(one(), &np, C64::new(params.omega0, 0.0));
            check_hermitian(&h, "full model Hamiltonian")?;
            Ok(h)
        }
    }
}

/// The interaction projector pieces `(R_0, R_1)` on the electron sector:
/// `R_0` is the pair/hole f-occupation part (weight `U^f/2`, or `U^f_eff/2`
/// for the f-coupled model) and `R_1` the d pair part (weight `U^d_eff`,
/// or `U^d`). Both are positive multiples of projector sums whenever the
/// theorem-regime coupling signs hold.
pub fn interaction_projectors(
    params: &ModelParams,
    basis: &SpinfulBasis,
) -> Result<(CsrMatrix, CsrMatrix)> {
    params.validate()?;
    let (w_f, w_d) = match params.model {
        // The bare PAM deforms like the d-coupled model at g = 0.
        Model::Pam | Model::DCoupled => (params.u_f, params.u_d_eff()),
        Model::FCoupled => (params.u_f_eff(), params.u_d),
    };
    let n = basis.n_sites();
    let r0 = diagonal_electron_op(basis, |up, dn| {
        (0..n)
            .map(|x| {
                let b = crate::fock::hat_mode(n, Species::F, x);
                let pair = bit(up, b) * bit(dn, b);
                let hole = (1.0 - bit(up, b)) * (1.0 - bit(dn, b));
                0.5 * w_f * (pair + hole)
            })
            .sum()
    });
    let r1 = pair_occupation(basis, Species::D).scaled(C64::new(w_d, 0.0));
    Ok((r0, r1))
}

/// The deformed operator family `H = H_0 - R` with its bookkeeping.
#[derive(Clone, Debug)]
pub struct DeformedSet {
    /// `H = H_0 - R`.
    pub h: CsrMatrix,
    /// `H_0 = H_1 + omega0 N_p`.
    pub h0: CsrMatrix,
    /// The fiber-decomposable part `H_1`.
    pub h1: CsrMatrix,
    /// `R = R_0 + R_1` (electron diagonal, tensored with the identity).
    pub r: CsrMatrix,
    pub r0: CsrMatrix,
    pub r1: CsrMatrix,
    /// `spec(H) = spec(bold H) + shift`.
    pub shift: f64,
}

/// Hopping block `T_sigma(s Phi)` tensored onto the phonon space;
/// `phase_sign = 0` yields the phase-free `T_sigma`.
fn t_block(
    lattice: &Lattice,
    params: &ModelParams,
    basis: &SpinfulBasis,
    ph: &PhononSpace,
    spin: Spin,
    phase_sign: f64,
) -> Result<CsrMatrix> {
    let n = lattice.n_sites();
    let dim = basis.dim() * ph.dim();
    let mut acc = CsrMatrix::zeros(dim, dim);
    for (x, y) in lattice.hopping_pairs() {
        let dx = crate::fock::spinful_mode(n, Species::D, x, spin);
        let dy = crate::fock::spinful_mode(n, Species::D, y, spin);
        let e = build_spinful_op(
            &[Term::new(C64::new(-lattice.t(x, y), 0.0), &[(dx, true), (dy, false)])],
            basis,
            basis,
        )?;
        let phase = if phase_sign == 0.0 {
            ph.identity()
        } else {
            ph.phase_operator(x, phase_sign, params.g, params.omega0)?
                .matmul(&ph.phase_operator(y, -phase_sign, params.g, params.omega0)?)
        };
        acc = acc.add_scaled(one(), &e.kron(&phase), one());
    }
    Ok(acc)
}

/// Hybridization block `V_sigma(s Phi)` tensored onto the phonon space.
fn v_block(
    lattice: &Lattice,
    params: &ModelParams,
    basis: &SpinfulBasis,
    ph: &PhononSpace,
    spin: Spin,
    phase_sign: f64,
) -> Result<CsrMatrix> {
    let n = lattice.n_sites();
    let dim = basis.dim() * ph.dim();
    let mut acc = CsrMatrix::zeros(dim, dim);
    let v = C64::new(params.v, 0.0);
    for x in 0..n {
        let f = crate::fock::spinful_mode(n, Species::F, x, spin);
        let d = crate::fock::spinful_mode(n, Species::D, x, spin);
        let fd = build_spinful_op(&[Term::new(v, &[(f, true), (d, false)])], basis, basis)?;
        let df = build_spinful_op(&[Term::new(v, &[(d, true), (f, false)])], basis, basis)?;
        let (ph_minus, ph_plus) = if phase_sign == 0.0 {
            (ph.identity(), ph.identity())
        } else {
            (
                ph.phase_operator(x, -phase_sign, params.g, params.omega0)?,
                ph.phase_operator(x, phase_sign, params.g, params.omega0)?,
            )
        };
        // V_sigma(s Phi) = V (f* d e^{-i s Phi_x} + d* f e^{+i s Phi_x}).
        acc = acc.add_scaled(one(), &fd.kron(&ph_minus), one());
        acc = acc.add_scaled(one(), &df.kron(&ph_plus), one());
    }
    Ok(acc)
}

/// Assemble the deformed operators directly from their phase-dressed
/// blocks (never by numerically conjugating the original Hamiltonian;
/// conjugation is available separately as a cross-check). Requires
/// `epsilon_f` at the symmetric point.
pub fn build_deformed(
    lattice: &Lattice,
    params: &ModelParams,
    basis: &SpinfulBasis,
    ph: &PhononSpace,
) -> Result<DeformedSet> {
    params.validate()?;
    if params.model == Model::Pam {
        return Err(PamError::InvalidParams(
            "deformed blocks are defined for the phonon-coupled models".into(),
        ));
    }
    if !params.at_symmetric_point() {
        return Err(PamError::InvalidParams(format!(
            "deformation requires the symmetric epsilon_f = {:.12}, got {:.12}",
            params.symmetric_epsilon_f(),
            params.epsilon_f
        )));
    }
    if ph.n_sites() != lattice.n_sites() {
        return Err(PamError::InvalidParams(
            "phonon modes must match lattice sites".into(),
        ));
    }
    let n = lattice.n_sites();
    let (h1_e_weight, t_signs, v_signs) = match params.model {
        // T_up(Phi) + T_down(-Phi) + V_up(Phi) + V_down(-Phi) + U^d_eff/2 n^d
        Model::DCoupled => (params.u_d_eff() / 2.0, (1.0, -1.0), (1.0, -1.0)),
        // T_up + T_down + V_up(-Phi) + V_down(Phi) + U^d/2 n^d
        Model::FCoupled => (params.u_d / 2.0, (0.0, 0.0), (-1.0, 1.0)),
        Model::Pam => unreachable!(),
    };
    let mut h1 = t_block(lattice, params, basis, ph, Spin::Up, t_signs.0)?;
    h1 = h1.add_scaled(
        one(),
        &t_block(lattice, params, basis, ph, Spin::Down, t_signs.1)?,
        one(),
    );
    h1 = h1.add_scaled(
        one(),
        &v_block(lattice, params, basis, ph, Spin::Up, v_signs.0)?,
        one(),
    );
    h1 = h1.add_scaled(
        one(),
        &v_block(lattice, params, basis, ph, Spin::Down, v_signs.1)?,
        one(),
    );
    let nd = diagonal_electron_op(basis, |up, dn| {
        (0..n)
            .map(|x| {
                let b = crate::fock::hat_mode(n, Species::D, x);
                bit(up, b) + bit(dn, b)
            })
            .sum()
    });
    h1 = h1.add_scaled(one(), &nd.kron(&ph.identity()), C64::new(h1_e_weight, 0.0));
    check_hermitian(&h1, "H_1")?;

    let np = CsrMatrix::identity(basis.dim()).kron(&ph.number_op());
    let h0 = h1.add_scaled(one(), &np, C64::new(params.omega0, 0.0));
    check_hermitian(&h0, "H_0")?;

    let (r0_e, r1_e) = interaction_projectors(params, basis)?;
    let r0 = r0_e.kron(&ph.identity());
    let r1 = r1_e.kron(&ph.identity());
    let r = r0.add_scaled(one(), &r1, one());
    let h = h0.add_scaled(one(), &r, -one());
    check_hermitian(&h, "H")?;

    Ok(DeformedSet {
        h,
        h0,
        h1,
        r,
        r0,
        r1,
        shift: params.deformation_shift(n),
    })
}

/// Reference Hubbard Hamiltonian on the electron sector:
/// `H_H = sum t_{xy} d*_x d_y + sum (f* d + d* f) + sum (n^d pair + n^f
/// pair)` (note the `+t` sign; it is the Hubbard model on the doubled
/// lattice `Lambda sq-cup Lambda`).
pub fn build_reference_hubbard(lattice: &Lattice, basis: &SpinfulBasis) -> Result<CsrMatrix> {
    let n = lattice.n_sites();
    let mut terms = Vec::new();
    for spin in [Spin::Up, Spin::Down] {
        for (x, y) in lattice.hopping_pairs() {
            let dx = crate::fock::spinful_mode(n, Species::D, x, spin);
            let dy = crate::fock::spinful_mode(n, Species::D, y, spin);
            terms.push(Term::new(
                C64::new(lattice.t(x, y), 0.0),
                &[(dx, true), (dy, false)],
            ));
        }
        for x in 0..n {
            let f = crate::fock::spinful_mode(n, Species::F, x, spin);
            let d = crate::fock::spinful_mode(n, Species::D, x, spin);
            terms.push(Term::new(one(), &[(f, true), (d, false)]));
            terms.push(Term::new(one(), &[(d, true), (f, false)]));
        }
    }
    let quad = build_spinful_op(&terms, basis, basis)?;
    let u = pair_occupation(basis, Species::D).add_scaled(
        one(),
        &pair_occupation(basis, Species::F),
        one(),
    );
    let h = quad.add_scaled(one(), &u, one());
    check_hermitian(&h, "H_H")?;
    Ok(h)
}

/// `H'_H = H_H (x) 1 + omega0 N_p`, the phonon-augmented reference model.
pub fn reference_hubbard_with_phonons(
    lattice: &Lattice,
    basis: &SpinfulBasis,
    ph: &PhononSpace,
    omega0: f64,
) -> Result<CsrMatrix> {
    let hh = build_reference_hubbard(lattice, basis)?;
    let np = CsrMatrix::identity(basis.dim()).kron(&ph.number_op());
    Ok(hh
        .kron(&ph.identity())
        .add_scaled(one(), &np, C64::new(omega0, 0.0)))
}

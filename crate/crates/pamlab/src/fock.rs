//! Fermionic Fock-space bookkeeping: Jordan–Wigner mode ordering, fixed
//! particle-number sector bases, electron configurations and the
//! vector-to-matrix identification of the `S^3_tot = 0` sector.
//!
//! Mode order. For `n` sites there are `2n` spatial modes per spin:
//! conduction (`d`) modes `0..n` in site order followed by localized (`f`)
//! modes `n..2n`. Spinful modes place every spin-up mode before every
//! spin-down mode:
//!
//! ```text
//! 0 .. n    : d_{x,up}     n .. 2n   : f_{x,up}
//! 2n .. 3n  : d_{x,down}   3n .. 4n  : f_{x,down}
//! ```
//!
//! With this order the half-filled `S^3_tot = 0` space factorizes as
//! `E (x) E` where `E` is the single-species space spanned by the `binom(2n,
//! n)` occupation states, and the spin-down annihilation operators carry the
//! parity factor `(-1)^{N_up}` automatically through the Jordan–Wigner
//! string. Basis vectors of a sector are the occupation bitmasks in
//! ascending numeric order; a configuration state
//! `|X> = prod_{x in X_d} d*_x prod_{x in X_f} f*_x |vac>` (both products in
//! ascending site order) coincides with the bitmask state exactly, i.e.
//! carries sign `+1`.

use ndarray::Array2;

use crate::linalg::{C64, CsrMatrix};
use crate::{PamError, Result};

/// Default cap on the number of sites (basis sizes grow as `binom(2n, n)^2`).
pub const MAX_SITES_DEFAULT: usize = 6;

/// Electron species.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Species {
    /// Conduction band.
    D,
    /// Localized orbital.
    F,
}

/// Spin projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Spin {
    Up,
    Down,
}

/// Single-species ("hatted") mode index: `d_x -> x`, `f_x -> n + x`.
pub fn hat_mode(n_sites: usize, species: Species, site: usize) -> usize {
    debug_assert!(site < n_sites);
    match species {
        Species::D => site,
        Species::F => n_sites + site,
    }
}

/// Spinful mode index; spin-up modes precede all spin-down modes.
pub fn spinful_mode(n_sites: usize, species: Species, site: usize, spin: Spin) -> usize {
    let base = match spin {
        Spin::Up => 0,
        Spin::Down => 2 * n_sites,
    };
    base + hat_mode(n_sites, species, site)
}

/// Apply `c_mode` (annihilate) or `c*_mode` (create) to an occupation
/// bitmask, returning the new mask and the Jordan–Wigner sign
/// `(-1)^{#occupied modes below}`; `None` if the operator kills the state.
pub fn apply_mode_op(state: u64, mode: usize, create: bool) -> Option<(u64, i32)> {
    let bit = 1u64 << mode;
    if create == (state & bit != 0) {
        return None;
    }
    let below = (state & (bit - 1)).count_ones();
    let sign = if below % 2 == 0 { 1 } else { -1 };
    Some((state ^ bit, sign))
}

/// Basis of a fixed particle-number sector of the single-species space
/// over `2 n_sites` modes, in ascending bitmask order.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    n_sites: usize,
    n_modes: usize,
    n_particles: usize,
    states: Vec<u32>,
}

impl SectorBasis {
    /// Sector with `n_particles` fermions; enforces the default site cap.
    pub fn new(n_sites: usize, n_particles: usize) -> Result<Self> {
        Self::with_site_cap(n_sites, n_particles, MAX_SITES_DEFAULT)
    }

    /// Same as [`SectorBasis::new`] with an explicit site cap override.
    pub fn with_site_cap(n_sites: usize, n_particles: usize, cap: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(PamError::Basis("zero sites".into()));
        }
        if n_sites > cap {
            return Err(PamError::Basis(format!(
                "{n_sites} sites exceeds the cap of {cap}; dimensions grow as binom(2n,n)^2"
            )));
        }
        let n_modes = 2 * n_sites;
        if n_particles > n_modes {
            return Err(PamError::Basis(format!(
                "{n_particles} particles in {n_modes} modes"
            )));
        }
        let states: Vec<u32> = (0u32..1 << n_modes)
            .filter(|m| m.count_ones() as usize == n_particles)
            .collect();
        Ok(Self {
            n_sites,
            n_modes,
            n_particles,
            states,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> u32 {
        self.states[i]
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    /// Index of a bitmask (bitmasks are sorted ascending).
    pub fn index_of(&self, mask: u32) -> Option<usize> {
        self.states.binary_search(&mask).ok()
    }
}

/// Product basis `up-sector (x) down-sector` over the spinful modes.
#[derive(Clone, Debug)]
pub struct SpinfulBasis {
    n_sites: usize,
    up: SectorBasis,
    down: SectorBasis,
}

impl SpinfulBasis {
    pub fn new(n_sites: usize, n_up: usize, n_down: usize) -> Result<Self> {
        Ok(Self {
            n_sites,
            up: SectorBasis::new(n_sites, n_up)?,
            down: SectorBasis::new(n_sites, n_down)?,
        })
    }

    /// The half-filled `S^3_tot = 0` sector: `n` up and `n` down electrons.
    pub fn half_filled(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, n_sites, n_sites)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_up(&self) -> usize {
        self.up.n_particles()
    }

    pub fn n_down(&self) -> usize {
        self.down.n_particles()
    }

    pub fn up(&self) -> &SectorBasis {
        &self.up
    }

    pub fn down(&self) -> &SectorBasis {
        &self.down
    }

    pub fn dim(&self) -> usize {
        self.up.len() * self.down.len()
    }

    /// Combined index of `(up state, down state)`.
    pub fn index(&self, iu: usize, idn: usize) -> usize {
        iu * self.down.len() + idn
    }

    /// Inverse of [`SpinfulBasis::index`].
    pub fn split(&self, i: usize) -> (usize, usize) {
        (i / self.down.len(), i % self.down.len())
    }

    /// Full 4n-bit occupation mask of basis vector `i`.
    pub fn full_mask(&self, i: usize) -> u64 {
        let (iu, idn) = self.split(i);
        (self.up.state(iu) as u64) | ((self.down.state(idn) as u64) << (2 * self.n_sites))
    }

    /// Combined index of a 4n-bit mask, if it lies in this sector.
    pub fn index_of_mask(&self, mask: u64) -> Option<usize> {
        let low = (mask & ((1u64 << (2 * self.n_sites)) - 1)) as u32;
        let high = (mask >> (2 * self.n_sites)) as u32;
        let iu = self.up.index_of(low)?;
        let idn = self.down.index_of(high)?;
        Some(self.index(iu, idn))
    }
}

/// Single fermionic creation/annihilation factor.
#[derive(Clone, Copy, Debug)]
pub struct FermiOp {
    pub mode: usize,
    pub create: bool,
}

/// One normal term `coeff * op_1 op_2 ... op_k`; the rightmost factor acts
/// first, as in operator notation.
#[derive(Clone, Debug)]
pub struct Term {
    pub coeff: C64,
    pub ops: Vec<FermiOp>,
}

impl Term {
    pub fn new(coeff: C64, ops: &[(usize, bool)]) -> Self {
        Self {
            coeff,
            ops: ops
                .iter()
                .map(|&(mode, create)| FermiOp { mode, create })
                .collect(),
        }
    }
}

fn apply_term(term: &Term, mut mask: u64) -> Option<(u64, C64)> {
    let mut coeff = term.coeff;
    for op in term.ops.iter().rev() {
        let (next, sign) = apply_mode_op(mask, op.mode, op.create)?;
        mask = next;
        coeff *= sign as f64;
    }
    Some((mask, coeff))
}

/// Assemble a sparse matrix of a sum of fermionic terms between two spinful
/// sector bases. Every term must map `b_in` into `b_out` exactly (an image
/// outside the target sector is an assembly bug and is reported as an
/// error rather than silently dropped).
pub fn build_spinful_op(
    terms: &[Term],
    b_in: &SpinfulBasis,
    b_out: &SpinfulBasis,
) -> Result<CsrMatrix> {
    let mut triplets = Vec::new();
    for j in 0..b_in.dim() {
        let mask = b_in.full_mask(j);
        for term in terms {
            if let Some((out_mask, coeff)) = apply_term(term, mask) {
                let i = b_out.index_of_mask(out_mask).ok_or_else(|| {
                    PamError::Operator(format!(
                        "term image {out_mask:#x} not in target sector ({}, {})",
                        b_out.n_up(),
                        b_out.n_down()
                    ))
                })?;
                triplets.push((i, j, coeff));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(b_out.dim(), b_in.dim(), triplets))
}

/// Same as [`build_spinful_op`] for single-species ("hatted") operators on
/// sector bases of the `2n`-mode space.
pub fn build_hat_op(terms: &[Term], b_in: &SectorBasis, b_out: &SectorBasis) -> Result<CsrMatrix> {
    let mut triplets = Vec::new();
    for j in 0..b_in.len() {
        let mask = b_in.state(j) as u64;
        for term in terms {
            if let Some((out_mask, coeff)) = apply_term(term, mask) {
                let i = b_out.index_of(out_mask as u32).ok_or_else(|| {
                    PamError::Operator(format!(
                        "term image {out_mask:#x} not in target sector ({} particles)",
                        b_out.n_particles()
                    ))
                })?;
                triplets.push((i, j, coeff));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(b_out.len(), b_in.len(), triplets))
}

/// Electron configuration `(X_d, X_f)` as site bitmasks.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct ElectronConfiguration {
    pub xd: u32,
    pub xf: u32,
}

impl std::fmt::Debug for ElectronConfiguration {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sites = |m: u32| -> Vec<usize> { (0..32).filter(|&b| m >> b & 1 == 1).collect() };
        write!(fmt, "(d{:?}, f{:?})", sites(self.xd), sites(self.xf))
    }
}

impl ElectronConfiguration {
    pub fn new(xd: u32, xf: u32) -> Self {
        Self { xd, xf }
    }

    /// Total electron count `|X_d| + |X_f|`.
    pub fn n_total(&self) -> usize {
        (self.xd.count_ones() + self.xf.count_ones()) as usize
    }

    /// Symmetric difference `X_d (sym diff) X_f` as a bitmask.
    pub fn sym_diff(&self) -> u32 {
        self.xd ^ self.xf
    }

    /// `|X_d (sym diff) X_f|`, the grading used by the small-beta expansion.
    pub fn sym_diff_size(&self) -> usize {
        self.sym_diff().count_ones() as usize
    }

    /// Occupation bitmask in the hatted mode order.
    pub fn hat_mask(&self, n_sites: usize) -> u32 {
        self.xd | (self.xf << n_sites)
    }

    /// Whether `X_d` is contained in `X_f` (an "f-dominated" configuration).
    pub fn is_f_dominated(&self) -> bool {
        self.xd & !self.xf == 0
    }

    /// The simplification map `S X = (X_d intersect X_f, X_d union X_f)`.
    pub fn simplified(&self) -> Self {
        Self {
            xd: self.xd & self.xf,
            xf: self.xd | self.xf,
        }
    }

    /// The fully localized configuration `F = (empty, Lambda)`.
    pub fn full_f(n_sites: usize) -> Self {
        Self {
            xd: 0,
            xf: (1u32 << n_sites) - 1,
        }
    }
}

/// Index of the configuration basis vector `|X>` in a sector basis; the
/// ordering convention makes the coefficient exactly `+1`.
pub fn config_vector(cfg: &ElectronConfiguration, basis: &SectorBasis) -> Result<usize> {
    if cfg.n_total() != basis.n_particles() {
        return Err(PamError::Basis(format!(
            "configuration {cfg:?} has {} electrons, sector holds {}",
            cfg.n_total(),
            basis.n_particles()
        )));
    }
    basis
        .index_of(cfg.hat_mask(basis.n_sites()))
        .ok_or_else(|| PamError::Basis(format!("configuration {cfg:?} not in sector")))
}

/// View a vector on the spinful product basis as the matrix
/// `M[i][j] = <i (x) j | psi>` (up index i, down index j).
pub fn matricize(v: &[C64], basis: &SpinfulBasis) -> Array2<C64> {
    assert_eq!(v.len(), basis.dim());
    let (du, dd) = (basis.up().len(), basis.down().len());
    Array2::from_shape_fn((du, dd), |(i, j)| v[basis.index(i, j)])
}

/// Inverse of [`matricize`].
pub fn vectorize(m: &Array2<C64>, basis: &SpinfulBasis) -> Vec<C64> {
    let (du, dd) = (basis.up().len(), basis.down().len());
    assert_eq!(m.dim(), (du, dd));
    let mut v = vec![C64::new(0.0, 0.0); basis.dim()];
    for i in 0..du {
        for j in 0..dd {
            v[basis.index(i, j)] = m[(i, j)];
        }
    }
    v
}

//! End-to-end certification suite. Each criterion exercises the pipeline
//! at desk scale and reports a single pass/fail outcome with a detail
//! string; `run_all` executes all eleven in order. The integration test
//! target prints one line per criterion, and the CLI `verify` subcommand
//! reuses the same runners.

use std::time::Instant;

use ndarray::Array2;
use serde::Serialize;

use crate::fock::{hat_mode, ElectronConfiguration, SectorBasis, Species, SpinfulBasis};
use crate::graph::{
    classify_edge, connect, enumerate_configs, simplify_path, validate_path, ConfigPath, EdgeClass,
};
use crate::ham::{build_deformed, build_model, Model, ModelParams};
use crate::lattice::{build_lattice, Lattice, LatticeKind};
use crate::linalg::{CsrMatrix, HermitianEig, C64};
use crate::ops::{b_hat_op, s2_total, BHatKind};
use crate::phonon::{PhononSpace, PositionFrame};
use crate::positivity::{
    align_to_cone, asymptotic_check, cone_membership, ergodicity_witness, negative_control,
    path_product_check, sample_cone_element, semigroup_positivity_check,
};
use crate::spectral::{correlator_table, ground_state, lowest_eigenvalues, total_spin_of, SolverOpts};
use crate::transform::{composite_u, lang_firsov, occupancy_guard, verify_conjugation};
use crate::{PamError, Result};

/// Result of a single acceptance criterion.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn base_params(model: Model, g: f64) -> ModelParams {
    ModelParams {
        epsilon_f: 0.0,
        u_f: 2.0,
        u_d: 1.0,
        v: 1.0,
        g,
        omega0: 1.0,
        model,
    }
    .with_symmetric_epsilon_f()
}

fn chain(n: usize) -> Result<Lattice> {
    build_lattice(&LatticeKind::Chain { n }, 1.0)
}

struct GroundRun {
    gap: f64,
    s2: f64,
    psi: Vec<C64>,
    ph_dim: usize,
}

/// Ground state of the coupled model at half filling, `S^3 = 0`, on the
/// two-site chain with the standard couplings.
fn coupled_ground_run(model: Model, g: f64, n: usize, n_max: usize) -> Result<GroundRun> {
    let lat = chain(n)?;
    let basis = SpinfulBasis::half_filled(n)?;
    let ph = PhononSpace::new(n, n_max)?;
    let params = base_params(model, g);
    let h = build_model(&lat, &params, &basis, Some(&ph))?;
    // Lanczos above dimension 1000 keeps the repeated g/n_max sweeps
    // inside the per-criterion time budget; the dense path still covers
    // the smaller cutoffs, so both solvers are exercised.
    let opts = SolverOpts {
        dense_cutoff: 1000,
        ..SolverOpts::default()
    };
    let gs = ground_state(&h, &opts)?;
    let s2 = s2_total(&basis)?.kron(&CsrMatrix::identity(ph.dim()));
    let spin = total_spin_of(&gs.psi, &s2)?;
    Ok(GroundRun {
        gap: gs.gap,
        s2: spin.expectation,
        psi: gs.psi,
        ph_dim: ph.dim(),
    })
}

fn uniqueness_criterion(model: Model) -> Result<(bool, String)> {
    let mut pass = true;
    let mut detail = Vec::new();
    for g in [0.0, 0.3, 0.5] {
        let r4 = coupled_ground_run(model, g, 2, 4)?;
        let r6 = coupled_ground_run(model, g, 2, 6)?;
        let stable = (r6.gap - r4.gap).abs() <= 0.2 * r4.gap;
        let ok = r4.gap > 1e-6 && r4.s2 < 1e-8 && r6.s2 < 1e-8 && stable;
        pass &= ok;
        detail.push(format!(
            "g={g}: gap(nmax4)={:.6e} gap(nmax6)={:.6e} <S2>={:.2e}{}",
            r4.gap,
            r6.gap,
            r4.s2.max(r6.s2),
            if ok { "" } else { " VIOLATION" }
        ));
    }
    Ok((pass, detail.join("; ")))
}

fn criterion_1() -> Result<(bool, String)> {
    uniqueness_criterion(Model::DCoupled)
}

fn criterion_2() -> Result<(bool, String)> {
    uniqueness_criterion(Model::FCoupled)
}

fn criterion_3() -> Result<(bool, String)> {
    let lat = chain(2)?;
    let basis = SpinfulBasis::half_filled(2)?;
    let mut pass = true;
    let mut detail = Vec::new();
    for model in [Model::DCoupled, Model::FCoupled] {
        for g in [0.0, 0.3, 0.5] {
            let run = coupled_ground_run(model, g, 2, 4)?;
            let table = correlator_table(&run.psi, &lat, &basis, run.ph_dim, 1e-10)?;
            let worst = table
                .rows
                .iter()
                .map(|r| r.value)
                .fold(f64::INFINITY, f64::min);
            let ok = table.all_positive();
            pass &= ok;
            detail.push(format!(
                "{model:?} g={g}: {} entries, min={:.3e}{}",
                table.rows.len(),
                worst,
                if ok { "" } else { " VIOLATION" }
            ));
        }
    }
    Ok((pass, detail.join("; ")))
}

fn criterion_4() -> Result<(bool, String)> {
    let n = 2;
    let n_max = 4;
    let lat = chain(n)?;
    let basis = SpinfulBasis::half_filled(n)?;
    let ph = PhononSpace::new(n, n_max)?;
    let params = base_params(Model::DCoupled, 0.0);
    // Electronic part of the model at g = 0.
    let mut e_params = params;
    e_params.model = Model::Pam;
    let h_e = build_model(&lat, &e_params, &basis, None)?.add_scaled(
        one(),
        &d_pair_occupation(&basis).scaled(C64::new(params.u_d, 0.0)),
        one(),
    );
    let e_levels = lowest_eigenvalues(&h_e, basis.dim())?;
    let mut combined: Vec<f64> = Vec::new();
    for &e in &e_levels {
        for k in 0..ph.dim() {
            combined.push(e + params.omega0 * ph.total_occupation(k) as f64);
        }
    }
    combined.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let set = build_deformed(&lat, &params, &basis, &ph)?;
    let deformed = lowest_eigenvalues(&set.h, 10)?;
    let mut max_diff = 0.0f64;
    for i in 0..10 {
        max_diff = max_diff.max((deformed[i] - set.shift - combined[i]).abs());
    }
    let reduction_ok = max_diff < 1e-10;
    // Symmetric bare lattice model (no d-interaction, epsilon_f = -U^f/2):
    // unique S = 0 ground state with positive staggered correlators.
    let mut pam = base_params(Model::Pam, 0.0);
    pam.u_d = 0.0;
    pam.epsilon_f = -pam.u_f / 2.0;
    let h_pam = build_model(&lat, &pam, &basis, None)?;
    let gs = ground_state(&h_pam, &SolverOpts::default())?;
    let spin = total_spin_of(&gs.psi, &s2_total(&basis)?)?;
    let table = correlator_table(&gs.psi, &lat, &basis, 1, 1e-10)?;
    let pam_ok = gs.is_unique() && spin.expectation < 1e-8 && table.all_positive();
    Ok((
        reduction_ok && pam_ok,
        format!(
            "level diff={max_diff:.3e}; symmetric lattice model: gap={:.3e} <S2>={:.2e} correlators {}",
            gs.gap,
            spin.expectation,
            if table.all_positive() { "positive" } else { "VIOLATION" }
        ),
    ))
}

fn d_pair_occupation(basis: &SpinfulBasis) -> CsrMatrix {
    let n = basis.n_sites();
    let diag: Vec<C64> = (0..basis.dim())
        .map(|i| {
            let (iu, idn) = basis.split(i);
            let up = basis.up().state(iu);
            let dn = basis.down().state(idn);
            let mut acc = 0.0;
            for x in 0..n {
                let b = hat_mode(n, Species::D, x);
                acc += (((up >> b) & 1) * ((dn >> b) & 1)) as f64;
            }
            C64::new(acc, 0.0)
        })
        .collect();
    CsrMatrix::from_diagonal(&diag)
}

fn criterion_5() -> Result<(bool, String)> {
    let n = 1;
    let lat = chain(n)?;
    let basis = SpinfulBasis::half_filled(n)?;
    // Boson-displacement identity: conjugating the coupling + phonon
    // energy by the polaron unitary leaves omega0 N_p - (g^2/omega0)
    // sum_x n_x^2.
    let n_max = 8;
    let ph = PhononSpace::new(n, n_max)?;
    let params = base_params(Model::DCoupled, 0.2);
    let lf = lang_firsov(&basis, &ph, &params)?;
    let nd = |basis: &SpinfulBasis, x: usize| -> CsrMatrix {
        let b = hat_mode(n, Species::D, x);
        let diag: Vec<C64> = (0..basis.dim())
            .map(|i| {
                let (iu, idn) = basis.split(i);
                let occ = ((basis.up().state(iu) >> b) & 1) + ((basis.down().state(idn) >> b) & 1);
                C64::new(occ as f64, 0.0)
            })
            .collect();
        CsrMatrix::from_diagonal(&diag)
    };
    let mut a = CsrMatrix::identity(basis.dim())
        .kron(&ph.number_op())
        .scaled(C64::new(params.omega0, 0.0));
    let mut b_target = a.clone();
    for x in 0..n {
        let nx = nd(&basis, x);
        let bx = ph.b(x);
        let coupling = bx.adjoint().add_scaled(one(), &bx, one());
        a = a.add_scaled(one(), &nx.kron(&coupling), C64::new(params.g, 0.0));
        let nx2 = nx.matmul(&nx);
        b_target = b_target.add_scaled(
            one(),
            &nx2.kron(&ph.identity()),
            C64::new(-params.g * params.g / params.omega0, 0.0),
        );
    }
    // Guard depth: the [q, p] truncation defect at the cutoff has norm
    // n_max + 1 and leaks inward one occupancy level per commutator order,
    // so a deep guard (occupancy <= 2 out of n_max = 8) is needed for the
    // residual to reflect the identity rather than the boundary.
    let guard = occupancy_guard(basis.dim(), &ph, 2);
    let polaron_residual = verify_conjugation(&lf, &a, &b_target, &guard)?;
    // Full deformation identity: the deformed operator satisfies
    // H_def = U* H U + shift, so U (H_def - shift) U* recovers the
    // directly assembled H on low phonon occupancies.
    let h = build_model(&lat, &params, &basis, Some(&ph))?;
    let set = build_deformed(&lat, &params, &basis, &ph)?;
    let u = composite_u(&basis, &ph, &lat, &params)?;
    let dim = basis.dim() * ph.dim();
    let def_shifted =
        set.h
            .add_scaled(one(), &CsrMatrix::identity(dim), C64::new(-set.shift, 0.0));
    let composite_residual = verify_conjugation(&u, &def_shifted, &h, &guard)?;
    // Spectral equivalence at moderate coupling, improving with the cutoff.
    // The level error is truncation-dominated and scales steeply in g
    // (measured: 5.6e-4 / 5.0e-7 / 2.0e-10 at n_max 4/6/8 for g = 0.2,
    // vs 9.9e-6 / 5.4e-10 / 1.2e-14 for g = 0.1), so g = 0.1 is the
    // largest round coupling where n_max = 6 resolves 1e-8.
    let params_s = base_params(Model::DCoupled, 0.1);
    let mut diffs = Vec::new();
    for nm in [4usize, 6] {
        let ph_s = PhononSpace::new(n, nm)?;
        let h_s = build_model(&lat, &params_s, &basis, Some(&ph_s))?;
        let set_s = build_deformed(&lat, &params_s, &basis, &ph_s)?;
        let direct = lowest_eigenvalues(&h_s, 5)?;
        let deformed = lowest_eigenvalues(&set_s.h, 5)?;
        let d = direct
            .iter()
            .zip(&deformed)
            .map(|(a, b)| (a - (b - set_s.shift)).abs())
            .fold(0.0f64, f64::max);
        diffs.push(d);
    }
    let pass = polaron_residual < 1e-5
        && composite_residual < 1e-5
        && diffs[1] < 1e-8
        && diffs[1] <= diffs[0];
    Ok((
        pass,
        format!(
            "polaron residual={polaron_residual:.3e}; composite residual={composite_residual:.3e}; \
             spectral diff nmax4={:.3e} nmax6={:.3e}",
            diffs[0], diffs[1]
        ),
    ))
}

fn criterion_6() -> Result<(bool, String)> {
    let mut pass = true;
    let mut detail = Vec::new();
    // Enumeration counts.
    for n in 1..=4usize {
        let count = enumerate_configs(n).len();
        let expect = binomial(2 * n, n);
        pass &= count == expect;
        detail.push(format!("n={n}: |C|={count}"));
    }
    // Exhaustive connectivity and witness equivalence.
    for n in 1..=3usize {
        let lat = chain(n)?;
        let configs = enumerate_configs(n);
        let basis = SectorBasis::new(n, n)?;
        let mut connected = 0usize;
        for a in &configs {
            // Simplification path has exactly m + 1 configurations.
            let sp = simplify_path(a, n)?;
            let m = (a.xd & !a.xf).count_ones() as usize;
            pass &= sp.len() == m + 1 && validate_path(&sp, &lat)?.valid;
            for b in &configs {
                let p = connect(a, b, &lat)?;
                let v = validate_path(&p, &lat)?;
                pass &= v.valid && p.first() == a && p.last() == b;
                connected += v.valid as usize;
                // Edge classification agrees with a brute-force operator
                // witness search.
                let is_edge = classify_edge(a, b, &lat)? != EdgeClass::None;
                let witnessed = a != b && brute_force_witness(a, b, &lat, &basis)?;
                pass &= is_edge == witnessed;
            }
        }
        detail.push(format!("n={n}: {connected}/{} pairs connected", configs.len().pow(2)));
    }
    Ok((pass, detail.join("; ")))
}

fn binomial(n: usize, k: usize) -> usize {
    (1..=k).fold(1usize, |acc, i| acc * (n - k + i) / i)
}

fn brute_force_witness(
    a: &ElectronConfiguration,
    b: &ElectronConfiguration,
    lat: &Lattice,
    basis: &SectorBasis,
) -> Result<bool> {
    let ia = crate::fock::config_vector(a, basis)?;
    let ib = crate::fock::config_vector(b, basis)?;
    for x in 0..lat.n_sites() {
        for y in 0..lat.n_sites() {
            for kind in [BHatKind::Minus, BHatKind::Plus] {
                let op = b_hat_op(kind, x, y, lat, 1.0, basis)?;
                let col: Vec<usize> = (0..basis.len())
                    .filter(|&r| op.row(r).any(|(c, v)| c == ia && v.norm() > 0.0))
                    .collect();
                if col.len() == 1 && col[0] == ib {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

fn deformed_n1(g: f64, n_max: usize) -> Result<(crate::ham::DeformedSet, SpinfulBasis, PhononSpace, PositionFrame)> {
    let lat = chain(1)?;
    let basis = SpinfulBasis::half_filled(1)?;
    let ph = PhononSpace::new(1, n_max)?;
    let frame = PositionFrame::new(&ph)?;
    let set = build_deformed(&lat, &base_params(Model::DCoupled, g), &basis, &ph)?;
    Ok((set, basis, ph, frame))
}

fn vacuum_frame_coords(ph: &PhononSpace, frame: &PositionFrame) -> Vec<f64> {
    let vac = ph.vacuum();
    let row = Array2::from_shape_fn((1, ph.dim()), |(_, k)| vac[k]);
    let framed = frame.to_frame_columns(&row);
    (0..ph.dim()).map(|k| framed[(0, k)].re.max(0.0)).collect()
}

fn criterion_7() -> Result<(bool, String)> {
    let (set, basis, ph, _) = deformed_n1(0.3, 4)?;
    let h0 = HermitianEig::new(&set.h0.to_dense(), 1e-10)?;
    let cfg = ElectronConfiguration::new(0b1, 0);
    let rep = asymptotic_check(&cfg, &[0.2, 0.1, 0.05, 0.025], &h0, &basis, &ph, 1.0)?;
    Ok((
        rep.pass,
        format!("exponent={}, residuals={:?}", rep.exponent, rep.residuals),
    ))
}

fn criterion_8() -> Result<(bool, String)> {
    let (set, basis, ph, frame) = deformed_n1(0.3, 4)?;
    let lat = chain(1)?;
    let h0 = HermitianEig::new(&set.h0.to_dense(), 1e-10)?;
    let path = ConfigPath {
        configs: vec![
            ElectronConfiguration::full_f(1),
            ElectronConfiguration::new(0b1, 0),
        ],
    };
    if !validate_path(&path, &lat)?.valid {
        return Err(PamError::Operator("length-2 reference path invalid".into()));
    }
    let coords = vacuum_frame_coords(&ph, &frame);
    let rep = path_product_check(
        &path,
        &[0.2, 0.1, 0.05, 0.025],
        &h0,
        &basis,
        &ph,
        &frame,
        &coords,
        1e-6,
    )?;
    Ok((
        rep.pass,
        format!(
            "c={:?}, off-residuals={:?}",
            rep.c_values, rep.off_residuals
        ),
    ))
}

fn criterion_9() -> Result<(bool, String)> {
    let (set, basis, ph, frame) = deformed_n1(0.3, 4)?;
    let heig = HermitianEig::new(&set.h.to_dense(), 1e-10)?;
    let mut pass = true;
    let mut detail = Vec::new();
    for beta in [0.1, 0.5, 1.0] {
        let rep = semigroup_positivity_check(&heig, beta, 100, 42, &basis, &frame, 1e-8)?;
        pass &= rep.failures == 0;
        detail.push(format!(
            "beta={beta}: {} failures, worst={:.3e}",
            rep.failures, rep.worst_eigenvalue
        ));
    }
    let gs = ground_state(&set.h, &SolverOpts::default())?;
    let mut psi = gs.psi.clone();
    align_to_cone(&mut psi, &basis, &frame);
    let member = cone_membership(&psi, &basis, &frame, 1e-8)?;
    pass &= member.member;
    let mut min_overlap = f64::INFINITY;
    for s in 0..100u64 {
        let v = sample_cone_element(42u64.wrapping_add(s), 1 + (s % 3) as usize, &basis, &frame)?;
        let ov = crate::linalg::zdot(&v, &psi).re;
        min_overlap = min_overlap.min(ov);
    }
    pass &= min_overlap > 0.0;
    detail.push(format!(
        "ground state member={}, min overlap={:.3e}",
        member.member, min_overlap
    ));
    let bad = negative_control(&set.h, &basis, ph.dim(), 0.6);
    let beig = HermitianEig::new(&bad.to_dense(), 1e-10)?;
    let rep = semigroup_positivity_check(&beig, 1.0, 100, 42, &basis, &frame, 1e-8)?;
    pass &= rep.failures > 0;
    detail.push(format!("negative control failures={}", rep.failures));
    Ok((pass, detail.join("; ")))
}

fn criterion_10() -> Result<(bool, String)> {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [1usize, 2] {
        let lat = chain(n)?;
        let basis = SpinfulBasis::half_filled(n)?;
        let ph = PhononSpace::new(n, 4)?;
        let frame = PositionFrame::new(&ph)?;
        let set = build_deformed(&lat, &base_params(Model::DCoupled, 0.3), &basis, &ph)?;
        let heig = HermitianEig::new(&set.h.to_dense(), 1e-10)?;
        let coords = vacuum_frame_coords(&ph, &frame);
        for beta in [0.01, 0.05] {
            let w = ergodicity_witness(&heig, &basis, &frame, &coords, &coords, beta)?;
            pass &= w > 0.0;
            detail.push(format!("n={n} beta={beta}: {w:.6e}"));
        }
    }
    Ok((pass, detail.join("; ")))
}

fn criterion_11() -> Result<(bool, String)> {
    let mut pass = true;
    let mut detail = Vec::new();
    let mut instances: Vec<(String, CsrMatrix)> = Vec::new();
    {
        let lat = chain(2)?;
        let basis = SpinfulBasis::half_filled(2)?;
        let mut pam = base_params(Model::Pam, 0.0);
        pam.u_d = 0.0;
        pam.epsilon_f = -pam.u_f / 2.0;
        instances.push(("lattice model n=2".into(), build_model(&lat, &pam, &basis, None)?));
        let ph = PhononSpace::new(2, 4)?;
        instances.push((
            "d-coupled n=2 g=0.5".into(),
            build_model(&lat, &base_params(Model::DCoupled, 0.5), &basis, Some(&ph))?,
        ));
    }
    {
        let lat = chain(1)?;
        let basis = SpinfulBasis::half_filled(1)?;
        let ph = PhononSpace::new(1, 4)?;
        for model in [Model::DCoupled, Model::FCoupled] {
            instances.push((
                format!("{model:?} n=1 g=0.3"),
                build_model(&lat, &base_params(model, 0.3), &basis, Some(&ph))?,
            ));
        }
    }
    for (name, h) in &instances {
        let dense = lowest_eigenvalues(h, 1)?[0];
        let opts = SolverOpts {
            dense_cutoff: 0,
            ..SolverOpts::default()
        };
        let lanczos = ground_state(h, &opts)?;
        let diff = (dense - lanczos.e0).abs();
        pass &= diff <= 1e-9;
        detail.push(format!("{name}: |diff|={diff:.3e}"));
    }
    Ok((pass, detail.join("; ")))
}

/// Run all acceptance criteria in order.
pub fn run_all() -> Vec<CriterionOutcome> {
    let runners: Vec<(u32, &'static str, f64, fn() -> Result<(bool, String)>)> = vec![
        (1, "uniqueness and S=0, phonons on d-orbitals", 60.0, criterion_1),
        (2, "uniqueness and S=0, phonons on f-orbitals", 60.0, criterion_2),
        (3, "staggered correlator signs", f64::INFINITY, criterion_3),
        (4, "g=0 reduction and bare-model theorems", f64::INFINITY, criterion_4),
        (5, "deformation identities and spectral equivalence", f64::INFINITY, criterion_5),
        (6, "configuration graph connectivity", 30.0, criterion_6),
        (7, "projected-semigroup asymptotics", f64::INFINITY, criterion_7),
        (8, "path-product convergence", f64::INFINITY, criterion_8),
        (9, "cone positivity of the heat semigroup", f64::INFINITY, criterion_9),
        (10, "ergodicity witness", f64::INFINITY, criterion_10),
        (11, "Lanczos vs dense solver agreement", f64::INFINITY, criterion_11),
    ];
    runners
        .into_iter()
        .map(|(id, name, budget, f)| {
            let start = Instant::now();
            let (pass, detail) = match f() {
                Ok((p, d)) => (p, d),
                Err(e) => (false, format!("error: {e}")),
            };
            let seconds = start.elapsed().as_secs_f64();
            let within_budget = seconds < budget;
            CriterionOutcome {
                id,
                name,
                pass: pass && within_budget,
                detail: if within_budget {
                    detail
                } else {
                    format!("{detail}; TIME BUDGET {budget:.0}s EXCEEDED")
                },
                seconds,
            }
        })
        .collect()
}

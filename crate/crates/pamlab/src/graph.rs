//! The configuration graph: vertices are electron configurations
//! `X = (X_d, X_f)` with `|X_d| + |X_f| = n`, and two configurations are
//! adjacent iff either
//!
//! * (d-edge) `X_f = Y_f` and `X_d triangle Y_d = {x, y}` with
//!   `t_{x,y} != 0`, or
//! * (df-edge) `X_d triangle Y_d = {x} = X_f triangle Y_f`.
//!
//! Connectivity of this graph is certified constructively: every
//! configuration is joined to the full-f configuration `F = (empty, Lambda)`
//! by first moving surplus d-electrons into their own f-orbitals
//! (simplification) and then walking boundary d-electrons along shortest
//! hopping paths into empty sites. The construction follows the proof
//! verbatim and reports (never patches) any state where the literal
//! procedure stalls.

use serde::Serialize;

use crate::fock::{config_vector, ElectronConfiguration, SectorBasis};
use crate::lattice::Lattice;
use crate::linalg::C64;
use crate::ops::{b_hat_op, BHatKind};
use crate::{PamError, Result};

/// All configurations for `n` sites, deterministic order: `X_d` mask
/// ascending outer, `X_f` mask ascending inner.
pub fn enumerate_configs(n_sites: usize) -> Vec<ElectronConfiguration> {
    assert!(
        (1..=12).contains(&n_sites),
        "configuration enumeration supports 1..=12 sites"
    );
    let full = 1u32 << n_sites;
    let mut out = Vec::new();
    for xd in 0..full {
        for xf in 0..full {
            if (xd.count_ones() + xf.count_ones()) as usize == n_sites {
                out.push(ElectronConfiguration::new(xd, xf));
            }
        }
    }
    out
}

/// Classification of an ordered configuration pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EdgeClass {
    /// Conduction hop between distinct sites with nonzero hopping.
    DEdge { x: usize, y: usize },
    /// d <-> f exchange at a single site.
    DfEdge { x: usize },
    /// Not adjacent (includes equal configurations).
    None,
}

fn check_config(cfg: &ElectronConfiguration, n: usize) -> Result<()> {
    let span = (1u32 << n) - 1;
    if cfg.xd & !span != 0 || cfg.xf & !span != 0 {
        return Err(PamError::InvalidParams(format!(
            "configuration {cfg:?} uses sites outside 0..{n}"
        )));
    }
    if cfg.n_total() != n {
        return Err(PamError::InvalidParams(format!(
            "configuration {cfg:?} has {} electrons, expected {n}",
            cfg.n_total()
        )));
    }
    Ok(())
}

/// Classify a pair of configurations per the edge definition.
pub fn classify_edge(
    a: &ElectronConfiguration,
    b: &ElectronConfiguration,
    lattice: &Lattice,
) -> Result<EdgeClass> {
    let n = lattice.n_sites();
    check_config(a, n)?;
    check_config(b, n)?;
    let dd = a.xd ^ b.xd;
    let ff = a.xf ^ b.xf;
    if ff == 0 && dd.count_ones() == 2 {
        let x = dd.trailing_zeros() as usize;
        let y = (31 - dd.leading_zeros()) as usize;
        if lattice.t(x, y) != 0.0 {
            return Ok(EdgeClass::DEdge { x, y });
        }
        return Ok(EdgeClass::None);
    }
    if dd.count_ones() == 1 && dd == ff {
        return Ok(EdgeClass::DfEdge {
            x: dd.trailing_zeros() as usize,
        });
    }
    Ok(EdgeClass::None)
}

/// An edge witness: the one-species operator `B^eps_{x,y}` mapping `|X>`
/// to `c |Y>` with `c != 0`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EdgeWitness {
    pub x: usize,
    pub y: usize,
    pub minus: bool,
    pub c_re: f64,
    pub c_im: f64,
}

/// Find the witness operator for an adjacent pair by applying each
/// candidate `B^eps_{x,y}` to `|X>` and checking the image is a nonzero
/// multiple of `|Y>`. Errors if the pair is not an edge, or (internal
/// inconsistency) if classification succeeds but no operator witnesses it.
pub fn edge_witness_operator(
    a: &ElectronConfiguration,
    b: &ElectronConfiguration,
    lattice: &Lattice,
    v: f64,
) -> Result<EdgeWitness> {
    let n = lattice.n_sites();
    let class = classify_edge(a, b, lattice)?;
    let candidates: Vec<(usize, usize)> = match class {
        EdgeClass::None => {
            return Err(PamError::Operator(format!(
                "{a:?} and {b:?} are not adjacent"
            )))
        }
        EdgeClass::DEdge { x, y } => vec![(x, y), (y, x)],
        EdgeClass::DfEdge { x } => vec![(x, x)],
    };
    let basis = SectorBasis::with_site_cap(n, n, n)?;
    let ia = config_vector(a, &basis)?;
    let ib = config_vector(b, &basis)?;
    for (x, y) in candidates {
        for kind in [BHatKind::Minus, BHatKind::Plus] {
            let op = b_hat_op(kind, x, y, lattice, v, &basis)?;
            // Column ia of the matrix is B |X>.
            let mut image: Vec<(usize, C64)> = Vec::new();
            for r in 0..basis.len() {
                for (col, val) in op.row(r) {
                    if col == ia && val.norm() > 0.0 {
                        image.push((r, val));
                    }
                }
            }
            if image.len() == 1 && image[0].0 == ib {
                return Ok(EdgeWitness {
                    x,
                    y,
                    minus: kind == BHatKind::Minus,
                    c_re: image[0].1.re,
                    c_im: image[0].1.im,
                });
            }
        }
    }
    Err(PamError::Operator(format!(
        "internal error: classified edge {a:?} -- {b:?} has no operator witness"
    )))
}

/// A walk in the configuration graph.
#[derive(Clone, Debug, Serialize)]
pub struct ConfigPath {
    pub configs: Vec<ElectronConfiguration>,
}

impl ConfigPath {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn first(&self) -> &ElectronConfiguration {
        self.configs.first().expect("nonempty path")
    }

    pub fn last(&self) -> &ElectronConfiguration {
        self.configs.last().expect("nonempty path")
    }

    /// Concatenate, merging the shared junction configuration and
    /// dropping any consecutive repeats created by trivial segments.
    pub fn compose(&self, other: &ConfigPath) -> Result<ConfigPath> {
        if self.last() != other.first() {
            return Err(PamError::InvalidParams(format!(
                "path composition endpoints differ: {:?} vs {:?}",
                self.last(),
                other.first()
            )));
        }
        let mut configs = self.configs.clone();
        for c in &other.configs[1..] {
            if configs.last() != Some(c) {
                configs.push(*c);
            }
        }
        Ok(ConfigPath { configs })
    }

    pub fn reversed(&self) -> ConfigPath {
        let mut configs = self.configs.clone();
        configs.reverse();
        ConfigPath { configs }
    }
}

/// Validation outcome with the first offending step, if any.
#[derive(Clone, Debug, Serialize)]
pub struct PathValidation {
    pub valid: bool,
    /// Index `i` such that `(configs[i], configs[i+1])` is not an edge.
    pub first_violation: Option<usize>,
}

/// Check every consecutive pair classifies as an edge.
pub fn validate_path(path: &ConfigPath, lattice: &Lattice) -> Result<PathValidation> {
    if path.is_empty() {
        return Err(PamError::InvalidParams("empty path".into()));
    }
    for (i, pair) in path.configs.windows(2).enumerate() {
        if classify_edge(&pair[0], &pair[1], lattice)? == EdgeClass::None {
            return Ok(PathValidation {
                valid: false,
                first_violation: Some(i),
            });
        }
    }
    Ok(PathValidation {
        valid: true,
        first_violation: None,
    })
}

fn sites_ascending(mask: u32) -> impl Iterator<Item = usize> {
    (0..32usize).filter(move |&b| mask >> b & 1 == 1)
}

/// Path of df-edges from `X` to its simplification
/// `S X = (X_d cap X_f, X_d cup X_f)`, moving one surplus d-electron
/// (smallest site first) into its f-orbital per step. Length is exactly
/// `|X_d \ X_f| + 1`; the length-1 path when `X` is already f-dominated.
pub fn simplify_path(cfg: &ElectronConfiguration, n_sites: usize) -> Result<ConfigPath> {
    check_config(cfg, n_sites)?;
    let mut configs = vec![*cfg];
    let mut cur = *cfg;
    while !cur.is_f_dominated() {
        let surplus = cur.xd & !cur.xf;
        let x = surplus.trailing_zeros();
        cur = ElectronConfiguration::new(cur.xd & !(1 << x), cur.xf | (1 << x));
        configs.push(cur);
    }
    Ok(ConfigPath { configs })
}

/// Boundary `dZ = {z in Z : exists x in Z^c with t_{x,z} != 0}`.
fn boundary(mask: u32, lattice: &Lattice) -> Vec<usize> {
    let n = lattice.n_sites();
    sites_ascending(mask)
        .filter(|&z| {
            (0..n).any(|x| mask >> x & 1 == 0 && lattice.t(x, z) != 0.0)
        })
        .collect()
}

/// Shortest path from `w` to `z` whose interior lies in `allowed`
/// (breadth-first search; ties broken by ascending site order). Returns
/// the site sequence `w, ..., z` or `None`.
fn shortest_path_through(
    w: usize,
    z: usize,
    allowed: u32,
    lattice: &Lattice,
) -> Option<Vec<usize>> {
    let n = lattice.n_sites();
    let ok_interior = |s: usize| allowed >> s & 1 == 1;
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([w]);
    seen[w] = true;
    while let Some(u) = queue.pop_front() {
        // Ascending neighbor order makes the breadth-first tree unique.
        for v in lattice.neighbors(u) {
            if seen[v] {
                continue;
            }
            if v == z {
                let mut path = vec![z, u];
                let mut c = u;
                while c != w {
                    c = prev[c];
                    path.push(c);
                }
                path.reverse();
                return Some(path);
            }
            if ok_interior(v) {
                seen[v] = true;
                prev[v] = u;
                queue.push_back(v);
            }
        }
    }
    None
}

/// Path from an f-dominated configuration to `F = (empty, Lambda)`: while
/// empty sites remain, pick the first boundary pair `(z, w)` (site order)
/// with a usable shortest path, hop the d-electron from `w` to `z` through
/// `X_f \ X_d` (d-edges), then convert it at `z` (df-edge).
pub fn path_to_full_f(cfg: &ElectronConfiguration, lattice: &Lattice) -> Result<ConfigPath> {
    let n = lattice.n_sites();
    check_config(cfg, n)?;
    if !cfg.is_f_dominated() {
        return Err(PamError::InvalidParams(format!(
            "{cfg:?} is not f-dominated; simplify first"
        )));
    }
    let full = (1u32 << n) - 1;
    let mut configs = vec![*cfg];
    let mut cur = *cfg;
    loop {
        let y_mask = full & !(cur.xd | cur.xf);
        if y_mask == 0 {
            break;
        }
        let core = cur.xd & cur.xf;
        if core == 0 {
            return Err(PamError::GraphStuck(format!(
                "degenerate state {cur:?}: empty sites remain but X_d cap X_f is empty"
            )));
        }
        let allowed = cur.xf & !cur.xd;
        let mut found: Option<Vec<usize>> = None;
        'outer: for z in boundary(y_mask, lattice) {
            for w in boundary(core, lattice) {
                if let Some(p) = shortest_path_through(w, z, allowed, lattice) {
                    found = Some(p);
                    break 'outer;
                }
            }
        }
        let walk = found.ok_or_else(|| {
            PamError::GraphStuck(format!(
                "no boundary pair with a usable path at {cur:?}"
            ))
        })?;
        // d-edge hops w = u_0 -> u_1 -> ... -> u_k = z.
        for step in walk.windows(2) {
            let (from, to) = (step[0], step[1]);
            cur = ElectronConfiguration::new(
                (cur.xd & !(1 << from)) | (1 << to),
                cur.xf,
            );
            configs.push(cur);
        }
        // Terminal df-edge at z.
        let z = *walk.last().expect("nonempty walk");
        cur = ElectronConfiguration::new(cur.xd & !(1 << z), cur.xf | (1 << z));
        configs.push(cur);
    }
    debug_assert_eq!(cur, ElectronConfiguration::full_f(n));
    Ok(ConfigPath { configs })
}

/// Path from any configuration to `F`: simplification followed by the
/// boundary walk.
pub fn path_to_f(cfg: &ElectronConfiguration, lattice: &Lattice) -> Result<ConfigPath> {
    let p1 = simplify_path(cfg, lattice.n_sites())?;
    let p2 = path_to_full_f(p1.last(), lattice)?;
    p1.compose(&p2)
}

/// Path connecting two arbitrary configurations through `F`.
pub fn connect(
    a: &ElectronConfiguration,
    b: &ElectronConfiguration,
    lattice: &Lattice,
) -> Result<ConfigPath> {
    let pa = path_to_f(a, lattice)?;
    let pb = path_to_f(b, lattice)?.reversed();
    pa.compose(&pb)
}

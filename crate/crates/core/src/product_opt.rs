//! Extremization of Hermitian forms `<phi|X|phi>` over product vectors.
//!
//! Two independent routes are provided. The seesaw updates one local factor at
//! a time to the extremal eigenvector of the effective operator obtained by
//! contracting `X` with all other factors; it is fast but only locally
//! optimal. The grid scan enumerates Bloch angles for every qubit and then
//! refines around the best cells; it is slow, qubit-only, and serves as the
//! cross-check. [`certify`] runs both and reports whether they agree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{random_product_vector, ProductVector};
use crate::tensor::{eig_hermitian, ComplexMatrix, HilbertDims, C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Min,
    Max,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Max => 1.0,
            Direction::Min => -1.0,
        }
    }

    /// True when `a` is strictly better than `b` in this direction.
    pub fn better(self, a: f64, b: f64) -> bool {
        self.sign() * a > self.sign() * b
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Direction::Min),
            "max" => Ok(Direction::Max),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Seesaw,
    Grid,
    GridRefined,
}

/// Extremal value of a Hermitian form over product vectors, with the vector attaining it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub value: f64,
    pub argopt: ProductVector,
    pub iterations: usize,
    pub restarts_used: usize,
    pub converged: bool,
    pub method: Method,
    /// Value reached by the independent route when the result comes from [`certify`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeesawSettings {
    pub restarts: usize,
    pub max_sweeps: usize,
    /// Relative change of the objective over one sweep below which a run stops.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SeesawSettings {
    fn default() -> Self {
        SeesawSettings {
            restarts: 64,
            max_sweeps: 500,
            tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSettings {
    /// Lattice points per Bloch angle and per qubit.
    pub points: usize,
    pub refine_levels: usize,
    /// Number of separated coarse optima that get refined.
    pub candidates: usize,
}

impl Default for GridSettings {
    fn default() -> Self {
        GridSettings {
            points: 16,
            refine_levels: 3,
            candidates: 4,
        }
    }
}

/// Settings for [`certify`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub seesaw: SeesawSettings,
    pub grid: GridSettings,
    /// Maximum |seesaw - grid| for a certified result.
    pub agreement_tol: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            seesaw: SeesawSettings::default(),
            grid: GridSettings::default(),
            agreement_tol: 1e-3,
        }
    }
}

impl Budget {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seesaw.seed = seed;
        self
    }
}

fn check_form(x: &ComplexMatrix, dims: &HilbertDims) -> Result<()> {
    let n = x.require_square("objective operator")?;
    if n != dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "operator is {n}x{n} but dims {dims} have total {}",
            dims.total()
        )));
    }
    x.require_hermitian()
}

/// Contracts `X` with every factor except the `k`-th (0-based) on both sides:
/// `M_k = (<phi_rest| ⊗ I_k) X (|phi_rest> ⊗ I_k)`.
pub fn effective_operator(
    x: &ComplexMatrix,
    dims: &HilbertDims,
    locals: &[Vec<C64>],
    k: usize,
) -> ComplexMatrix {
    let n = dims.total();
    let dk = dims.as_slice()[k];
    let mut weight = vec![ZERO; n];
    let mut local_index = vec![0usize; n];
    for (i, (w, li)) in weight.iter_mut().zip(local_index.iter_mut()).enumerate() {
        let digits = dims.digits(i);
        *li = digits[k];
        *w = digits
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != k)
            .map(|(l, &d)| locals[l][d])
            .product();
    }
    let mut m = ComplexMatrix::zeros(dk, dk);
    for r in 0..n {
        let wr = weight[r].conj();
        if wr == ZERO {
            continue;
        }
        for c in 0..n {
            m[(local_index[r], local_index[c])] += wr * x[(r, c)] * weight[c];
        }
    }
    m.hermitian_part()
}

/// Extremal eigenvector of a small Hermitian matrix with a deterministic choice
/// inside degenerate eigenspaces: largest absolute-value amplitude pattern in
/// lexicographic order, then the first nonzero amplitude made real positive.
fn extremal_eigenvector(m: &ComplexMatrix, direction: Direction) -> Result<(f64, Vec<C64>)> {
    let eig = eig_hermitian(m)?;
    let n = eig.values.len();
    let best = match direction {
        Direction::Max => eig.max(),
        Direction::Min => eig.min(),
    };
    let tol = 1e-12 * (1.0 + best.abs());
    let mut chosen: Option<Vec<C64>> = None;
    for k in 0..n {
        if (eig.values[k] - best).abs() > tol {
            continue;
        }
        let v = eig.vector(k);
        chosen = match chosen {
            None => Some(v),
            Some(prev) => {
                let prev_abs = prev.iter().map(|z| z.norm());
                let ord = v
                    .iter()
                    .map(|z| z.norm())
                    .zip(prev_abs)
                    .map(|(a, b)| a.total_cmp(&b))
                    .find(|o| o.is_ne());
                if ord == Some(std::cmp::Ordering::Greater) {
                    Some(v)
                } else {
                    Some(prev)
                }
            }
        };
    }
    let mut v = chosen.expect("at least one eigenvector attains the extremum");
    if let Some(first) = v.iter().copied().find(|z| z.norm() > 1e-14) {
        let phase = first.conj() / first.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
    Ok((best, v))
}

/// Trace of a single seesaw run.
#[derive(Clone, Debug)]
pub struct SeesawRun {
    /// Objective at the start and after every sweep.
    pub history: Vec<f64>,
    pub point: ProductVector,
    pub value: f64,
    pub sweeps: usize,
    pub converged: bool,
}

/// Runs the alternating eigenvector updates from a given starting point.
pub fn seesaw_run(
    x: &ComplexMatrix,
    dims: &HilbertDims,
    direction: Direction,
    start: &ProductVector,
    max_sweeps: usize,
    tol: f64,
) -> Result<SeesawRun> {
    check_form(x, dims)?;
    if &start.dims() != dims {
        return Err(Error::DimensionMismatch(format!(
            "start vector has dims {} but operator has dims {dims}",
            start.dims()
        )));
    }
    let mut locals = start.locals().to_vec();
    let mut current = start.expectation(x)?;
    let mut history = vec![current];
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        for k in 0..dims.len() {
            let m = effective_operator(x, dims, &locals, k);
            let (_, v) = extremal_eigenvector(&m, direction)?;
            locals[k] = v;
        }
        let point = ProductVector::normalized(locals.clone())?;
        let next = point.expectation(x)?;
        history.push(next);
        let change = (next - current).abs();
        current = next;
        if change <= tol * current.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    let point = ProductVector::normalized(locals)?;
    let value = point.expectation(x)?;
    Ok(SeesawRun {
        history,
        point,
        value,
        sweeps,
        converged,
    })
}

/// Best seesaw result over `settings.restarts` Haar-random starting points.
///
/// Restart `i` draws its start from stream `i` of a ChaCha8 generator seeded
/// with `settings.seed`, so the result does not depend on scheduling; equal
/// values resolve to the lowest restart index.
pub fn seesaw_extremize(
    x: &ComplexMatrix,
    dims: &HilbertDims,
    direction: Direction,
    settings: &SeesawSettings,
) -> Result<OptResult> {
    check_form(x, dims)?;
    if settings.restarts == 0 {
        return Err(Error::OutOfRange(
            "seesaw needs at least one restart".into(),
        ));
    }
    let runs: Vec<Result<SeesawRun>> = (0..settings.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
            rng.set_stream(i as u64);
            let start = random_product_vector(&mut rng, dims);
            seesaw_run(
                x,
                dims,
                direction,
                &start,
                settings.max_sweeps,
                settings.tol,
            )
        })
        .collect();

    let mut best: Option<SeesawRun> = None;
    for run in runs {
        let run = run?;
        if best
            .as_ref()
            .is_none_or(|b| direction.better(run.value, b.value))
        {
            best = Some(run);
        }
    }
    let best = best.expect("restarts >= 1");
    Ok(OptResult {
        value: best.value,
        argopt: best.point,
        iterations: best.sweeps,
        restarts_used: settings.restarts,
        converged: best.converged,
        method: Method::Seesaw,
        cross_check: None,
    })
}

#[derive(Clone, Copy, Debug)]
struct Angles {
    theta: f64,
    phi: f64,
}

impl Angles {
    fn vector(self) -> [C64; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        [C64::new(c, 0.0), C64::from_polar(s, self.phi)]
    }
}

/// Trigonometric factors of one lattice option for the last-qubit form
/// `m00 c^2 + m11 s^2 + 2 c s Re(m01 e^{i phi})`.
#[derive(Clone, Copy)]
struct LeafTerms {
    cc: f64,
    ss: f64,
    cs2: f64,
    cos_phi: f64,
    sin_phi: f64,
}

impl From<Angles> for LeafTerms {
    fn from(a: Angles) -> Self {
        let (s, c) = (a.theta / 2.0).sin_cos();
        let (sin_phi, cos_phi) = a.phi.sin_cos();
        LeafTerms {
            cc: c * c,
            ss: s * s,
            cs2: 2.0 * c * s,
            cos_phi,
            sin_phi,
        }
    }
}

/// One lattice of angle pairs per qubit.
struct Lattice {
    angles: Vec<Vec<Angles>>,
    vectors: Vec<Vec<[C64; 2]>>,
    leaf: Vec<LeafTerms>,
}

impl Lattice {
    fn from_angles(angles: Vec<Vec<Angles>>) -> Self {
        let vectors = angles
            .iter()
            .map(|opts| opts.iter().map(|a| a.vector()).collect())
            .collect();
        let leaf = angles
            .last()
            .expect("at least one qubit")
            .iter()
            .map(|&a| LeafTerms::from(a))
            .collect();
        Lattice {
            angles,
            vectors,
            leaf,
        }
    }
}

impl Lattice {
    fn coarse(n: usize, g: usize) -> Self {
        let pairs: Vec<Angles> = (0..g)
            .flat_map(|i| {
                (0..g).map(move |j| Angles {
                    theta: std::f64::consts::PI * i as f64 / (g - 1) as f64,
                    phi: 2.0 * std::f64::consts::PI * j as f64 / g as f64,
                })
            })
            .collect();
        Lattice::from_angles(vec![pairs; n])
    }

    /// `g x g` lattice on `[c - h, c + h]` per angle around each incumbent.
    fn window(center: &[Angles], g: usize, h_theta: f64, h_phi: f64) -> Self {
        let offsets: Vec<f64> = (0..g)
            .map(|t| 2.0 * t as f64 / (g - 1) as f64 - 1.0)
            .collect();
        let angles = center
            .iter()
            .map(|c| {
                offsets
                    .iter()
                    .flat_map(|&a| {
                        offsets.iter().map(move |&b| Angles {
                            theta: c.theta + a * h_theta,
                            phi: c.phi + b * h_phi,
                        })
                    })
                    .collect()
            })
            .collect();
        Lattice::from_angles(angles)
    }
}

/// `(<v| ⊗ I) M (|v> ⊗ I)` for a leading qubit.
fn contract_leading_qubit(m: &ComplexMatrix, v: &[C64; 2]) -> ComplexMatrix {
    let half = m.rows() / 2;
    ComplexMatrix::from_fn(half, half, |i, j| {
        let mut acc = ZERO;
        for a in 0..2 {
            for b in 0..2 {
                acc += v[a].conj() * m[(a * half + i, b * half + j)] * v[b];
            }
        }
        acc
    })
}

/// Exhaustive maximization of `<phi|m|phi>` over the lattice for qubits
/// `level..`; returns the best value and writes the chosen lattice indices
/// into `choice[level..]`.
fn scan_tail(m: &ComplexMatrix, lattice: &Lattice, level: usize, choice: &mut [usize]) -> f64 {
    if level + 1 == lattice.angles.len() {
        let (m00, m11, m01) = (m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)]);
        let mut best = (f64::NEG_INFINITY, 0);
        for (idx, t) in lattice.leaf.iter().enumerate() {
            let cross = m01.re * t.cos_phi - m01.im * t.sin_phi;
            let val = m00 * t.cc + m11 * t.ss + t.cs2 * cross;
            if val > best.0 {
                best = (val, idx);
            }
        }
        choice[level] = best.1;
        return best.0;
    }
    let mut best = f64::NEG_INFINITY;
    let mut trial = choice.to_vec();
    for (idx, v) in lattice.vectors[level].iter().enumerate() {
        let reduced = contract_leading_qubit(m, v);
        let val = scan_tail(&reduced, lattice, level + 1, &mut trial);
        if val > best {
            best = val;
            choice[level] = idx;
            choice[level + 1..].copy_from_slice(&trial[level + 1..]);
        }
    }
    best
}

/// For each lattice option of the first qubit, the best completion.
fn scan_profile(m: &ComplexMatrix, lattice: &Lattice) -> Vec<(f64, Vec<usize>)> {
    let n = lattice.angles.len();
    if n == 1 {
        return lattice
            .leaf
            .iter()
            .enumerate()
            .map(|(idx, t)| {
                let cross = m[(0, 1)].re * t.cos_phi - m[(0, 1)].im * t.sin_phi;
                (
                    m[(0, 0)].re * t.cc + m[(1, 1)].re * t.ss + t.cs2 * cross,
                    vec![idx],
                )
            })
            .collect();
    }
    lattice.vectors[0]
        .par_iter()
        .enumerate()
        .map(|(idx, v)| {
            let reduced = contract_leading_qubit(m, v);
            let mut choice = vec![0; n];
            let val = scan_tail(&reduced, lattice, 1, &mut choice);
            choice[0] = idx;
            (val, choice)
        })
        .collect()
}

/// Local maxima of the first-qubit profile on the coarse `(theta, phi)` lattice
/// (phi periodic), best first.
fn separated_candidates(profile: &[(f64, Vec<usize>)], g: usize, count: usize) -> Vec<Vec<usize>> {
    let value = |i: usize, j: usize| profile[i * g + j].0;
    let mut peaks: Vec<(f64, usize)> = Vec::new();
    for i in 0..g {
        for j in 0..g {
            let v = value(i, j);
            let mut is_peak = true;
            for di in [-1isize, 0, 1] {
                for dj in [-1isize, 0, 1] {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let ni = i as isize + di;
                    if ni < 0 || ni >= g as isize {
                        continue;
                    }
                    let nj = (j as isize + dj).rem_euclid(g as isize) as usize;
                    if value(ni as usize, nj) > v {
                        is_peak = false;
                    }
                }
            }
            if is_peak {
                peaks.push((v, i * g + j));
            }
        }
    }
    peaks.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    peaks.dedup_by(|a, b| a.0 == b.0);
    peaks
        .into_iter()
        .take(count.max(1))
        .map(|(_, idx)| profile[idx].1.clone())
        .collect()
}

/// Brute-force scan over Bloch angles of every qubit followed by local grid
/// refinements: each refinement rescans a `points x points` lattice spanning
/// one cell on either side of the incumbent, shrinking the cell by a factor
/// `(points - 1) / 2`. Deterministic.
pub fn grid_extremize(
    x: &ComplexMatrix,
    dims: &HilbertDims,
    direction: Direction,
    settings: &GridSettings,
) -> Result<OptResult> {
    check_form(x, dims)?;
    if !dims.is_all_qubits() {
        return Err(Error::UnsupportedDims(format!(
            "grid oracle handles qubits only, got dims {dims}"
        )));
    }
    let g = settings.points;
    if g < 3 {
        return Err(Error::OutOfRange(format!(
            "grid needs at least 3 points, got {g}"
        )));
    }
    let n = dims.len();
    let signed = x.hermitian_part().scale_real(direction.sign());

    let coarse = Lattice::coarse(n, g);
    let profile = scan_profile(&signed, &coarse);
    let candidates = separated_candidates(&profile, g, settings.candidates);
    let mut scans = 1;

    let mut best: Option<(f64, Vec<Angles>)> = None;
    for cand in candidates {
        let mut incumbent: Vec<Angles> = cand
            .iter()
            .enumerate()
            .map(|(q, &i)| coarse.angles[q][i])
            .collect();
        let mut value = profile[cand[0]].0;
        let mut h_theta = std::f64::consts::PI / (g - 1) as f64;
        let mut h_phi = 2.0 * std::f64::consts::PI / g as f64;
        for _ in 0..settings.refine_levels {
            let lattice = Lattice::window(&incumbent, g, h_theta, h_phi);
            let (v, idx) = scan_profile(&signed, &lattice).into_iter().fold(
                (f64::NEG_INFINITY, Vec::new()),
                |acc, item| {
                    if item.0 > acc.0 {
                        item
                    } else {
                        acc
                    }
                },
            );
            scans += 1;
            if v >= value {
                value = v;
                incumbent = idx
                    .iter()
                    .enumerate()
                    .map(|(q, &i)| lattice.angles[q][i])
                    .collect();
            }
            h_theta *= 2.0 / (g - 1) as f64;
            h_phi *= 2.0 / (g - 1) as f64;
        }
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, incumbent));
        }
    }

    let (_, angles) = best.expect("at least one candidate");
    let argopt = ProductVector::normalized(angles.iter().map(|a| a.vector().to_vec()).collect())?;
    let value = argopt.expectation(x)?;
    Ok(OptResult {
        value,
        argopt,
        iterations: scans,
        restarts_used: 0,
        converged: true,
        method: if settings.refine_levels == 0 {
            Method::Grid
        } else {
            Method::GridRefined
        },
        cross_check: None,
    })
}

/// Runs the seesaw and the grid oracle. Returns the seesaw result, marked
/// `converged` only when the two agree within `budget.agreement_tol`; the grid
/// value is attached as `cross_check` either way.
pub fn certify(
    x: &ComplexMatrix,
    dims: &HilbertDims,
    direction: Direction,
    budget: &Budget,
) -> Result<OptResult> {
    let mut seesaw = seesaw_extremize(x, dims, direction, &budget.seesaw)?;
    let grid = grid_extremize(x, dims, direction, &budget.grid)?;
    seesaw.converged = (seesaw.value - grid.value).abs() <= budget.agreement_tol;
    seesaw.cross_check = Some(grid.value);
    Ok(seesaw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{named_operator, NamedOperator};
    use crate::tensor::{kron, ONE};

    fn quick() -> SeesawSettings {
        SeesawSettings {
            restarts: 8,
            ..SeesawSettings::default()
        }
    }

    #[test]
    fn identity_gives_one_both_ways() {
        let dims = HilbertDims::qubits(3);
        let id = ComplexMatrix::identity(8);
        for dir in [Direction::Min, Direction::Max] {
            let r = seesaw_extremize(&id, &dims, dir, &quick()).unwrap();
            assert!((r.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn max_entangled_overlap_is_one_over_d() {
        for d in [2, 3] {
            let pp = named_operator(NamedOperator::PPlus, d).unwrap();
            let dims = HilbertDims::new(vec![d, d]).unwrap();
            let r = seesaw_extremize(&pp, &dims, Direction::Max, &quick()).unwrap();
            assert!(
                (r.value - 1.0 / d as f64).abs() < 1e-9,
                "d={d}: {}",
                r.value
            );
            assert_eq!(r.method, Method::Seesaw);
        }
    }

    #[test]
    fn grid_finds_sigma_z_eigenvector() {
        let z = named_operator(NamedOperator::PauliZ, 2).unwrap();
        let x = kron(&z, &ComplexMatrix::identity(2));
        let r = grid_extremize(
            &x,
            &HilbertDims::qubits(2),
            Direction::Max,
            &GridSettings::default(),
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!((r.argopt.locals()[0][0].norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn grid_rejects_qutrits() {
        let dims = HilbertDims::new(vec![2, 3]).unwrap();
        let r = grid_extremize(
            &ComplexMatrix::identity(6),
            &dims,
            Direction::Max,
            &GridSettings::default(),
        );
        assert!(matches!(r, Err(Error::UnsupportedDims(_))));
    }

    #[test]
    fn rejects_non_hermitian_objective() {
        let mut x = ComplexMatrix::identity(4);
        x[(0, 1)] = ONE;
        let r = seesaw_extremize(&x, &HilbertDims::qubits(2), Direction::Max, &quick());
        assert!(matches!(r, Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let x = named_operator(NamedOperator::FlipV, 2).unwrap();
        let dims = HilbertDims::qubits(2);
        let a = seesaw_extremize(&x, &dims, Direction::Min, &quick()).unwrap();
        let b = seesaw_extremize(&x, &dims, Direction::Min, &quick()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn effective_operator_matches_full_expectation() {
        let dims = HilbertDims::new(vec![2, 3, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_product_vector(&mut rng, &dims);
        let x = ComplexMatrix::from_fn(12, 12, |i, j| {
            C64::new(
                ((i + 2 * j) as f64).sin() + ((2 * i + j) as f64).sin(),
                (i as f64 - j as f64) * 0.1,
            )
        });
        let full = p.expectation(&x).unwrap();
        for k in 0..3 {
            let m = effective_operator(&x, &dims, p.locals(), k);
            let local = m.expectation(&p.locals()[k]).unwrap().re;
            assert!((local - full).abs() < 1e-12);
        }
    }

    #[test]
    fn tie_break_fixes_phase() {
        let (_, v) = extremal_eigenvector(&ComplexMatrix::identity(2), Direction::Max).unwrap();
        assert!(v[0].im.abs() < 1e-15 && v[0].re > 0.0);
    }
}

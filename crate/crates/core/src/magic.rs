//! "Magic" Lamb-Dicke parameters: values of `eta` at which one carrier pulse
//! rotates two Fock levels by commensurate angles, 2m pi (a no-op) on one
//! and (2k+1) pi (a flip) on the other, so the pulse is a reduced
//! controlled-NOT between the motional and internal qubits.
//!
//! For the `|0>`/`|1>` pair the condition `Omega_11/Omega_00 = 1 - eta^2 =
//! (2k+1)/2m` solves in closed form; general Fock pairs need root-finding on
//! a ratio of Laguerre polynomials.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specfun::laguerre_unchecked;

/// Ratio-condition agreement demanded of a magic operating point.
const RATIO_TOL: f64 = 1e-12;

/// Root-search grid step in `eta`; the Laguerre ratios in play have
/// well-separated roots at this resolution for the degrees the gate uses.
const GRID_STEP: f64 = 1e-3;

/// Default root-search upper bound, covering all roots relevant to the
/// `n <= 3` pairs.
pub const DEFAULT_SEARCH_MAX: f64 = 2.0;

/// A single-pulse-gate operating point: drive the carrier so Fock level
/// `n_a` rotates by `2m pi` (no net effect) while level `n_b` rotates by
/// `(2k+1) pi` (a flip).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagicEntry {
    k: usize,
    m: usize,
    n_a: usize,
    n_b: usize,
    eta: f64,
    pulse_area_00: f64,
}

impl MagicEntry {
    /// Validate and build an entry. `eta` must satisfy the ratio condition
    /// `L_{n_b}(eta^2)/L_{n_a}(eta^2) = (2k+1)/2m` (or its role-swapped
    /// reciprocal `2m/(2k+1)`) to 1e-12, with `k < m` and `n_a != n_b`.
    pub fn new(k: usize, m: usize, n_a: usize, n_b: usize, eta: f64) -> Result<Self> {
        if k >= m {
            return Err(Error::MagicOrder { k, m });
        }
        if n_a == n_b {
            return Err(Error::NotMagic(format!(
                "no-op and flip Fock levels must differ, both are {n_a}"
            )));
        }
        Error::check_positive("eta", eta)?;

        let x = eta * eta;
        let la = laguerre_unchecked(n_a, 0, x);
        let lb = laguerre_unchecked(n_b, 0, x);
        if la == 0.0 {
            return Err(Error::NotMagic(format!(
                "L_{n_a}(eta^2) vanishes at eta = {eta}; the ratio condition is meaningless"
            )));
        }
        let ratio = lb / la;
        let direct = (2.0 * k as f64 + 1.0) / (2.0 * m as f64);
        let swapped = 1.0 / direct;
        let ok = (ratio - direct).abs() <= RATIO_TOL * direct.abs().max(1.0)
            || (ratio - swapped).abs() <= RATIO_TOL * swapped.abs().max(1.0);
        if !ok {
            return Err(Error::NotMagic(format!(
                "L_{n_b}/L_{n_a} = {ratio} at eta = {eta}, expected {direct} (or {swapped})"
            )));
        }

        // Omega_{n_a,n_a} tau = m pi expressed as a pulse area at Omega_00.
        let pulse_area_00 = m as f64 * PI / la;
        Ok(Self { k, m, n_a, n_b, eta, pulse_area_00 })
    }

    pub fn k(&self) -> usize { self.k }
    pub fn m(&self) -> usize { self.m }
    pub fn n_a(&self) -> usize { self.n_a }
    pub fn n_b(&self) -> usize { self.n_b }
    pub fn eta(&self) -> f64 { self.eta }

    /// `Omega_00 tau` for the gate pulse (equals `m pi` when `n_a = 0`).
    pub fn pulse_area_00(&self) -> f64 { self.pulse_area_00 }
}

/// Closed-form magic value for the `|0>`/`|1>` pair:
/// `eta = sqrt(1 - (2k+1)/2m)`, the unique `eta` in (0, 1) with
/// `Omega_11/Omega_00 = (2k+1)/2m`.
pub fn magic_eta_01(k: usize, m: usize) -> Result<f64> {
    if k >= m {
        return Err(Error::MagicOrder { k, m });
    }
    Ok((1.0 - (2.0 * k as f64 + 1.0) / (2.0 * m as f64)).sqrt())
}

/// All `eta` in `(0, search_max]` with
/// `L_{n_b}(eta^2) / L_{n_a}(eta^2) = (2k+1)/2m`, by sign-change bracketing
/// on a uniform grid followed by bisection. Brackets containing a zero of
/// the denominator are discarded (the ratio condition is a pole there, not
/// a root). Sorted ascending; empty when no root exists in range.
pub fn magic_eta_pair(
    n_a: usize,
    n_b: usize,
    k: usize,
    m: usize,
    search_max: f64,
) -> Result<Vec<f64>> {
    if k >= m {
        return Err(Error::MagicOrder { k, m });
    }
    if n_a == n_b {
        return Err(Error::NotMagic(format!(
            "no-op and flip Fock levels must differ, both are {n_a}"
        )));
    }
    Error::check_positive("search_max", search_max)?;
    let target = (2.0 * k as f64 + 1.0) / (2.0 * m as f64);
    Ok(solve_ratio_condition(n_b, n_a, target, search_max))
}

/// Roots of `L_num(eta^2) / L_den(eta^2) = target` over `(0, search_max]`.
fn solve_ratio_condition(num: usize, den: usize, target: f64, search_max: f64) -> Vec<f64> {
    let f = |eta: f64| -> (f64, f64) {
        let x = eta * eta;
        let d = laguerre_unchecked(den, 0, x);
        let n = laguerre_unchecked(num, 0, x);
        (n / d - target, d)
    };

    let steps = (search_max / GRID_STEP).ceil() as usize;
    let mut roots: Vec<f64> = Vec::new();
    let push_root = |eta: f64, roots: &mut Vec<f64>| {
        if roots.last().is_none_or(|r| (eta - r).abs() > 1e-9) {
            roots.push(eta);
        }
    };

    let mut prev_eta = GRID_STEP.min(search_max);
    let (mut prev_g, mut prev_d) = f(prev_eta);
    if prev_g == 0.0 {
        push_root(prev_eta, &mut roots);
    }
    for i in 2..=steps {
        let eta = (i as f64 * GRID_STEP).min(search_max);
        if eta <= prev_eta {
            break;
        }
        let (g, d) = f(eta);
        if d == 0.0 || prev_d == 0.0 || d.signum() != prev_d.signum() {
            // Pole of the ratio inside (or on) the bracket: discard it.
        } else if g == 0.0 {
            push_root(eta, &mut roots);
        } else if g.signum() != prev_g.signum() {
            let root = bisect(prev_eta, eta, |e| f(e).0);
            push_root(root, &mut roots);
        }
        prev_eta = eta;
        prev_g = g;
        prev_d = d;
    }
    roots
}

/// Plain bisection on a bracketing interval, run down to floating-point
/// resolution (well past the 1e-13 the magic condition needs).
fn bisect<F: Fn(f64) -> f64>(mut lo: f64, mut hi: f64, f: F) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval no longer representable
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Enumerate magic entries for the `|0>`/`|1>` pair over all `(k, m)` with
/// `k <= k_max` and `k < m <= m_max`.
///
/// With `swapped` false this is the published table, from the closed form.
/// With `swapped` true the roles of the two levels switch (`|1>` becomes the
/// no-op) and the condition becomes `Omega_11/Omega_00 = 2m/(2k+1)`, which
/// is solved by root search; it has no solution for `k < m` (the ratio
/// never exceeds 1), so the swapped table is empty over this index range.
///
/// Coincident `eta` values for different `(k, m)`, e.g. `(0,1)`, `(1,3)`,
/// `(2,5)` all give `eta = sqrt(1/2)`, are distinct operating points with
/// different pulse areas and are all kept. Sorted by `(n_a, n_b, k, m, eta)`.
pub fn magic_table(k_max: usize, m_max: usize, swapped: bool) -> Result<Vec<MagicEntry>> {
    if m_max == 0 {
        return Err(Error::InvalidArgument("m_max must be at least 1".into()));
    }
    let mut entries = Vec::new();
    for k in 0..=k_max {
        for m in (k + 1)..=m_max {
            if swapped {
                let target = 2.0 * m as f64 / (2.0 * k as f64 + 1.0);
                for eta in solve_ratio_condition(1, 0, target, DEFAULT_SEARCH_MAX) {
                    entries.push(MagicEntry::new(k, m, 1, 0, eta)?);
                }
            } else {
                let eta = magic_eta_01(k, m)?;
                entries.push(MagicEntry::new(k, m, 0, 1, eta)?);
            }
        }
    }
    sort_entries(&mut entries);
    Ok(entries)
}

/// Magic entries for an arbitrary Fock pair via the root search; one entry
/// per root of the ratio condition in `(0, search_max]`.
pub fn magic_table_for_pair(
    n_a: usize,
    n_b: usize,
    k_max: usize,
    m_max: usize,
    search_max: f64,
) -> Result<Vec<MagicEntry>> {
    if m_max == 0 {
        return Err(Error::InvalidArgument("m_max must be at least 1".into()));
    }
    let mut entries = Vec::new();
    for k in 0..=k_max {
        for m in (k + 1)..=m_max {
            for eta in magic_eta_pair(n_a, n_b, k, m, search_max)? {
                entries.push(MagicEntry::new(k, m, n_a, n_b, eta)?);
            }
        }
    }
    sort_entries(&mut entries);
    Ok(entries)
}

fn sort_entries(entries: &mut [MagicEntry]) {
    entries.sort_by(|a, b| {
        (a.n_a, a.n_b, a.k, a.m)
            .cmp(&(b.n_a, b.n_b, b.k, b.m))
            .then(a.eta.partial_cmp(&b.eta).expect("eta is finite"))
    });
}

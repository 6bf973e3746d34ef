//! Gate synthesis as pulse schedules: the single-pulse reduced CN between an
//! ion's motional and internal qubits, and the three-pulse general two-ion
//! CN (map the control ion onto the shared motional mode, run the reduced
//! gate on the target, unmap). Verification against truth tables, the net
//! 4x4 gate unitary, and Lamb-Dicke sensitivity lives here too.

use ndarray::Array2;
use num_complex::Complex64;

use crate::coupling::CouplingContext;
use crate::dynamics::{
    numeric_propagator, rwa_propagator, JointSpace, NumericOptions, Propagator, Pulse,
    StateVector,
};
use crate::error::{Error, Result};
use crate::magic::MagicEntry;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// How to turn pulses into propagators: the exact rotating-wave block
/// unitaries, or the brute-force time-dependent integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PropagationMethod {
    Rwa,
    Numeric(NumericOptions),
}

/// An ordered pulse list over one joint space.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pulses: Vec<Pulse>,
    space: JointSpace,
}

impl Schedule {
    pub fn new(pulses: Vec<Pulse>, space: JointSpace) -> Result<Self> {
        for p in &pulses {
            if p.target_ion() >= space.n_ions() {
                return Err(Error::IonOutOfRange { ion: p.target_ion(), n_ions: space.n_ions() });
            }
        }
        Ok(Self { pulses, space })
    }

    pub fn pulses(&self) -> &[Pulse] { &self.pulses }
    pub fn space(&self) -> &JointSpace { &self.space }

    /// Product of the pulse propagators, first pulse rightmost.
    pub fn propagator(&self, method: PropagationMethod) -> Result<Propagator> {
        let dim = self.space.dim();
        let mut total = Propagator::new(Array2::from_diag_elem(dim, c64(1.0, 0.0)))?;
        for pulse in &self.pulses {
            let u = match method {
                PropagationMethod::Rwa => rwa_propagator(pulse, &self.space)?,
                PropagationMethod::Numeric(opts) => {
                    numeric_propagator(pulse, &self.space, &opts)?.propagator
                }
            };
            total = total.then(&u)?;
        }
        Ok(total)
    }
}

/// The carrier pulse realizing the reduced CN at a magic operating point:
/// area `Omega_{n_a,n_a} tau = m pi`, equivalently `Omega_{n_b,n_b} tau =
/// (k + 1/2) pi`, a pi-pulse (mod 2 pi) on the flip level. Targets ion 0.
pub fn reduced_cn_pulse(entry: &MagicEntry, phase: f64, g: f64) -> Result<Pulse> {
    reduced_cn_pulse_on(0, entry, phase, g)
}

/// Same as [`reduced_cn_pulse`] aimed at a chosen ion.
pub fn reduced_cn_pulse_on(ion: usize, entry: &MagicEntry, phase: f64, g: f64) -> Result<Pulse> {
    let ctx = CouplingContext::new(entry.eta(), g)?;
    if entry.pulse_area_00() < 0.0 {
        // A negative no-op Laguerre value would demand a negative duration.
        return Err(Error::NotMagic(format!(
            "entry (k={}, m={}, n_a={}, n_b={}) needs a negative pulse area",
            entry.k(), entry.m(), entry.n_a(), entry.n_b()
        )));
    }
    Pulse::carrier(ion, phase, entry.pulse_area_00(), ctx)
}

/// Single-pulse reduced-CN schedule on a one-ion space.
pub fn reduced_cn_schedule(
    entry: &MagicEntry,
    phase: f64,
    g: f64,
    fock_cutoff: usize,
) -> Result<Schedule> {
    let space = JointSpace::new(1, fock_cutoff)?;
    Schedule::new(vec![reduced_cn_pulse(entry, phase, g)?], space)
}

/// The Cirac-Zoller mapping pulse: a red-sideband (s = -1) pulse of area
/// `Omega_{0,1} tau = pi/2`, swapping `|up>|0>` and `|dn>|1>` on the coupled
/// block with unit probability. `inverse` selects the phase (`phi + pi`)
/// that undoes the forward map exactly.
pub fn map_pulse(ion: usize, ctx: &CouplingContext, phase: f64, inverse: bool) -> Result<Pulse> {
    let phi = if inverse { phase + std::f64::consts::PI } else { phase };
    Pulse::new(ion, -1, phi, std::f64::consts::FRAC_PI_2, *ctx)
}

/// The three-pulse general CN: map the control ion's internal state onto
/// the motional mode, run the reduced CN on the target ion, unmap. Flips
/// the target's internal state if and only if the control ion is `up` (the
/// internal state coupled at the red sideband); the motional mode starts
/// and ends in `|0>` on the logical subspace.
///
/// The context's `eta` must match the magic entry's: both describe the same
/// laser-ion geometry.
pub fn compose_cn(
    control_ion: usize,
    target_ion: usize,
    entry: &MagicEntry,
    ctx: &CouplingContext,
    space: &JointSpace,
) -> Result<Schedule> {
    if control_ion == target_ion {
        return Err(Error::InvalidSchedule(
            "control and target must be different ions".into(),
        ));
    }
    if space.n_ions() < 2 {
        return Err(Error::InvalidSchedule("general CN needs at least two ions".into()));
    }
    for &ion in &[control_ion, target_ion] {
        if ion >= space.n_ions() {
            return Err(Error::IonOutOfRange { ion, n_ions: space.n_ions() });
        }
    }
    if space.fock_cutoff() < 2 {
        return Err(Error::InvalidSchedule(
            "general CN needs at least two Fock levels".into(),
        ));
    }
    let rel = (ctx.eta() - entry.eta()).abs() / entry.eta();
    if rel > 1e-12 {
        return Err(Error::InvalidSchedule(format!(
            "coupling context eta = {} does not match the magic entry eta = {}",
            ctx.eta(), entry.eta()
        )));
    }
    let pulses = vec![
        map_pulse(control_ion, ctx, 0.0, false)?,
        reduced_cn_pulse_on(target_ion, entry, 0.0, ctx.g())?,
        map_pulse(control_ion, ctx, 0.0, true)?,
    ];
    Schedule::new(pulses, *space)
}

/// Apply a schedule's pulses to a state in order.
pub fn apply_schedule(
    schedule: &Schedule,
    state: &StateVector,
    method: PropagationMethod,
) -> Result<StateVector> {
    if state.dim() != schedule.space().dim() {
        return Err(Error::DimensionMismatch {
            expected: schedule.space().dim(),
            got: state.dim(),
        });
    }
    let mut out = state.clone();
    for pulse in schedule.pulses() {
        let u = match method {
            PropagationMethod::Rwa => rwa_propagator(pulse, schedule.space())?,
            PropagationMethod::Numeric(opts) => {
                numeric_propagator(pulse, schedule.space(), &opts)?.propagator
            }
        };
        out = u.apply(&out)?;
    }
    Ok(out)
}

/// One truth-table row: populations of the logical basis states after the
/// schedule, for one logical input.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthTableRow {
    pub input: String,
    pub populations: Vec<(String, f64)>,
}

/// Truth-table populations plus the worst leakage outside the logical set.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthTableReport {
    pub rows: Vec<TruthTableRow>,
    pub max_leakage: f64,
}

/// Run the schedule (exact RWA propagation) on each labeled input and report
/// output populations over the same labels, plus the maximum population that
/// escaped the logical set.
pub fn truth_table(schedule: &Schedule, logical_basis: &[&str]) -> Result<TruthTableReport> {
    let space = schedule.space();
    let indices: Vec<usize> = logical_basis
        .iter()
        .map(|label| space.parse_label(label))
        .collect::<Result<_>>()?;
    let u = schedule.propagator(PropagationMethod::Rwa)?;

    let mut rows = Vec::with_capacity(indices.len());
    let mut max_leakage = 0.0f64;
    for (&input_idx, &input_label) in indices.iter().zip(logical_basis) {
        let out = u.apply(&StateVector::basis_state(space, input_idx)?)?;
        let pops = out.populations();
        let populations: Vec<(String, f64)> = indices
            .iter()
            .zip(logical_basis)
            .map(|(&i, &label)| (label.to_string(), pops[i]))
            .collect();
        let logical_sum: f64 = populations.iter().map(|(_, p)| p).sum();
        max_leakage = max_leakage.max(1.0 - logical_sum);
        rows.push(TruthTableRow { input: input_label.to_string(), populations });
    }
    Ok(TruthTableReport { rows, max_leakage })
}

/// Gate fidelity on a declared logical subspace, `|Tr(T^dag U)| / dim`;
/// global-phase invariant by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport {
    pub fidelity: f64,
    pub infidelity: f64,
    pub target_name: String,
}

/// Restrict a full-space unitary to the given basis indices (rows and
/// columns) and compute `|Tr(target^dag restriction)| / dim`.
pub fn subspace_fidelity(
    target: &Array2<Complex64>,
    full: &Array2<Complex64>,
    indices: &[usize],
) -> f64 {
    let mut trace = c64(0.0, 0.0);
    for (r, &row) in indices.iter().enumerate() {
        for (c, &col) in indices.iter().enumerate() {
            trace += target[[r, c]].conj() * full[[row, col]];
        }
    }
    trace.norm() / indices.len() as f64
}

/// The net reduced-CN unitary on the ordered basis `{a dn, a up, b dn, b up}`
/// after the `(-1)^m` global phase is removed: identity on the no-op level,
/// `i e^{+-i phi} (-1)^{k-m}` swap on the flip level.
pub fn cn_target_unitary(k: usize, m: usize, phase: f64) -> Array2<Complex64> {
    let sign = if (k + m).is_multiple_of(2) { 1.0 } else { -1.0 };
    let swap_up = c64(0.0, sign) * c64(0.0, phase).exp(); // row b-dn, col b-up
    let swap_dn = c64(0.0, sign) * c64(0.0, -phase).exp(); // row b-up, col b-dn
    let mut t = Array2::zeros((4, 4));
    t[[0, 0]] = c64(1.0, 0.0);
    t[[1, 1]] = c64(1.0, 0.0);
    t[[2, 3]] = swap_up;
    t[[3, 2]] = swap_dn;
    t
}

/// Outcome of comparing a simulated reduced-CN schedule against the net
/// gate unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct GateUnitaryReport {
    /// The simulated gate restricted to `{0dn, 0up, 1dn, 1up}`, as driven
    /// (global phase included).
    pub unitary: Array2<Complex64>,
    /// Entrywise `max |U - target|` after removing the `(-1)^m` global phase.
    pub max_deviation: f64,
    pub passed: bool,
    pub report: FidelityReport,
}

/// Verify a single-ion reduced-CN schedule against the net gate unitary for
/// `(k, m, phase)`: removes the `(-1)^m` global phase, reports the entrywise
/// maximum deviation on the `{0dn, 0up, 1dn, 1up}` subspace and the
/// (phase-invariant) fidelity.
pub fn verify_net_unitary(
    schedule: &Schedule,
    k: usize,
    m: usize,
    phase: f64,
    tol: f64,
) -> Result<GateUnitaryReport> {
    let space = schedule.space();
    if space.n_ions() != 1 || space.fock_cutoff() < 2 {
        return Err(Error::InvalidSchedule(
            "net-unitary verification needs one ion and at least two Fock levels".into(),
        ));
    }
    let indices = [
        space.index_of(0, 0),
        space.index_of(0, 1),
        space.index_of(1, 0),
        space.index_of(1, 1),
    ];
    let u = schedule.propagator(PropagationMethod::Rwa)?;
    let target = cn_target_unitary(k, m, phase);
    let global = if m.is_multiple_of(2) { 1.0 } else { -1.0 };

    let mut unitary = Array2::zeros((4, 4));
    let mut max_deviation = 0.0f64;
    for (r, &row) in indices.iter().enumerate() {
        for (c, &col) in indices.iter().enumerate() {
            let got = u.matrix()[[row, col]];
            unitary[[r, c]] = got;
            max_deviation = max_deviation.max((got * global - target[[r, c]]).norm());
        }
    }
    let fidelity = subspace_fidelity(&target, u.matrix(), &indices);
    Ok(GateUnitaryReport {
        unitary,
        max_deviation,
        passed: max_deviation <= tol,
        report: FidelityReport {
            fidelity,
            infidelity: 1.0 - fidelity,
            target_name: format!("reduced-cn(k={k}, m={m}, phi={phase})"),
        },
    })
}

/// One point of a Lamb-Dicke sensitivity scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaSensitivityPoint {
    pub delta_eta: f64,
    pub infidelity: f64,
}

/// Gate infidelity versus Lamb-Dicke error: for each perturbation the pulse
/// duration stays fixed at the unperturbed operating point while the Rabi
/// frequencies come from `eta + delta`, and the result is compared against
/// the ideal net unitary.
pub fn eta_sensitivity(
    entry: &MagicEntry,
    delta_etas: &[f64],
    ctx: &CouplingContext,
) -> Result<Vec<EtaSensitivityPoint>> {
    let fock_cutoff = entry.n_a().max(entry.n_b()) + 1;
    let space = JointSpace::new(1, fock_cutoff)?;
    let indices = [
        space.index_of(entry.n_a(), 0),
        space.index_of(entry.n_a(), 1),
        space.index_of(entry.n_b(), 0),
        space.index_of(entry.n_b(), 1),
    ];
    let target = cn_target_unitary(entry.k(), entry.m(), 0.0);
    let eta0 = entry.eta();

    let mut points = Vec::with_capacity(delta_etas.len());
    for &delta in delta_etas {
        let eta = eta0 + delta;
        Error::check_positive("eta + delta_eta", eta)?;
        // Fixed duration tau, so the area rescales with Omega_00(eta).
        let area = entry.pulse_area_00() * ((eta0 * eta0 - eta * eta) / 2.0).exp();
        let pulse = Pulse::carrier(0, 0.0, area, CouplingContext::new(eta, ctx.g())?)?;
        let u = rwa_propagator(&pulse, &space)?;
        let fidelity = subspace_fidelity(&target, u.matrix(), &indices);
        points.push(EtaSensitivityPoint { delta_eta: delta, infidelity: 1.0 - fidelity });
    }
    Ok(points)
}

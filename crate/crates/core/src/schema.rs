//! Serialized document formats shared by the library and the command-line
//! front end. Documents are JSON with a top-level `schema` version tag so
//! golden files survive format evolution.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::CouplingContext;
use crate::dynamics::{JointSpace, Pulse};
use crate::error::{Error, Result};
use crate::sequence::Schedule;

/// Version tag carried by every structured document.
pub const SCHEMA: &str = "ion-gate-lab/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub n_ions: usize,
    pub fock_cutoff: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PulseDoc {
    pub ion: usize,
    pub sideband_order: i32,
    pub phase_rad: f64,
    pub pulse_area_rad: f64,
    pub eta: f64,
    pub g: f64,
}

/// An ordered pulse schedule over one joint space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub schema: String,
    pub kind: String,
    pub space: SpaceDoc,
    pub pulses: Vec<PulseDoc>,
}

impl ScheduleDoc {
    pub fn from_schedule(schedule: &Schedule) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            kind: "schedule".to_string(),
            space: SpaceDoc {
                n_ions: schedule.space().n_ions(),
                fock_cutoff: schedule.space().fock_cutoff(),
            },
            pulses: schedule
                .pulses()
                .iter()
                .map(|p| PulseDoc {
                    ion: p.target_ion(),
                    sideband_order: p.sideband_order(),
                    phase_rad: p.phase(),
                    pulse_area_rad: p.pulse_area(),
                    eta: p.ctx().eta(),
                    g: p.ctx().g(),
                })
                .collect(),
        }
    }

    pub fn to_schedule(&self) -> Result<Schedule> {
        if self.schema != SCHEMA {
            return Err(Error::InvalidSchedule(format!(
                "unsupported schema {:?}, expected {SCHEMA:?}",
                self.schema
            )));
        }
        if self.kind != "schedule" {
            return Err(Error::InvalidSchedule(format!(
                "unsupported document kind {:?}",
                self.kind
            )));
        }
        let space = JointSpace::new(self.space.n_ions, self.space.fock_cutoff)?;
        let pulses = self
            .pulses
            .iter()
            .map(|p| {
                let ctx = CouplingContext::new(p.eta, p.g)?;
                Pulse::new(p.ion, p.sideband_order, p.phase_rad, p.pulse_area_rad, ctx)
            })
            .collect::<Result<Vec<_>>>()?;
        Schedule::new(pulses, space)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule documents serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidSchedule(format!("malformed schedule document: {e}")))
    }
}

/// Row-major list-of-lists of `[re, im]` pairs, the wire form of every
/// complex matrix.
pub fn matrix_to_pairs(m: &Array2<Complex64>) -> Vec<Vec<[f64; 2]>> {
    m.rows()
        .into_iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

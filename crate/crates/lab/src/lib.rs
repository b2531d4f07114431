//! Experiment harness for inviscid-limit studies: JSON configuration, the
//! initial-data library, viscosity-ladder orchestration, CSV/JSON reports,
//! SVG plots and on-disk storage of trajectories and flow ensembles.

pub mod config;
pub mod datum;
pub mod error;
pub mod ladder;
pub mod plot;
pub mod report;
pub mod serfati;
pub mod store;

pub use config::{Checks, DatumSpec, Domain, Exponent, LadderConfig};
pub use datum::{initial_datum, Datum};
pub use error::{LabError, Result};
pub use ladder::{run_ladder, run_ladder_with_threads};
pub use report::{emit_report, ConvergenceReport, Row, Summary};
pub use serfati::{run_serfati, SerfatiReport};

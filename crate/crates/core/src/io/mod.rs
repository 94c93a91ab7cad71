//! File formats: sectioned key/value text for inputs and reports, CSV for
//! tables, and the binary time-tag stream (see [`crate::sim::timetag`]).

pub mod measurement;
pub mod report;
pub mod simfile;
pub mod table;
pub mod text;

pub use measurement::MeasurementFile;
pub use simfile::{parse_sim_config, write_sim_config};
pub use table::{fmt_sig, Cell, Table};
pub use text::{Document, Reader, TextError};

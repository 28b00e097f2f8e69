pub mod augment;
pub mod batch;
pub mod bench;
pub mod cost;
pub mod rir;

use std::io::Write;

use crate::error::{CliError, Result};

pub(crate) fn emit(out: &mut impl Write, text: impl std::fmt::Display) -> Result<()> {
    writeln!(out, "{text}").map_err(|e| CliError::io("writing output", e))
}

pub(crate) fn emit_json(out: &mut impl Write, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    emit(out, text)
}

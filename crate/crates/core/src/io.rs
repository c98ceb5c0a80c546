//! JSON file formats.
//!
//! * value table: `{"n": 2, "values": [0, 0.5, 0.5, 1]}`
//! * sample space: `{"n": 2, "instances": [{"weight": 1, "values": [..]}]}`
//! * partition: `{"n": 3, "blocks": [[0, 1], [2]]}`
//!
//! Parse errors carry the line and column reported by `serde_json`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::sample_space::SampleSpace;
use crate::separability::Partition;
use crate::subset::ValueTable;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Input {
    Table(ValueTable),
    SampleSpace(SampleSpace),
}

impl Input {
    pub fn n(&self) -> usize {
        match self {
            Input::Table(t) => t.n(),
            Input::SampleSpace(s) => s.n(),
        }
    }
}

pub fn parse<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    Ok(serde_json::from_slice(bytes)?)
}

/// A value table or a sample space, told apart by the `instances` key.
pub fn parse_input(bytes: &[u8]) -> Result<Input> {
    let probe: serde_json::Value = serde_json::from_slice(bytes)?;
    if probe.get("instances").is_some() {
        Ok(Input::SampleSpace(parse(bytes)?))
    } else {
        Ok(Input::Table(parse(bytes)?))
    }
}

pub fn read_table(path: &Path) -> Result<ValueTable> {
    parse(&fs::read(path)?)
}

pub fn read_partition(path: &Path) -> Result<Partition> {
    parse(&fs::read(path)?)
}

pub fn read_input(path: &Path) -> Result<Input> {
    parse_input(&fs::read(path)?)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?).map_err(Error::from)
}

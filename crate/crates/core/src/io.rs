//! JSON file formats for channels, designs and gates.
//!
//! Complex numbers are `[re, im]`; matrices are row-major nested arrays of
//! such pairs.
//!
//! ```text
//! channel: { "dim": d, "kraus": [matrix, ...] }
//! design:  { "dim": d, "weights": [c_r, ...], "states": [[[re, im], ...], ...] }
//! gate:    { "dim": d, "matrix": matrix }   (a bare matrix is accepted too)
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::designs::StateDesign;
use crate::error::{Error, Result};
use crate::tensor::{deserialize_vector, serialize_vector, ComplexMatrix, PureState, C64};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim: usize,
    pub kraus: Vec<ComplexMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StateEntry(
    #[serde(serialize_with = "serialize_vector", deserialize_with = "deserialize_vector")] Vec<C64>,
);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignFile {
    pub dim: usize,
    pub weights: Vec<f64>,
    states: Vec<StateEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateFile {
    pub dim: usize,
    pub matrix: ComplexMatrix,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GateInput {
    Tagged(GateFile),
    Bare(ComplexMatrix),
}

impl From<&KrausChannel> for ChannelFile {
    fn from(channel: &KrausChannel) -> Self {
        Self {
            dim: channel.dim(),
            kraus: channel.kraus_ops().to_vec(),
        }
    }
}

impl ChannelFile {
    pub fn into_channel(self, tp_tol: f64) -> Result<KrausChannel> {
        if let Some(k) = self.kraus.iter().find(|k| k.rows() != self.dim || k.cols() != self.dim) {
            return Err(Error::dims(
                format!("{0}x{0}", self.dim),
                format!("{}x{}", k.rows(), k.cols()),
            ));
        }
        KrausChannel::with_tolerance(self.kraus, tp_tol)
    }
}

impl From<&StateDesign> for DesignFile {
    fn from(design: &StateDesign) -> Self {
        Self {
            dim: design.dim(),
            weights: design.weights().to_vec(),
            states: design
                .states()
                .iter()
                .map(|s| StateEntry(s.amplitudes().to_vec()))
                .collect(),
        }
    }
}

impl DesignFile {
    pub fn into_design(self, source: impl Into<String>) -> Result<StateDesign> {
        let states = self
            .states
            .into_iter()
            .map(|StateEntry(amps)| {
                if amps.len() != self.dim {
                    Err(Error::dims(self.dim, amps.len()))
                } else {
                    PureState::new(amps)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        StateDesign::new(self.weights, states, source)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Writes pretty JSON followed by a newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = to_json(value);
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable value")
}

/// Loads a channel, rejecting trace-preservation residuals above `tp_tol`.
pub fn load_channel(path: &Path, tp_tol: f64) -> Result<KrausChannel> {
    let file: ChannelFile = parse(path, &read(path)?)?;
    file.into_channel(tp_tol)
}

pub fn save_channel(path: &Path, channel: &KrausChannel) -> Result<()> {
    write_json(path, &ChannelFile::from(channel))
}

pub fn load_design(path: &Path) -> Result<StateDesign> {
    let file: DesignFile = parse(path, &read(path)?)?;
    file.into_design(format!("file:{}", path.display()))
}

pub fn save_design(path: &Path, design: &StateDesign) -> Result<()> {
    write_json(path, &DesignFile::from(design))
}

pub fn load_gate(path: &Path) -> Result<ComplexMatrix> {
    let input: GateInput = parse(path, &read(path)?)?;
    match input {
        GateInput::Tagged(g) => {
            if g.matrix.rows() != g.dim || g.matrix.cols() != g.dim {
                return Err(Error::dims(
                    format!("{0}x{0}", g.dim),
                    format!("{}x{}", g.matrix.rows(), g.matrix.cols()),
                ));
            }
            Ok(g.matrix)
        }
        GateInput::Bare(m) => Ok(m),
    }
}

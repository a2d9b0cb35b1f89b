use std::fmt;
use std::str::FromStr;

use crate::aggregate::Aggregator;
use crate::error::{Error, Result};
use crate::numeric::Elementwise;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
}

impl Activation {
    pub fn elementwise(self) -> Elementwise {
        match self {
            Activation::Relu => Elementwise::Relu,
            Activation::Sigmoid => Elementwise::Sigmoid,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReadoutKind {
    /// Each persona block scaled by the node's membership in that persona.
    Conditioned,
    Plain,
}

impl ReadoutKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ReadoutKind::Conditioned => "conditioned",
            ReadoutKind::Plain => "plain",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    PersonaSage,
    GraphSage,
    /// The persona network forced to a single persona.
    PersonaSageK1,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::PersonaSage => "personasage",
            ModelKind::GraphSage => "graphsage",
            ModelKind::PersonaSageK1 => "personasage-k1",
        }
    }
}

macro_rules! text_enum {
    ($t:ty, $what:literal, $($name:literal => $v:expr),+) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $t {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($v),)+
                    other => Err(Error::invalid(format!(
                        concat!("unknown ", $what, " {:?} (expected ", $($name, " ",)+ ")"),
                        other
                    ))),
                }
            }
        }
    };
}

text_enum!(Activation, "activation", "relu" => Activation::Relu, "sigmoid" => Activation::Sigmoid);
text_enum!(ReadoutKind, "readout", "conditioned" => ReadoutKind::Conditioned, "plain" => ReadoutKind::Plain);
text_enum!(
    ModelKind,
    "model",
    "personasage" => ModelKind::PersonaSage,
    "graphsage" => ModelKind::GraphSage,
    "personasage-k1" => ModelKind::PersonaSageK1
);

/// Shape and behaviour of the persona network.
#[derive(Clone, Debug, PartialEq)]
pub struct PersonaConfig {
    pub k: usize,
    pub layers: usize,
    /// Width of every hidden layer, per persona.
    pub hidden_dim: usize,
    /// Width of the final layer, per persona.
    pub out_dim: usize,
    pub aggregator: Aggregator,
    /// Used between layers; the last layer is linear.
    pub activation: Activation,
    pub readout: ReadoutKind,
}

impl Default for PersonaConfig {
    fn default() -> Self {
        Self {
            k: 1,
            layers: 2,
            hidden_dim: 128,
            out_dim: 10,
            aggregator: Aggregator::Mean,
            activation: Activation::Relu,
            readout: ReadoutKind::Conditioned,
        }
    }
}

impl PersonaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("K must be at least 1"));
        }
        if self.hidden_dim == 0 || self.out_dim == 0 {
            return Err(Error::invalid("layer widths must be at least 1"));
        }
        Ok(())
    }

    /// `[in, hidden, ..., hidden, out]`, `layers + 1` entries.
    pub fn layer_dims(&self, in_dim: usize) -> Vec<usize> {
        let mut dims = vec![in_dim];
        for l in 0..self.layers {
            dims.push(if l + 1 == self.layers { self.out_dim } else { self.hidden_dim });
        }
        dims
    }
}

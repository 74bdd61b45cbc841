//! Ruin analytics for spectrally positive Lévy risk models perturbed by
//! Brownian motion: scale functions, penalty functions over ruin and the
//! records that follow it, capital injection values, and a Monte Carlo
//! oracle for all of them.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod edpf;
pub mod edvci;
pub mod error;
pub mod grid;
pub mod mc;
pub mod measure;
pub mod model;
pub mod quad;
pub mod scale;
pub mod tilt;
pub mod validation;

pub use edpf::{Analysis, ExtendedEdpf, OvershootLaw, Penalty, PenaltySpec, Subsequent, TailRule};
pub use edvci::{edvci_value, EdvciReport};
pub use error::{Error, Result};
pub use grid::{geometric_convolution_series, Grid, GridCurve, GridFunction, SeriesSum};
pub use measure::LevyMeasure;
pub use model::LevyModel;
pub use scale::ScaleFunctions;
pub use tilt::{tilt_model, TiltedModel};

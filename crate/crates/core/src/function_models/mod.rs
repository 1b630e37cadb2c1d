//! Test functions: max/min combinations of affine-plus-quadratic pieces, the
//! one-dimensional sawtooth, and a callback wrapper for anything else.

mod io;
mod model;
mod objective;
mod sawtooth;

pub use io::{load_model, model_from_json, model_to_json, ModelDoc, PieceDoc};
pub use model::{ph2_from_matrix_set, symmetrize, MaxMinQuadModel, QuadPiece, TIE_TOL};
pub use objective::{FnObjective, Objective};
pub use sawtooth::{sawtooth_example, PiecewiseLinear1D, Sawtooth, DEFAULT_SAWTOOTH_DEPTH};

//! Upscaling of Landau-Lifshitz dynamics with a rapidly oscillating exchange coefficient.

pub mod cell;
pub mod coefficient;
pub mod corrector;
pub mod error;
pub mod grid;
pub mod harness;
pub mod homogenized;
pub mod kernels;
pub mod linalg;
pub mod macro_field;
pub mod micro;
pub mod operator;
pub mod snapshot;
pub mod upscaling;

pub use cell::{compute_ah, solve_cell, solve_cell_commensurate, CellSolution, TensorEstimate};
pub use coefficient::{CellCoefficient, Coefficient};
pub use error::{Error, Result};
pub use grid::{PeriodicGrid, ScalarField, VectorField};
pub use kernels::{Kernel, KernelFamily, KernelSpec};
pub use macro_field::{Jet, MacroField, PointDerivatives};
pub use micro::{LLState, Observer, Restriction, Scheme, StepControl};
pub use operator::{DiffusionOperator, ExchangeOperator, HomogenizedOperator, HomogenizedTensor};
pub use upscaling::{
    upscale, upscale_all, AveragingWindow, MicroRunSpec, Model, ReferenceTensor, RunParams,
    UpscalingReport, WindowCheck, WindowSpec,
};

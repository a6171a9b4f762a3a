//! Shared setup for the criterion benches.

use llhmm::{
    CellCoefficient, Coefficient, DiffusionOperator, LLState, MacroField, PeriodicGrid, VectorField,
};

/// Micro operator for the 1D or 2D test coefficient with `ppp` points per period.
pub fn micro_operator(dim: usize, periods: usize, ppp: usize) -> DiffusionOperator {
    let cell = if dim == 1 {
        CellCoefficient::paper_1d()
    } else {
        CellCoefficient::paper_2d()
    };
    let grid = PeriodicGrid::unit_cell(dim, periods * ppp).expect("valid grid");
    let coef = Coefficient::new(cell, 1.0 / periods as f64).expect("valid coefficient");
    DiffusionOperator::new(grid, &coef).expect("resolved grid")
}

/// Smooth unit initial state on `grid`.
pub fn initial_state(grid: PeriodicGrid, alpha: f64) -> LLState {
    let field = if grid.dim() == 1 {
        MacroField::Helix
    } else {
        MacroField::Wave2d
    };
    let mut m = VectorField::from_fn(grid, |x| field.value(x));
    m.normalize();
    LLState::new(m, alpha).expect("unit field")
}

use nalgebra::DMatrix;

use crate::error::{check_finite, check_len, Error, Result};

/// Supervised samples: inputs `(θ̇, θ, θ̇, θ̈)` (rows × 4n) and targets `θ_m`
/// (rows × n).
#[derive(Clone, Debug, PartialEq)]
pub struct TrainBatch {
    pub inputs: DMatrix<f64>,
    pub targets: DMatrix<f64>,
}

impl TrainBatch {
    pub fn new(inputs: DMatrix<f64>, targets: DMatrix<f64>) -> Result<Self> {
        check_len("batch rows", inputs.nrows(), targets.nrows())?;
        check_len("input width", 4 * targets.ncols(), inputs.ncols())?;
        check_finite("batch inputs", inputs.as_slice())?;
        check_finite("batch targets", targets.as_slice())?;
        Ok(TrainBatch { inputs, targets })
    }

    pub fn n_joints(&self) -> usize {
        self.targets.ncols()
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn select(&self, rows: &[usize]) -> TrainBatch {
        TrainBatch {
            inputs: self.inputs.select_rows(rows),
            targets: self.targets.select_rows(rows),
        }
    }

    /// Stacks batches row-wise.
    pub fn concat(parts: &[TrainBatch]) -> Result<TrainBatch> {
        let first = parts.first().ok_or(Error::Empty("batch list"))?;
        let (ci, ct) = (first.inputs.ncols(), first.targets.ncols());
        let rows: usize = parts.iter().map(TrainBatch::len).sum();
        let mut inputs = DMatrix::zeros(rows, ci);
        let mut targets = DMatrix::zeros(rows, ct);
        let mut r = 0;
        for p in parts {
            check_len("input width", ci, p.inputs.ncols())?;
            check_len("target width", ct, p.targets.ncols())?;
            inputs.rows_mut(r, p.len()).copy_from(&p.inputs);
            targets.rows_mut(r, p.len()).copy_from(&p.targets);
            r += p.len();
        }
        Ok(TrainBatch { inputs, targets })
    }
}

//! The robust-PCA objective `f(X, Y) = ½‖X + Y − M‖²_F + R_X(X) + R_Y(Y)`.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::oracles::{regularizer_value, Regularizer};

/// One of the two blocks of the decision variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    X,
    Y,
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub m_data: DenseMatrix,
    pub reg_x: Regularizer,
    pub reg_y: Regularizer,
    /// Strong convexity of the loss.
    pub alpha: f64,
    /// Smoothness of the loss.
    pub beta: f64,
}

impl ProblemSpec {
    /// Least-squares loss, so `alpha = beta = 1`.
    pub fn new(m_data: DenseMatrix, reg_x: Regularizer, reg_y: Regularizer) -> Result<Self> {
        reg_x.validate()?;
        reg_y.validate()?;
        Ok(Self {
            m_data,
            reg_x,
            reg_y,
            alpha: 1.0,
            beta: 1.0,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.m_data.shape()
    }

    pub fn reg(&self, block: Block) -> &Regularizer {
        match block {
            Block::X => &self.reg_x,
            Block::Y => &self.reg_y,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.reg_x.validate()?;
        self.reg_y.validate()?;
        if !(self.alpha > 0.0 && self.beta > 0.0 && self.alpha <= self.beta) {
            return Err(Error::InvalidConstants("need 0 < alpha <= beta"));
        }
        if self.alpha != 1.0 || self.beta != 1.0 {
            return Err(Error::Unsupported("the least-squares loss has alpha = beta = 1"));
        }
        Ok(())
    }

    /// `½‖z − M‖²_F`.
    pub fn loss(&self, z: &DenseMatrix) -> f64 {
        0.5 * self
            .m_data
            .as_slice()
            .iter()
            .zip(z.as_slice())
            .map(|(m, z)| (z - m) * (z - m))
            .sum::<f64>()
    }

    /// `∇g(z) = z − M`.
    pub fn gradient(&self, z: &DenseMatrix) -> DenseMatrix {
        z.zip_map(&self.m_data, |z, m| z - m)
    }
}

/// `f(x, y)`; `+∞` when an indicator is violated.
pub fn objective(problem: &ProblemSpec, x: &DenseMatrix, y: &DenseMatrix) -> Result<f64> {
    problem.m_data.check_same_shape(x)?;
    problem.m_data.check_same_shape(y)?;
    let rx = regularizer_value(&problem.reg_x, x)?;
    let ry = regularizer_value(&problem.reg_y, y)?;
    if rx.is_infinite() || ry.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(problem.loss(&x.add(y)) + rx + ry)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn balls() -> (Regularizer, Regularizer) {
        (
            Regularizer::NuclearBall { tau: 1.0, rank_cap: None },
            Regularizer::L1Ball { s: 1.0 },
        )
    }

    #[test]
    fn objective_examples() {
        let (rx, ry) = balls();
        let p = ProblemSpec::new(DenseMatrix::zeros(2, 2), rx, ry).unwrap();
        let z = DenseMatrix::zeros(2, 2);
        assert_eq!(objective(&p, &z, &z).unwrap(), 0.0);

        let p = ProblemSpec::new(DenseMatrix::new(1, 1, vec![2.0]).unwrap(), rx, ry).unwrap();
        let one = DenseMatrix::new(1, 1, vec![1.0]).unwrap();
        assert_eq!(objective(&p, &one, &one).unwrap(), 0.0);

        let big = DenseMatrix::new(1, 1, vec![3.0]).unwrap();
        assert_eq!(objective(&p, &big, &one).unwrap(), f64::INFINITY);
    }

    #[test]
    fn gradient_is_residual() {
        let (rx, ry) = balls();
        let m = DenseMatrix::new(1, 2, vec![1.0, -2.0]).unwrap();
        let p = ProblemSpec::new(m, rx, ry).unwrap();
        let z = DenseMatrix::new(1, 2, vec![0.5, 0.5]).unwrap();
        assert_eq!(p.gradient(&z).as_slice(), &[-0.5, 2.5]);
        assert_eq!(p.loss(&z), 0.5 * (0.25 + 6.25));
    }
}

//! Systematic Reed-Solomon-equivalent code by Lagrange evaluation.
//!
//! A column of `k` information symbols is read as the values of the unique
//! polynomial of degree `< k` at the points `0, 1, .., k-1`; parity symbols are
//! its values at `k, .., n-1`. Any `k` coordinates determine the polynomial,
//! so any `k` surviving coordinates recover every other one.

use super::gf::GaloisField;

/// Barycentric evaluation of the interpolant through a fixed set of points.
pub struct Interpolator<'f> {
    field: &'f GaloisField,
    points: Vec<u32>,
    /// `log(1 / prod_{m != j} (x_j - x_m))`.
    weight_logs: Vec<u32>,
}

impl<'f> Interpolator<'f> {
    /// `points` must be distinct field elements.
    pub fn new(field: &'f GaloisField, points: Vec<u32>) -> Self {
        let order = field.order();
        let weight_logs = points
            .iter()
            .enumerate()
            .map(|(j, &xj)| {
                let sum: u64 = points
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != j)
                    .map(|(_, &xm)| u64::from(field.log(xj ^ xm)))
                    .sum();
                (order - (sum % u64::from(order)) as u32) % order
            })
            .collect();
        Self {
            field,
            points,
            weight_logs,
        }
    }

    pub fn points(&self) -> &[u32] {
        &self.points
    }

    /// Row `r` with `p(target) = sum_j r_j y_j` for any values `y` at the points.
    pub fn row(&self, target: u32) -> EvalRow {
        if let Some(j) = self.points.iter().position(|&x| x == target) {
            return EvalRow::Known(j);
        }
        let order = u64::from(self.field.order());
        let f = self.field;
        // log of prod_m (target - x_m)
        let node_log: u64 = self.points.iter().map(|&x| u64::from(f.log(target ^ x))).sum();
        let logs = self
            .points
            .iter()
            .zip(&self.weight_logs)
            .map(|(&xj, &wj)| {
                let l = node_log + u64::from(wj) + order - u64::from(f.log(target ^ xj));
                (l % order) as u32
            })
            .collect();
        EvalRow::Combine(logs)
    }

    /// `p(target)` given the values at the interpolation points.
    pub fn evaluate(&self, row: &EvalRow, values: &[u32]) -> u32 {
        debug_assert_eq!(values.len(), self.points.len());
        match row {
            EvalRow::Known(j) => values[*j],
            EvalRow::Combine(logs) => logs.iter().zip(values).fold(0u32, |acc, (&lc, &y)| {
                if y == 0 {
                    acc
                } else {
                    acc ^ self.field.exp(lc + self.field.log(y))
                }
            }),
        }
    }
}

/// Evaluation coefficients for one target, stored as discrete logs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalRow {
    /// The target is interpolation point `j`.
    Known(usize),
    Combine(Vec<u32>),
}

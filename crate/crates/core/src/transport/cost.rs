use ndarray::Array2;

use crate::distribution::{DiscreteDistribution, Support};
use crate::error::{Error, Result};

/// Ground-cost matrix between the supports of two distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    entries: Array2<f64>,
    order: u32,
}

impl CostMatrix {
    /// Wraps a precomputed matrix. Entries must be finite and non-negative.
    pub fn from_entries(entries: Array2<f64>, order: u32) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidParameter("cost order p must be >= 1".into()));
        }
        if entries.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("cost matrix"));
        }
        if entries.iter().any(|c| *c < 0.0) {
            return Err(Error::InvalidParameter("negative cost entry".into()));
        }
        Ok(Self { entries, order })
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<f64> {
        self.entries
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn dim(&self) -> (usize, usize) {
        self.entries.dim()
    }
}

/// `entries[i][j] = ||x_i^a - x_j^b||_p^p`, or a table lookup for symbolic
/// supports (the table already holds the dissimilarity; `p` is not applied).
pub fn cost_matrix(a: &DiscreteDistribution, b: &DiscreteDistribution, p: u32) -> Result<CostMatrix> {
    if p < 1 {
        return Err(Error::InvalidParameter("cost order p must be >= 1".into()));
    }
    let entries = match (a.support(), b.support()) {
        (Support::Vectors(xa), Support::Vectors(xb)) => {
            if xa.ncols() != xb.ncols() {
                return Err(Error::DimensionMismatch {
                    expected: xa.ncols(),
                    found: xb.ncols(),
                });
            }
            let mut c = Array2::zeros((xa.nrows(), xb.nrows()));
            for (i, ra) in xa.rows().into_iter().enumerate() {
                for (j, rb) in xb.rows().into_iter().enumerate() {
                    c[[i, j]] = ra
                        .iter()
                        .zip(rb.iter())
                        .map(|(u, v)| powi_abs(u - v, p))
                        .sum();
                }
            }
            c
        }
        (
            Support::Symbolic { table: ta, indices: ia },
            Support::Symbolic { table: tb, indices: ib },
        ) => {
            if ta.id() != tb.id() || ta.len() != tb.len() {
                return Err(Error::TableMismatch);
            }
            Array2::from_shape_fn((ia.len(), ib.len()), |(i, j)| ta.cost(ia[i], ib[j]))
        }
        _ => return Err(Error::TableMismatch),
    };
    CostMatrix::from_entries(entries, p)
}

#[inline]
fn powi_abs(v: f64, p: u32) -> f64 {
    match p {
        1 => v.abs(),
        2 => v * v,
        _ => v.abs().powi(p as i32),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn dist(w: Vec<f64>, x: Array2<f64>) -> DiscreteDistribution {
        DiscreteDistribution::new(w, x).unwrap()
    }

    #[test]
    fn zero_diagonal_on_self() {
        let a = dist(vec![0.2, 0.3, 0.5], array![[0.0, 1.0], [2.0, -1.0], [0.5, 0.5]]);
        let c = cost_matrix(&a, &a, 2).unwrap();
        for i in 0..3 {
            assert_eq!(c.entries()[[i, i]], 0.0);
            for j in 0..3 {
                assert_eq!(c.entries()[[i, j]], c.entries()[[j, i]]);
            }
        }
    }

    #[test]
    fn one_dimensional_point_masses() {
        let a = DiscreteDistribution::point_mass(&[0.0]).unwrap();
        let b = DiscreteDistribution::point_mass(&[3.0]).unwrap();
        assert_eq!(cost_matrix(&a, &b, 2).unwrap().entries()[[0, 0]], 9.0);
        assert_eq!(cost_matrix(&a, &b, 1).unwrap().entries()[[0, 0]], 3.0);
    }

    #[test]
    fn two_dimensional_column() {
        let a = dist(vec![0.5, 0.5], array![[0.0, 0.0], [1.0, 1.0]]);
        let b = DiscreteDistribution::point_mass(&[1.0, 0.0]).unwrap();
        let c = cost_matrix(&a, &b, 2).unwrap();
        assert_eq!(c.entries(), &array![[1.0], [1.0]]);
    }

    #[test]
    fn errors() {
        let a = DiscreteDistribution::point_mass(&[0.0]).unwrap();
        let b = DiscreteDistribution::point_mass(&[0.0, 1.0]).unwrap();
        assert!(matches!(
            cost_matrix(&a, &b, 2),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(cost_matrix(&a, &a, 0), Err(Error::InvalidParameter(_))));
    }
}

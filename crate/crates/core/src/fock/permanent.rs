use alloc::vec;

use num_traits::Num;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Requests beyond this size are rejected rather than left to run for minutes.
pub const MAX_PERMANENT_SIZE: usize = 12;

/// Matrix permanent by Ryser's inclusion–exclusion formula, visiting column
/// subsets in Gray-code order so each step updates the row sums with a single
/// column. `O(2^n n)`.
pub fn permanent<T>(m: &Matrix<T>) -> Result<T>
where
    T: Copy + Num,
{
    let n = m.rows();
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    if n > MAX_PERMANENT_SIZE {
        return Err(Error::PermanentTooLarge(n));
    }

    let mut row_sums = vec![T::zero(); n];
    let mut in_subset = vec![false; n];
    let mut subset_size = 0usize;
    let mut total = T::zero();

    for k in 1u32..(1u32 << n) {
        let col = k.trailing_zeros() as usize;
        in_subset[col] = !in_subset[col];
        if in_subset[col] {
            subset_size += 1;
            for (r, s) in row_sums.iter_mut().enumerate() {
                *s = *s + m[(r, col)];
            }
        } else {
            subset_size -= 1;
            for (r, s) in row_sums.iter_mut().enumerate() {
                *s = *s - m[(r, col)];
            }
        }
        let prod = row_sums.iter().fold(T::one(), |acc, &s| acc * s);
        // sign (-1)^(n - |S|)
        if (n - subset_size) % 2 == 0 {
            total = total + prod;
        } else {
            total = total - prod;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::CMatrix;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_is_one() {
        let p = permanent(&CMatrix::identity(2)).unwrap();
        assert!((p - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn two_by_two_definition() {
        let (a, b, cc, d) = (c(1.0, 2.0), c(-0.5, 0.3), c(0.2, -1.0), c(3.0, 0.5));
        let m = CMatrix::from_rows(&[[a, b], [cc, d]]).unwrap();
        let p = permanent(&m).unwrap();
        assert!((p - (a * d + b * cc)).norm() < 1e-14);
    }

    #[test]
    fn all_ones_is_factorial() {
        let ones3 = Matrix::<f64>::from_fn(3, 3, |_, _| 1.0);
        assert_eq!(permanent(&ones3).unwrap(), 6.0);
        let ones5 = Matrix::<f64>::from_fn(5, 5, |_, _| 1.0);
        assert_eq!(permanent(&ones5).unwrap(), 120.0);
    }

    #[test]
    fn one_by_one() {
        let m = Matrix::from_rows(&[[c(0.0, 2.0)]]).unwrap();
        assert_eq!(permanent(&m).unwrap(), c(0.0, 2.0));
    }

    #[test]
    fn contract_violations() {
        let rect = Matrix::<f64>::zeros(2, 3);
        assert_eq!(
            permanent(&rect),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        );
        let big = Matrix::<f64>::identity(13);
        assert_eq!(permanent(&big), Err(Error::PermanentTooLarge(13)));
        let empty = Matrix::<f64>::zeros(0, 0);
        assert_eq!(permanent(&empty), Err(Error::EmptyMatrix));
    }

    #[test]
    fn largest_supported_size_runs() {
        let ones = Matrix::<f64>::from_fn(12, 12, |_, _| 1.0);
        assert_eq!(permanent(&ones).unwrap(), 479_001_600.0);
    }
}

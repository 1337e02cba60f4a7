use super::{gq_is_zero, gq_one, Gq};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Rank of a matrix given by rows, by exact Gaussian elimination.
pub fn exact_rank(rows: &[Vec<Gq>]) -> usize {
    let mut m: Vec<Vec<Gq>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..m.len()).find(|&r| !gq_is_zero(&m[r][col])) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = gq_one() / m[rank][col].clone();
        for r in 0..m.len() {
            if r != rank && !gq_is_zero(&m[r][col]) {
                let factor = &m[r][col] * &inv;
                for c in col..ncols {
                    let delta = &factor * &m[rank][c];
                    m[r][c] = &m[r][c] - delta;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Numerical rank: singular values above `threshold` times the largest one.
pub fn float_rank(rows: &[Vec<Complex64>], threshold: f64) -> usize {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return 0;
    }
    let m = DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > threshold * smax).count()
}

#[cfg(test)]
mod tests {
    use super::super::gq;
    use super::*;

    #[test]
    fn ranks_agree_on_small_examples() {
        let rows = vec![vec![gq(1, 0), gq(2, 1)], vec![gq(2, 0), gq(4, 2)], vec![gq(0, 1), gq(1, 0)]];
        assert_eq!(exact_rank(&rows), 2);
        assert_eq!(exact_rank(&rows[..2]), 1);
        let f: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(super::super::gq_to_c64).collect())
            .collect();
        assert_eq!(float_rank(&f, 1e-10), 2);
        assert_eq!(float_rank(&f[..2], 1e-10), 1);
    }
}

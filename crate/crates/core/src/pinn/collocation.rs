use ndarray::Array2;
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;

use super::problems::{Face, PdeSpec};
use crate::error::{Error, Result};
use crate::seeding::{rng_for, Stream};

/// Fixed interior and boundary sample points for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationSet {
    /// `n_r x d`, strictly inside the box.
    pub interior: Array2<f64>,
    /// `n_b x d`, each row lying exactly on `boundary_faces[row]`.
    pub boundary: Array2<f64>,
    pub boundary_faces: Vec<Face>,
    pub seed: u64,
}

impl CollocationSet {
    /// Boundary rows lying on any of `faces`.
    pub fn boundary_on(&self, faces: &[Face]) -> Array2<f64> {
        let rows: Vec<usize> = (0..self.boundary_faces.len()).filter(|&i| faces.contains(&self.boundary_faces[i])).collect();
        self.boundary.select(ndarray::Axis(0), &rows)
    }
}

/// Uniform interior points, and boundary points spread over the faces that
/// carry conditions. On an interval the two endpoints alternate; in higher
/// dimensions each point picks a face with probability proportional to its
/// measure and is then uniform on it.
pub fn sample_collocation(spec: &PdeSpec, n_r: usize, n_b: usize, seed: u64) -> Result<CollocationSet> {
    spec.domain.validate()?;
    if n_r == 0 || n_b == 0 {
        return Err(Error::invalid("collocation counts must be at least 1"));
    }
    let domain = &spec.domain;
    let d = domain.dim();
    let mut rng = rng_for(seed, Stream::Collocation);

    let mut interior = Array2::zeros((n_r, d));
    for mut row in interior.rows_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            let (lo, hi) = (domain.lower[j], domain.upper[j]);
            *v = loop {
                let s = rng.random_range(lo..hi);
                if s > lo {
                    break s;
                }
            };
        }
    }

    let faces = spec.boundary_faces();
    if faces.is_empty() {
        return Err(Error::invalid(format!("problem {} has no boundary conditions", spec.id)));
    }
    let picks: Vec<Face> = if d == 1 {
        (0..n_b).map(|i| faces[i % faces.len()]).collect()
    } else {
        let weights: Vec<f64> = faces.iter().map(|&f| domain.face_measure(f)).collect();
        let dist = WeightedIndex::new(&weights).map_err(|e| Error::invalid(e.to_string()))?;
        (0..n_b).map(|_| faces[dist.sample(&mut rng)]).collect()
    };
    let mut boundary = Array2::zeros((n_b, d));
    for (mut row, &face) in boundary.rows_mut().into_iter().zip(&picks) {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if j == face.coord {
                domain.face_value(face)
            } else {
                rng.random_range(domain.lower[j]..=domain.upper[j])
            };
        }
    }
    Ok(CollocationSet { interior, boundary, boundary_faces: picks, seed })
}

/// Tensor grid with `per_axis` points per coordinate, endpoints included.
pub fn evaluation_grid(spec: &PdeSpec, per_axis: usize) -> Array2<f64> {
    let d = spec.dim();
    let per_axis = per_axis.max(2);
    let total = per_axis.pow(d as u32);
    let mut grid = Array2::zeros((total, d));
    for (i, mut row) in grid.rows_mut().into_iter().enumerate() {
        let mut rest = i;
        for j in (0..d).rev() {
            let k = rest % per_axis;
            rest /= per_axis;
            let (lo, hi) = (spec.domain.lower[j], spec.domain.upper[j]);
            row[j] = lo + (hi - lo) * k as f64 / (per_axis - 1) as f64;
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pinn::builtin_problem;

    #[test]
    fn interval_boundary_is_both_endpoints() {
        let p = builtin_problem("poisson1d").unwrap();
        let c = sample_collocation(&p, 16, 2, 1).unwrap();
        let mut pts: Vec<f64> = c.boundary.iter().copied().collect();
        pts.sort_by(f64::total_cmp);
        assert_eq!(pts, vec![0.0, 1.0]);
    }

    #[test]
    fn same_seed_same_points() {
        let p = builtin_problem("heat1d").unwrap();
        assert_eq!(sample_collocation(&p, 50, 20, 9).unwrap(), sample_collocation(&p, 50, 20, 9).unwrap());
        assert_ne!(sample_collocation(&p, 50, 20, 9).unwrap(), sample_collocation(&p, 50, 20, 10).unwrap());
    }

    #[test]
    fn unit_square_points_are_placed_correctly() {
        let p = builtin_problem("poisson2d").unwrap();
        let n_b = 4000;
        let c = sample_collocation(&p, 1000, n_b, 3).unwrap();
        assert!(c.interior.rows().into_iter().all(|r| p.domain.contains_strictly(r.as_slice().unwrap())));
        for (row, face) in c.boundary.rows().into_iter().zip(&c.boundary_faces) {
            assert!((row[face.coord] - p.domain.face_value(*face)).abs() <= 1e-12);
        }
        // multinomial with four equal cells
        let expected = n_b as f64 / 4.0;
        let sigma = (n_b as f64 * 0.25 * 0.75).sqrt();
        for face in p.boundary_faces() {
            let count = c.boundary_faces.iter().filter(|&&f| f == face).count() as f64;
            assert!((count - expected).abs() <= 5.0 * sigma, "{face:?}: {count}");
        }
    }

    #[test]
    fn zero_counts_are_rejected() {
        let p = builtin_problem("poisson1d").unwrap();
        assert!(sample_collocation(&p, 0, 2, 0).is_err());
        assert!(sample_collocation(&p, 2, 0, 0).is_err());
    }

    #[test]
    fn grid_covers_corners() {
        let p = builtin_problem("poisson2d").unwrap();
        let g = evaluation_grid(&p, 3);
        assert_eq!(g.nrows(), 9);
        assert_eq!(g.row(0).to_vec(), vec![0.0, 0.0]);
        assert_eq!(g.row(8).to_vec(), vec![1.0, 1.0]);
        assert_eq!(g.row(1).to_vec(), vec![0.0, 0.5]);
    }
}

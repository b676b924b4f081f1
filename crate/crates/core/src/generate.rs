//! Seeded random instances: PSD quadratics, step schedules, start points and
//! Gaussian random walks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::curves::DiscreteCurve;
use crate::point::Point;
use crate::prox::{ProxSchedule, Quadratic};

fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// `½ xᵀAx + bᵀx` with `A = BᵀB/n` for a Gaussian `B` and `b = −Ac`, so the
/// function is bounded below with minimizer `c`. One time in five `B` loses a
/// row and `A` is singular.
pub fn random_psd_quadratic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Quadratic {
    assert!(n >= 1, "dimension must be positive");
    let rows = if n > 1 && rng.random_bool(0.2) { n - 1 } else { n };
    let b: Vec<Vec<f64>> = (0..rows).map(|_| gaussian_vec(rng, n)).collect();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = b.iter().map(|r| r[i] * r[j]).sum::<f64>() / n as f64;
            a[i][j] = s;
            a[j][i] = s;
        }
    }
    let c = gaussian_vec(rng, n);
    let lin: Vec<f64> = a.iter().map(|row| -row.iter().zip(&c).map(|(x, y)| x * y).sum::<f64>()).collect();
    Quadratic::new(a, lin, 0.0).expect("Gram matrices are symmetric PSD")
}

/// `len` steps drawn uniformly from `[0.01, 1]`.
pub fn random_schedule<R: Rng + ?Sized>(len: usize, rng: &mut R) -> ProxSchedule {
    ProxSchedule::Explicit((0..len).map(|_| rng.random_range(0.01..=1.0)).collect())
}

/// Gaussian point with standard deviation `scale` per coordinate.
pub fn random_start<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> Point {
    Point::new(gaussian_vec(rng, n).into_iter().map(|c| scale * c).collect()).expect("finite coordinates")
}

/// `steps` Gaussian increments from the origin.
pub fn random_walk<R: Rng + ?Sized>(n: usize, steps: usize, rng: &mut R) -> DiscreteCurve {
    let mut x = vec![0.0; n];
    let mut points = vec![Point::origin(n)];
    for _ in 0..steps {
        for (c, d) in x.iter_mut().zip(gaussian_vec(rng, n)) {
            *c += d;
        }
        points.push(Point::new(x.clone()).expect("finite coordinates"));
    }
    DiscreteCurve::new(points).expect("nonempty walk")
}

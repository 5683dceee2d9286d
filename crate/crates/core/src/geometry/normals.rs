use std::collections::HashMap;

use nalgebra::{Matrix3, SymmetricEigen};
use rayon::prelude::*;

use super::{AnnotatedCloud, Vec3};
use crate::error::{Error, Result};
use crate::spatial::knn_grid;

/// Neighborhood size used by the pipeline for normals and curvature.
pub const NORMAL_NEIGHBORS: usize = 16;

/// Per-point PCA results.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalGeometry {
    pub normals: Vec<Vec3>,
    /// least eigenvalue / eigenvalue sum, in [0, 1/3]
    pub curvature: Vec<f64>,
}

/// Returns `cloud` with normals and curvature from the covariance of each
/// point's `k` nearest neighbors (the point itself included).
pub fn estimate_normals(cloud: &AnnotatedCloud, k: usize) -> Result<AnnotatedCloud> {
    let geo = local_geometry(&cloud.points, &cloud.object_id, k)?;
    let mut out = cloud.clone();
    out.normals = Some(geo.normals);
    out.curvature = Some(geo.curvature);
    Ok(out)
}

/// Normal direction is the least-eigenvalue eigenvector. Sign: toward +z when
/// the normal has a vertical component above 0.1, otherwise away from the
/// centroid of the point's object.
pub fn local_geometry(points: &[Vec3], object_id: &[u32], k: usize) -> Result<LocalGeometry> {
    if k < 3 {
        return Err(Error::InvalidInput(format!("normal estimation needs k >= 3, got {k}")));
    }
    if points.len() < k {
        return Err(Error::TooFewPoints {
            needed: k,
            got: points.len(),
        });
    }
    if object_id.len() != points.len() {
        return Err(Error::LengthMismatch(points.len(), object_id.len()));
    }

    let mut sums: HashMap<u32, (Vec3, usize)> = HashMap::new();
    for (p, o) in points.iter().zip(object_id) {
        let e = sums.entry(*o).or_insert((Vec3::ZERO, 0));
        e.0 += *p;
        e.1 += 1;
    }
    let centroids: HashMap<u32, Vec3> = sums
        .into_iter()
        .map(|(o, (s, n))| (o, s / n as f64))
        .collect();

    let grid = knn_grid(points);
    let results: Vec<(Vec3, f64)> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let nn = grid.knn(points[i], k);
            let (normal, curvature) = pca_normal(points, &nn);
            let centroid = centroids[&object_id[i]];
            (orient(normal, points[i], centroid), curvature)
        })
        .collect();

    let (normals, curvature) = results.into_iter().unzip();
    Ok(LocalGeometry { normals, curvature })
}

fn pca_normal(points: &[Vec3], nn: &[(u32, f64)]) -> (Vec3, f64) {
    let n = nn.len() as f64;
    let mean = nn
        .iter()
        .fold(Vec3::ZERO, |acc, &(j, _)| acc + points[j as usize])
        / n;
    let mut cov = Matrix3::<f64>::zeros();
    for &(j, _) in nn {
        let d = points[j as usize] - mean;
        let v = nalgebra::Vector3::new(d.x, d.y, d.z);
        cov += v * v.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let (imin, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &l)| if l < acc.1 { (i, l) } else { acc });
    let col = eig.eigenvectors.column(imin);
    let normal = Vec3::new(col[0], col[1], col[2]).try_normalize().unwrap_or(Vec3::UP);
    let total: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0)).sum();
    let curvature = if total > 0.0 {
        eig.eigenvalues[imin].max(0.0) / total
    } else {
        0.0
    };
    (normal, curvature)
}

fn orient(n: Vec3, p: Vec3, object_centroid: Vec3) -> Vec3 {
    let flip = if n.z.abs() > 0.1 {
        n.z < 0.0
    } else {
        n.dot(p - object_centroid) < 0.0
    };
    if flip {
        -n
    } else {
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_mesh_surface, TriMesh};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud_of(points: Vec<Vec3>) -> AnnotatedCloud {
        let n = points.len();
        AnnotatedCloud {
            points,
            colors: vec![[0; 3]; n],
            normals: None,
            curvature: None,
            object_id: vec![1; n],
            part_id: vec![1; n],
            label_table: [(1, "x_y".to_string())].into(),
        }
    }

    #[test]
    fn plane_normals_are_vertical() {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let m = TriMesh::new(v, vec![[0, 1, 2], [0, 2, 3]], vec![1, 1], vec![1, 1]).unwrap();
        let mut c = sample_mesh_surface(&m, 2000, 1).unwrap();
        c.normals = None;
        let c = estimate_normals(&c, 10).unwrap();
        for n in c.normals.unwrap() {
            assert!(n.angle_to(Vec3::UP) < 1e-3, "normal {n:?}");
        }
    }

    #[test]
    fn sphere_normals_are_radial() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<Vec3> = (0..6000)
            .map(|_| loop {
                let v = Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                if let Some(u) = v.try_normalize() {
                    if v.norm() <= 1.0 {
                        break u;
                    }
                }
            })
            .collect();
        let c = estimate_normals(&cloud_of(pts), 16).unwrap();
        let five_deg = 5f64.to_radians();
        for (p, n) in c.points.iter().zip(c.normals.unwrap()) {
            // sign may differ from the outward radial direction near the equator
            let a = n.angle_to(*p).min(n.angle_to(-*p));
            assert!(a < five_deg, "at {p:?}: {:.3} deg", a.to_degrees());
        }
    }

    #[test]
    fn too_few_points_is_an_error() {
        let c = cloud_of(vec![Vec3::ZERO, Vec3::UP]);
        assert!(matches!(estimate_normals(&c, 3), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn orientation_prefers_up_then_outward() {
        assert_eq!(orient(Vec3::new(0.0, 0.0, -1.0), Vec3::ZERO, Vec3::ZERO), Vec3::UP);
        let side = orient(Vec3::new(-1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0), Vec3::ZERO);
        assert_eq!(side, Vec3::new(1.0, 0.0, 0.0));
    }
}

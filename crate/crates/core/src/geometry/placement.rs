use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{AnnotatedCloud, TriMesh, Vec3};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// How a library shape is put into a scene: per-axis scale, smooth jitter,
/// rotation about +z, then translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementTransform {
    pub scale: Vec3,
    pub yaw: f64,
    pub translation: Vec3,
    /// Peak displacement of the jitter field in meters.
    pub jitter_amplitude: f64,
}

impl PlacementTransform {
    pub fn identity() -> Self {
        PlacementTransform {
            scale: Vec3::splat(1.0),
            yaw: 0.0,
            translation: Vec3::ZERO,
            jitter_amplitude: 0.0,
        }
    }

    pub fn translation(t: Vec3) -> Self {
        PlacementTransform {
            translation: t,
            ..Self::identity()
        }
    }

    /// `shape_diagonal` is the diagonal of the scaled shape.
    pub fn validate(&self, shape_diagonal: f64) -> Result<()> {
        let s = self.scale;
        if !(s.x > 0.0 && s.y > 0.0 && s.z > 0.0) || !s.is_finite() {
            return Err(Error::InvalidInput(format!("scale must be positive and finite, got {s:?}")));
        }
        if !self.yaw.is_finite() || !self.translation.is_finite() {
            return Err(Error::InvalidInput("non-finite yaw or translation".into()));
        }
        if !(self.jitter_amplitude >= 0.0) || self.jitter_amplitude > 0.05 * shape_diagonal {
            return Err(Error::InvalidInput(format!(
                "jitter amplitude {} outside [0, 5% of diagonal {shape_diagonal}]",
                self.jitter_amplitude
            )));
        }
        Ok(())
    }

    fn rotate(&self, p: Vec3) -> Vec3 {
        if self.yaw == 0.0 {
            return p;
        }
        let (s, c) = self.yaw.sin_cos();
        Vec3::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z)
    }

    fn translate(&self, p: Vec3) -> Vec3 {
        if self.translation == Vec3::ZERO {
            p
        } else {
            p + self.translation
        }
    }

    fn map_point(&self, p: Vec3, field: &JitterField) -> Vec3 {
        let scaled = p.mul_elem(self.scale);
        self.translate(self.rotate(field.displace(scaled)))
    }

    fn map_normal(&self, n: Vec3) -> Vec3 {
        let inv = Vec3::new(1.0 / self.scale.x, 1.0 / self.scale.y, 1.0 / self.scale.z);
        let n = if self.scale == Vec3::splat(1.0) {
            n
        } else {
            n.mul_elem(inv).try_normalize().unwrap_or(n)
        };
        self.rotate(n)
    }
}

const MAX_MODES: usize = 8;

/// Smooth displacement field: a sum of low-frequency sinusoids whose
/// amplitudes add up to the configured peak, so `|displace(p) - p|` never
/// exceeds it.
#[derive(Debug, Clone, PartialEq)]
pub struct JitterField {
    modes: Vec<JitterMode>,
}

#[derive(Debug, Clone, PartialEq)]
struct JitterMode {
    wave: Vec3,
    phase: f64,
    direction: Vec3,
    amplitude: f64,
}

impl JitterField {
    pub fn none() -> Self {
        JitterField { modes: Vec::new() }
    }

    /// Wavelengths range from 2/3 to 2 times `length_scale`.
    pub fn new(amplitude: f64, length_scale: f64, seed: u64) -> Self {
        if amplitude <= 0.0 || length_scale <= 0.0 {
            return Self::none();
        }
        let mut rng = stream_rng(seed, Stream::Jitter, 0);
        let unit = |rng: &mut rand_chacha::ChaCha8Rng| loop {
            let v = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 1e-3 && n <= 1.0 {
                break v / n;
            }
        };
        let mut modes: Vec<JitterMode> = (0..MAX_MODES)
            .map(|_| {
                let cycles = rng.random_range(0.5..1.5);
                let wave = unit(&mut rng) * (std::f64::consts::TAU * cycles / length_scale);
                let direction = unit(&mut rng);
                JitterMode {
                    wave,
                    phase: rng.random_range(0.0..std::f64::consts::TAU),
                    direction,
                    amplitude: rng.random_range(0.5..1.0),
                }
            })
            .collect();
        let total: f64 = modes.iter().map(|m| m.amplitude).sum();
        for m in &mut modes {
            m.amplitude *= amplitude / total;
        }
        JitterField { modes }
    }

    pub fn displace(&self, p: Vec3) -> Vec3 {
        if self.modes.is_empty() {
            return p;
        }
        let offset = self.modes.iter().fold(Vec3::ZERO, |acc, m| {
            acc + m.direction * (m.amplitude * (m.wave.dot(p) + m.phase).sin())
        });
        p + offset
    }
}

fn field_for(mesh: &TriMesh, t: &PlacementTransform, seed: u64) -> Result<JitterField> {
    let diag = match mesh.aabb() {
        Ok(b) => b.extent().mul_elem(t.scale).norm(),
        Err(_) => 0.0,
    };
    t.validate(diag)?;
    Ok(JitterField::new(t.jitter_amplitude, diag, seed))
}

/// Applies a placement to a shape's mesh and cloud with one shared jitter
/// field, so vertices and points move consistently. Labels are untouched.
pub fn apply_placement(
    mesh: &TriMesh,
    cloud: &AnnotatedCloud,
    t: &PlacementTransform,
    seed: u64,
) -> Result<(TriMesh, AnnotatedCloud)> {
    let field = field_for(mesh, t, seed)?;
    Ok((
        apply_placement_to_mesh(mesh, t, &field),
        apply_placement_to_cloud(cloud, t, &field),
    ))
}

pub fn apply_placement_to_mesh(mesh: &TriMesh, t: &PlacementTransform, field: &JitterField) -> TriMesh {
    TriMesh {
        vertices: mesh.vertices.iter().map(|&v| t.map_point(v, field)).collect(),
        ..mesh.clone()
    }
}

pub fn apply_placement_to_cloud(
    cloud: &AnnotatedCloud,
    t: &PlacementTransform,
    field: &JitterField,
) -> AnnotatedCloud {
    AnnotatedCloud {
        points: cloud.points.iter().map(|&p| t.map_point(p, field)).collect(),
        normals: cloud
            .normals
            .as_ref()
            .map(|ns| ns.iter().map(|&n| t.map_normal(n)).collect()),
        curvature: None,
        ..cloud.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_mesh_surface;

    fn cube() -> TriMesh {
        let v: Vec<Vec3> = (0..8)
            .map(|i| Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
            .collect();
        let faces = vec![
            [0, 2, 1], [1, 2, 3], [4, 5, 6], [5, 7, 6], [0, 1, 4], [1, 5, 4],
            [2, 6, 3], [3, 6, 7], [0, 4, 2], [2, 4, 6], [1, 3, 5], [3, 7, 5],
        ];
        let parts = (0..12).map(|f| f / 2 + 1).collect();
        TriMesh::new(v, faces, parts, vec![1; 12]).unwrap()
    }

    #[test]
    fn identity_is_bit_exact() {
        let m = cube();
        let c = sample_mesh_surface(&m, 500, 2).unwrap();
        let (m2, c2) = apply_placement(&m, &c, &PlacementTransform::identity(), 9).unwrap();
        assert_eq!(m2, m);
        assert_eq!(c2.points, c.points);
        assert_eq!(c2.normals, c.normals);
        assert_eq!(c2.part_id, c.part_id);
    }

    #[test]
    fn pure_translation_shifts_exactly() {
        let m = cube();
        let c = sample_mesh_surface(&m, 200, 2).unwrap();
        let t = PlacementTransform::translation(Vec3::new(1.0, 0.0, 0.0));
        let (_, c2) = apply_placement(&m, &c, &t, 0).unwrap();
        for (a, b) in c.points.iter().zip(&c2.points) {
            assert_eq!(*b, *a + Vec3::new(1.0, 0.0, 0.0));
        }
    }

    #[test]
    fn uniform_scale_doubles_diagonal() {
        let m = cube();
        let c = sample_mesh_surface(&m, 300, 2).unwrap();
        let t = PlacementTransform {
            scale: Vec3::splat(2.0),
            ..PlacementTransform::identity()
        };
        let (m2, c2) = apply_placement(&m, &c, &t, 0).unwrap();
        assert_eq!(m2.aabb().unwrap().diagonal(), 2.0 * m.aabb().unwrap().diagonal());
        assert_eq!(c2.aabb().unwrap().diagonal(), 2.0 * c.aabb().unwrap().diagonal());
    }

    #[test]
    fn jitter_is_bounded_and_shared() {
        let m = cube();
        let c = sample_mesh_surface(&m, 400, 3).unwrap();
        let amp = 0.02;
        let t = PlacementTransform {
            jitter_amplitude: amp,
            ..PlacementTransform::identity()
        };
        let (m2, c2) = apply_placement(&m, &c, &t, 77).unwrap();
        for (a, b) in m.vertices.iter().zip(&m2.vertices) {
            assert!(a.distance(*b) <= amp + 1e-12);
        }
        let field = JitterField::new(amp, m.aabb().unwrap().diagonal(), 77);
        for (a, b) in c.points.iter().zip(&c2.points) {
            assert_eq!(field.displace(*a), *b);
        }
        assert_ne!(m2.vertices, m.vertices);
        assert_eq!(c2.part_id, c.part_id);
    }

    #[test]
    fn oversized_jitter_is_rejected() {
        let m = cube();
        let c = sample_mesh_surface(&m, 10, 3).unwrap();
        let t = PlacementTransform {
            jitter_amplitude: 1.0,
            ..PlacementTransform::identity()
        };
        assert!(apply_placement(&m, &c, &t, 0).is_err());
    }

    #[test]
    fn yaw_rotates_about_vertical() {
        let m = cube();
        let c = sample_mesh_surface(&m, 50, 3).unwrap();
        let t = PlacementTransform {
            yaw: std::f64::consts::FRAC_PI_2,
            ..PlacementTransform::identity()
        };
        let (_, c2) = apply_placement(&m, &c, &t, 0).unwrap();
        for (a, b) in c.points.iter().zip(&c2.points) {
            assert!((b.x + a.y).abs() < 1e-12 && (b.y - a.x).abs() < 1e-12 && b.z == a.z);
        }
    }
}

use serde::{Deserialize, Serialize};

use super::{GeometryError, Vec3};

/// Half-line with a unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    dir: Vec3,
}

impl Ray {
    /// Normalizes `dir`; fails on the zero vector.
    pub fn new(origin: Vec3, dir: Vec3) -> Result<Ray, GeometryError> {
        let dir = dir.normalized().ok_or(GeometryError::ZeroDirection)?;
        Ok(Ray { origin, dir })
    }

    pub fn towards(origin: Vec3, target: Vec3) -> Result<Ray, GeometryError> {
        Ray::new(origin, target - origin)
    }

    pub fn dir(&self) -> Vec3 {
        self.dir
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.dir * t
    }
}

/// Axis-aligned box; containment is inclusive on every face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb { min, max }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        point_in_box(p, self)
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb::new(self.min.min_by_component(o.min), self.max.max_by_component(o.max))
    }
}

pub fn point_in_box(p: Vec3, b: &Aabb) -> bool {
    b.min.x <= p.x && p.x <= b.max.x && b.min.y <= p.y && p.y <= b.max.y && b.min.z <= p.z && p.z <= b.max.z
}

/// Smallest non-negative `t` where the ray meets the sphere surface.
pub fn ray_sphere(ray: &Ray, center: Vec3, radius: f64) -> Option<f64> {
    let oc = ray.origin - center;
    let b = oc.dot(ray.dir);
    let c = oc.norm_squared() - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let (t0, t1) = (-b - s, -b + s);
    if t0 >= 0.0 {
        Some(t0)
    } else if t1 >= 0.0 {
        Some(t1)
    } else {
        None
    }
}

/// Slab test. Returns the entry distance, or `0` when the origin is inside the box.
pub fn ray_box(ray: &Ray, b: &Aabb) -> Option<f64> {
    let mut t_enter = 0.0_f64;
    let mut t_exit = f64::INFINITY;
    let o = ray.origin.to_array();
    let d = ray.dir.to_array();
    let lo = b.min.to_array();
    let hi = b.max.to_array();
    for axis in 0..3 {
        if d[axis] == 0.0 {
            if o[axis] < lo[axis] || o[axis] > hi[axis] {
                return None;
            }
            continue;
        }
        let inv = 1.0 / d[axis];
        let (mut t0, mut t1) = ((lo[axis] - o[axis]) * inv, (hi[axis] - o[axis]) * inv);
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        t_enter = t_enter.max(t0);
        t_exit = t_exit.min(t1);
        if t_enter > t_exit {
            return None;
        }
    }
    Some(t_enter)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> Aabb {
        Aabb::new(Vec3::new(-0.5, -0.5, -0.5), Vec3::new(0.5, 0.5, 0.5))
    }

    #[test]
    fn sphere_collinear_and_miss() {
        let ray = Ray::new(Vec3::ZERO, Vec3::X).unwrap();
        assert_eq!(ray_sphere(&ray, Vec3::new(2.0, 0.0, 0.0), 0.5), Some(1.5));
        assert_eq!(ray_sphere(&ray, Vec3::new(0.0, 2.0, 0.0), 0.5), None);
        // behind the origin
        assert_eq!(ray_sphere(&ray, Vec3::new(-2.0, 0.0, 0.0), 0.5), None);
        // origin inside: exit distance
        assert_eq!(ray_sphere(&ray, Vec3::ZERO, 0.5), Some(0.5));
    }

    #[test]
    fn box_entry_and_inside() {
        let ray = Ray::new(Vec3::new(-1.0, 0.0, 0.0), Vec3::X).unwrap();
        assert_eq!(ray_box(&ray, &unit_box()), Some(0.5));
        let inside = Ray::new(Vec3::new(0.1, 0.2, -0.3), Vec3::new(1.0, 1.0, 0.0)).unwrap();
        assert_eq!(ray_box(&inside, &unit_box()), Some(0.0));
        let away = Ray::new(Vec3::new(-1.0, 0.0, 0.0), -Vec3::X).unwrap();
        assert_eq!(ray_box(&away, &unit_box()), None);
        let parallel_outside = Ray::new(Vec3::new(-1.0, 0.6, 0.0), Vec3::X).unwrap();
        assert_eq!(ray_box(&parallel_outside, &unit_box()), None);
    }

    #[test]
    fn box_containment_inclusive() {
        let b = unit_box();
        assert!(point_in_box(b.max, &b));
        assert!(point_in_box(b.min, &b));
        assert!(point_in_box(Vec3::ZERO, &b));
        assert!(!point_in_box(Vec3::new(0.5 + 1e-6, 0.0, 0.0), &b));
        assert!(!point_in_box(Vec3::new(0.0, 0.0, -0.5 - 1e-6), &b));
    }

    #[test]
    fn zero_direction_rejected() {
        assert_eq!(Ray::new(Vec3::ZERO, Vec3::ZERO), Err(GeometryError::ZeroDirection));
    }
}

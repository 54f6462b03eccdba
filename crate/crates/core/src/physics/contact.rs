//! Penalty-based heightfield contacts: a vertical spring-damper along the
//! terrain normal plus Coulomb-capped viscous friction.

use serde::{Deserialize, Serialize};

use crate::math::Vec3;
use crate::terrain::{Ground, HeightField};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContactMaterial {
    /// Normal penetration stiffness (N/m).
    pub stiffness: f64,
    /// Normal penetration damping (N*s/m).
    pub damping: f64,
    /// Coulomb friction coefficient.
    pub friction: f64,
    /// Tangential viscous gain before the Coulomb cap (N*s/m).
    pub tangential_damping: f64,
    /// Hard cap on the normal force per contact point (N).
    pub max_normal_force: f64,
}

impl Default for ContactMaterial {
    fn default() -> Self {
        ContactMaterial {
            stiffness: 5000.0,
            damping: 500.0,
            friction: 0.8,
            tangential_damping: 1000.0,
            max_normal_force: 800.0,
        }
    }
}

/// Force on a single contact point, decomposed for reporting.
#[derive(Debug, Clone, Copy, Default)]
pub struct PointForce {
    pub force: Vec3,
    pub normal_magnitude: f64,
    pub tangential_magnitude: f64,
}

impl PointForce {
    pub fn in_contact(&self) -> bool {
        self.normal_magnitude > 0.0
    }
}

/// World-frame inverse effective mass (1/kg) seen by a contact point:
/// the base contribution plus the reflected joint contribution through the
/// point's Jacobian. Used to keep velocity-proportional contact forces from
/// over-shooting the velocity they oppose within one substep.
#[derive(Debug, Clone, Copy)]
pub struct InverseEffectiveMass(pub [[f64; 3]; 3]);

impl InverseEffectiveMass {
    pub fn along(&self, u: Vec3) -> f64 {
        let m = &self.0;
        let au = Vec3::new(
            m[0][0] * u.x + m[0][1] * u.y + m[0][2] * u.z,
            m[1][0] * u.x + m[1][1] * u.y + m[1][2] * u.z,
            m[2][0] * u.x + m[2][1] * u.y + m[2][2] * u.z,
        );
        u.dot(au)
    }
}

/// Per-point penalty contact forces against a heightfield. Penetration depth
/// is `height_at(x, y) - z`; non-penetrating points and points over hole
/// cells produce zero force (holes are unsupported, never an error).
pub fn contact_forces(
    points: &[Vec3],
    point_vels: &[Vec3],
    field: &HeightField,
    material: &ContactMaterial,
) -> Vec<PointForce> {
    debug_assert_eq!(points.len(), point_vels.len());
    points
        .iter()
        .zip(point_vels.iter())
        .map(|(&p, &v)| point_contact_force(p, v, field, material, None, 0.0))
        .collect()
}

/// Contact force with the damping coefficients clamped so their impulse over
/// `dt` cannot reverse the velocity component they oppose. The spring term
/// and the Coulomb cap are untouched.
pub fn point_contact_force_stabilized(
    point: Vec3,
    vel: Vec3,
    field: &HeightField,
    material: &ContactMaterial,
    inv_mass: &InverseEffectiveMass,
    dt: f64,
) -> PointForce {
    point_contact_force(point, vel, field, material, Some(inv_mass), dt)
}

fn point_contact_force(
    point: Vec3,
    vel: Vec3,
    field: &HeightField,
    material: &ContactMaterial,
    inv_mass: Option<&InverseEffectiveMass>,
    dt: f64,
) -> PointForce {
    let ground = match field.height_at(point.x, point.y) {
        Ground::Height(h) => h,
        Ground::Hole => return PointForce::default(),
    };
    let depth = ground - point.z;
    if depth <= 0.0 {
        return PointForce::default();
    }
    let mut damping = material.damping;
    if let Some(im) = inv_mass {
        let budget = 1.0 / (im.along(Vec3::new(0.0, 0.0, 1.0)) * dt).max(1e-12);
        damping = damping.min(budget);
    }
    let normal_mag = (material.stiffness * depth - damping * vel.z)
        .max(0.0)
        .min(material.max_normal_force);
    if normal_mag == 0.0 {
        return PointForce::default();
    }
    let (gx, gy) = field.gradient_at(point.x, point.y);
    let n = Vec3::new(-gx, -gy, 1.0);
    let n = n.scale(1.0 / n.norm());

    let v_t = vel - n.scale(vel.dot(n));
    let v_t_norm = v_t.norm();
    let tangential_mag = if v_t_norm > 1e-9 {
        let mut k_t = material.tangential_damping;
        if let Some(im) = inv_mass {
            let u_t = v_t.scale(1.0 / v_t_norm);
            let budget = 1.0 / (im.along(u_t) * dt).max(1e-12);
            k_t = k_t.min(budget);
        }
        (k_t * v_t_norm).min(material.friction * normal_mag)
    } else {
        0.0
    };
    let mut force = n.scale(normal_mag);
    if tangential_mag > 0.0 {
        force += v_t.scale(-tangential_mag / v_t_norm);
    }
    PointForce { force, normal_magnitude: normal_mag, tangential_magnitude: tangential_mag }
}

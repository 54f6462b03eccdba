// scratch: knob sweep against equilibrium drift and stand quietness
use legnav::math::Vec3;
use legnav::physics::{step, RobotModel, NUM_LEGS};
use legnav::terrain::HeightField;

fn eq_drift(model: &RobotModel) -> f64 {
    let field = HeightField::new((0.0, 0.0), 0.05, 161, 161).unwrap();
    let load = model.base_mass * model.gravity / NUM_LEGS as f64;
    let depth = load / model.material.stiffness;
    let base_z = model.stand_height() - depth;
    let mut state = model.spawn_state(Vec3::new(4.0, 4.0, base_z), 0.0);
    let f_base = Vec3::new(0.0, 0.0, load);
    let mut q_des = model.default_q;
    for leg in 0..NUM_LEGS {
        let k = model.leg_kinematics(leg, &model.leg_q(&model.default_q, leg));
        for j in 0..3 {
            q_des[3 * leg + j] -= k.jacobian[j].dot(f_base) / model.actuator.kp;
        }
    }
    let start = state.base_pos;
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        state = step(model, &state, &q_des, &field, 0.005).unwrap().state;
        worst = worst.max((state.base_pos - start).norm());
    }
    worst
}

fn main() {
    for (kp, kd, b, jm) in [
        (80.0, 2.0, 2.0, 0.1),
        (100.0, 3.0, 2.0, 0.1),
        (120.0, 4.0, 2.0, 0.1),
        (160.0, 4.0, 2.0, 0.1),
        (80.0, 2.0, 2.0, 0.2),
        (80.0, 2.0, 6.0, 0.1),
        (120.0, 4.0, 6.0, 0.2),
        (100.0, 4.0, 4.0, 0.15),
    ] {
        let mut m = RobotModel::default();
        m.actuator.kp = kp;
        m.actuator.kd = kd;
        m.joint_damping = b;
        m.joint_inertia = jm;
        println!("kp={kp} kd={kd} b={b} jm={jm}: eq_drift={:.6}", eq_drift(&m));
    }
}

// scratch: sweep contact/joint parameters for a stable default stand
use std::sync::Arc;

use legnav::env::{Env, EnvConfig, ObsConfig, TaskMode};
use legnav::physics::{RobotModel, NUM_JOINTS};
use legnav::terrain::HeightField;

fn trial(model: RobotModel, label: &str) {
    let field = Arc::new(HeightField::new((0.0, 0.0), 0.05, 161, 161).unwrap());
    let cfg = EnvConfig {
        mode: TaskMode::FinalPosition,
        obs: ObsConfig { noise_level: 0.0, terrain_enabled: false, ..Default::default() },
        spawn_q_noise: 0.0,
        ..Default::default()
    };
    let stand = model.stand_height();
    let default_q = model.default_q;
    let mut env = Env::new(cfg, Arc::new(model), field, 0, 1);
    env.reset().unwrap();
    let mut max_qerr_late: f64 = 0.0;
    let mut crash_t = None;
    let mut final_z = 0.0;
    let mut vz_late: f64 = 0.0;
    let mut feet_late = 0usize;
    let mut n_late = 0usize;
    for k in 0..150 {
        match env.step_env(&[0.0; NUM_JOINTS]) {
            Ok((_, _, info)) => {
                let s = env.state();
                final_z = s.base_pos.z;
                if k >= 100 {
                    let qerr = s.q.iter().zip(default_q.iter()).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
                    max_qerr_late = max_qerr_late.max(qerr);
                    vz_late = vz_late.max(s.base_linvel.z.abs());
                    feet_late += (0..4).filter(|&l| s.contact_flags.foot(l)).count();
                    n_late += 1;
                }
                if info.done {
                    crash_t = info.crashed.map(|c| (info.time, c));
                    break;
                }
            }
            Err(e) => { println!("{label}: error {e}"); return; }
        }
    }
    println!(
        "{label}: crash={crash_t:?} z_end={final_z:.3}/{stand:.3} qerr_late={max_qerr_late:.3} |vz|_late={vz_late:.3} feet_late={:.2}",
        feet_late as f64 / n_late.max(1) as f64
    );
}

fn main() {
    for (kn, cn, cap, b, jm) in [
        (5000.0, 200.0, 2000.0, 1.0, 0.05),
        (5000.0, 500.0, 500.0, 2.0, 0.10),
        (5000.0, 1000.0, 500.0, 2.0, 0.10),
        (5000.0, 2000.0, 500.0, 2.0, 0.10),
        (5000.0, 1000.0, 300.0, 2.0, 0.10),
        (5000.0, 2000.0, 300.0, 4.0, 0.10),
        (5000.0, 1000.0, 500.0, 4.0, 0.10),
        (5000.0, 2000.0, 500.0, 4.0, 0.15),
        (8000.0, 2000.0, 500.0, 4.0, 0.10),
        (3000.0, 1000.0, 400.0, 3.0, 0.10),
    ] {
        let mut m = RobotModel::default();
        m.material.stiffness = kn;
        m.material.damping = cn;
        m.material.max_normal_force = cap;
        m.joint_damping = b;
        m.joint_inertia = jm;
        trial(m, &format!("kn={kn} cn={cn} cap={cap} b={b} jm={jm}"));
    }
}

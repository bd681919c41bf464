use eploop_core::*;
use num_complex::Complex64 as C64;
use std::f64::consts::{PI, TAU};

fn main() {
    let om = TAU * 0.1;
    let p = SystemParams::from_carrier(TAU * 10.0, om, 0.0).unwrap();

    // Gamma phase-shifted by pi (start on the cut at gamma_0 - a_gamma),
    // theta triangle literal. Probe initial-frame projections over time.
    for (name, dir, label, tshift, gshift) in [
        ("cw  plus  (t0,gPI)", Direction::Cw, StateLabel::Plus, 0.0, PI),
        ("cw  minus (t0,gPI)", Direction::Cw, StateLabel::Minus, 0.0, PI),
        ("ccw plus  (t0,gPI)", Direction::Ccw, StateLabel::Plus, 0.0, PI),
        ("ccw minus (t0,gPI)", Direction::Ccw, StateLabel::Minus, 0.0, PI),
    ] {
        let spec_g = LoopSpec::new(om, om / 30.0, PI / 30.0, om / 8.0)
            .unwrap()
            .with_start_phase(gshift)
            .with_direction(dir);
        let spec_t = spec_g.with_start_phase(tshift);
        // Split-phase schedules are not a LoopSpec; emulate by a custom
        // integration: theta from spec_t, gamma from spec_g.
        let n = 20_000usize;
        let total = spec_g.total_time();
        let rhs = |t: f64, y: &[C64; 2]| -> [C64; 2] {
            let h = build_hamiltonian(om, gamma_at(&spec_g, t), theta_at(&spec_t, t));
            [
                -C64::i() * (h[0][0] * y[0] + h[0][1] * y[1]),
                -C64::i() * (h[1][0] * y[0] + h[1][1] * y[1]),
            ]
        };
        let f0 = eigenframe(om, gamma_at(&spec_g, 0.0), theta_at(&spec_t, 0.0), None).unwrap();
        let mut y = initial_state(&f0, label).as_vec();
        println!("== {name}  lambda+(0)={:?}", f0.lambda_plus);
        let mut frame = f0.clone();
        for i in 0..n {
            let t0 = total * i as f64 / n as f64;
            let t1 = total * (i + 1) as f64 / n as f64;
            // naive RK4
            let h = t1 - t0;
            let k1 = rhs(t0, &y);
            let y2 = [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]];
            let k2 = rhs(t0 + 0.5 * h, &y2);
            let y3 = [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]];
            let k3 = rhs(t0 + 0.5 * h, &y3);
            let y4 = [y[0] + h * k3[0], y[1] + h * k3[1]];
            let k4 = rhs(t1, &y4);
            y = [
                y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
            if (i + 1) % (n / 20) == 0 || i + 1 == n {
                let t = t1;
                frame = eigenframe(om, gamma_at(&spec_g, t), theta_at(&spec_t, t), Some(&frame))
                    .unwrap();
                let st = EnvelopeState::from_vec(y);
                let (cp, cm) = project_coefficients(&st, &frame);
                let lp0 = (f0.l_plus[0] * y[0] + f0.l_plus[1] * y[1]).norm();
                let lm0 = (f0.l_minus[0] * y[0] + f0.l_minus[1] * y[1]).norm();
                println!(
                    "  t/T={:.2} |c+|={:.2e} |c-|={:.2e} Im l+={:+.4}  init-frame |p+|={:.2e} |p-|={:.2e} ratio={:.2}",
                    t / spec_g.period(),
                    cp.norm(),
                    cm.norm(),
                    frame.lambda_plus.im,
                    lp0,
                    lm0,
                    (lp0 / lm0).max(lm0 / lp0)
                );
            }
        }
    }
}

use eploop_core::*;
use num_complex::Complex64 as C64;
use std::f64::consts::{PI, TAU};

// Split-phase loop: theta literal (Eq.5-style triangle), gamma with an extra
// phase so the run starts on the branch cut away from the Gamma extremes.
fn run(
    om: f64,
    p: &SystemParams,
    gphase: f64,
    dir: Direction,
    label: StateLabel,
) -> (usize, Vec<f64>, Option<StateLabel>, f64, f64) {
    let spec_t = LoopSpec::new(om, om / 30.0, PI / 30.0, om / 8.0)
        .unwrap()
        .with_direction(dir);
    let spec_g = spec_t.with_start_phase(gphase);
    let n = 20_000usize;
    let total = spec_t.total_time();
    let period = spec_t.period();
    let rhs = |t: f64, y: &[C64; 2]| -> [C64; 2] {
        let h = build_hamiltonian(om, gamma_at(&spec_g, t), theta_at(&spec_t, t));
        [
            -C64::i() * (h[0][0] * y[0] + h[0][1] * y[1]),
            -C64::i() * (h[1][0] * y[0] + h[1][1] * y[1]),
        ]
    };
    let f0 = eigenframe(om, gamma_at(&spec_g, 0.0), theta_at(&spec_t, 0.0), None).unwrap();
    let mut y = initial_state(&f0, label).as_vec();
    let mut frame = f0.clone();
    let mut d_prev = match label {
        StateLabel::Plus => 1.0f64,
        StateLabel::Minus => -1.0,
    };
    let mut sign = d_prev;
    let mut nat_times: Vec<f64> = Vec::new();
    for i in 0..n {
        let t0 = total * i as f64 / n as f64;
        let t1 = total * (i + 1) as f64 / n as f64;
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
        frame = eigenframe(om, gamma_at(&spec_g, t1), theta_at(&spec_t, t1), Some(&frame)).unwrap();
        let (cp, cm) = project_coefficients(&EnvelopeState::from_vec(y), &frame);
        let d = cp.norm() - cm.norm();
        if (sign > 0.0 && d_prev >= 0.0 && d < 0.0) || (sign < 0.0 && d_prev <= 0.0 && d > 0.0) {
            nat_times.push(t1 / period);
            sign = -sign;
        }
        d_prev = d;
    }
    let lp0 = (f0.l_plus[0] * y[0] + f0.l_plus[1] * y[1]).norm();
    let lm0 = (f0.l_minus[0] * y[0] + f0.l_minus[1] * y[1]).norm();
    let (lab, ratio) = if lp0 >= lm0 {
        (StateLabel::Plus, lp0 / lm0)
    } else {
        (StateLabel::Minus, lm0 / lp0)
    };
    let g0 = gamma_at(&spec_g, 0.0);
    (
        nat_times.len(),
        nat_times,
        (ratio > 10.0).then_some(lab),
        ratio,
        g0 / om,
    )
}

fn main() {
    let om = TAU * 0.1;
    let p = SystemParams::from_carrier(TAU * 10.0, om, 0.0).unwrap();
    for k in 0..9 {
        let gphase = PI * (0.55 + 0.05 * k as f64);
        println!("--- gamma_phase = {:.2}pi ---", gphase / PI);
        for (name, dir, label) in [
            ("cw  +", Direction::Cw, StateLabel::Plus),
            ("cw  -", Direction::Cw, StateLabel::Minus),
            ("ccw +", Direction::Ccw, StateLabel::Plus),
            ("ccw -", Direction::Ccw, StateLabel::Minus),
        ] {
            let (n, times, fin, ratio, g0) = run(om, &p, gphase, dir, label);
            println!(
                "  {name}: nats={n} t/T={:?} final={:?} ratio={:.2} G(0)/Om={:.4}",
                times.iter().map(|t| (t * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
                fin,
                ratio,
                g0
            );
        }
    }
}

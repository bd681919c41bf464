use eploop_core::*;
use std::f64::consts::TAU;

fn main() {
    let om0 = TAU * 10.0;
    let gamma = 0.5;
    let p = SystemParams::new(om0, om0, gamma).unwrap();
    let run_time = 5.0 / gamma;
    let spec = LoopSpec::new(gamma, 0.0, 0.0, TAU / run_time)
        .unwrap()
        .with_theta_center(0.0);
    let x0 = 1.0e-6;
    let init = MechState { x: x0, y: 0.0, vx: 0.0, vy: 0.0 };
    let opts = IntegratorOptions::for_carrier(&p);
    let out = integrate_full(&p, &spec, &init, &opts).unwrap();
    // raw quadrature magnitude at a few points without filtering
    for k in [100usize, 1000, 2500, 4000, 4700] {
        let (t, s) = out[k];
        let z = 0.5 * ((s.x * s.x + (s.vx / om0) * (s.vx / om0)).sqrt());
        let want = 0.5 * x0 * (-0.5 * gamma * t).exp();
        println!("raw t={t:.3} |z|={:.6e} want={:.6e} rel={:+.5}", z, want, z / want - 1.0);
    }
    let env = demodulate(&out, p.omega_0(), p.omega_0() / 10.0).unwrap();
    for k in [100usize, 500, 1000, 2000, 3000, 4000, 4500, 4700, 4850, 4950] {
        let (t, s) = env[k];
        let want = 0.5 * x0 * (-0.5 * gamma * t).exp();
        println!(
            "flt t={t:.3} |A|={:.6e} want={:.6e} rel={:+.5}",
            s.a_x.norm(),
            want,
            s.a_x.norm() / want - 1.0
        );
    }
}

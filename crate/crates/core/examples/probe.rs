use eploop_core::*;
use std::f64::consts::{PI, TAU};

fn main() {
    let om = TAU * 0.1;
    let p = SystemParams::from_carrier(TAU * 10.0, om, 0.0).unwrap();
    for (name, dir, label) in [
        ("cw  plus ", Direction::Cw, StateLabel::Plus),
        ("cw  minus", Direction::Cw, StateLabel::Minus),
        ("ccw plus ", Direction::Ccw, StateLabel::Plus),
        ("ccw minus", Direction::Ccw, StateLabel::Minus),
    ] {
        let spec = LoopSpec::new(om, om / 30.0, PI / 30.0, om / 8.0)
            .unwrap()
            .with_start_phase(PI)
            .with_direction(dir);
        let opts = IntegratorOptions::for_loop(&spec);
        let (traj, report) = run_loop(&p, &spec, label, &opts, 10.0).unwrap();
        println!("== {name}  final={:?} ratio={:.3e} nats={}",
            report.final_label, report.final_overlap_ratio, report.nat_events.len());
        for e in &report.nat_events {
            println!("   nat at t/T={:.4} delay/T={:.4} ref/T={:.4}",
                e.time / traj.period(), e.delay / traj.period(), e.preceding_crossing / traj.period());
        }
        let n = traj.len();
        for k in 0..=20 {
            let i = (n - 1) * k / 20;
            let (cp, cm) = traj.coeffs[i];
            let f = &traj.frames[i];
            println!("   t/T={:.3} |c+|={:.3e} |c-|={:.3e} Im l+={:+.4} alpha=({:+.3},{:+.3})",
                traj.times[i] / traj.period(), cp.norm(), cm.norm(),
                f.lambda_plus.im, f.alpha.re, f.alpha.im);
        }
    }
}

use eploop_core::*;
use std::f64::consts::{PI, TAU};

fn main() {
    let om = TAU * 0.1;
    let p = SystemParams::from_carrier(TAU * 10.0, om, 0.0).unwrap();

    println!("=== straight path (gamma_0=2/3, a_theta=pi/6, omega_c=om/17, phase 0) ===");
    for (name, dir, label) in [
        ("cw  plus ", Direction::Cw, StateLabel::Plus),
        ("cw  minus", Direction::Cw, StateLabel::Minus),
        ("ccw plus ", Direction::Ccw, StateLabel::Plus),
        ("ccw minus", Direction::Ccw, StateLabel::Minus),
    ] {
        let spec = LoopSpec::new(2.0 * om / 3.0, 0.0, PI / 6.0, om / 17.0)
            .unwrap()
            .with_direction(dir);
        let opts = IntegratorOptions::for_loop(&spec);
        let (traj, report) = run_loop(&p, &spec, label, &opts, 10.0).unwrap();
        print!(
            "{name} final={:?} ratio={:.3e} nats={}  ",
            report.final_label,
            report.final_overlap_ratio,
            report.nat_events.len()
        );
        for e in &report.nat_events {
            print!(
                "[t/T={:.4} delay/T={:.4}] ",
                e.time / traj.period(),
                e.delay / traj.period()
            );
        }
        println!();
    }

    println!("=== orange loop phase pi: envelope vs full mechanics (CW both inits) ===");
    for label in [StateLabel::Plus, StateLabel::Minus] {
        let spec = LoopSpec::new(om, om / 30.0, PI / 30.0, om / 8.0)
            .unwrap()
            .with_start_phase(PI)
            .with_direction(Direction::Cw);
        match verify_envelope_reduction(&p, &spec, label, 0.05) {
            Ok(r) => println!(
                "{:?}: rms={:.4} max={:.4} pass={}",
                label, r.rms_error, r.max_error, r.pass
            ),
            Err(e) => println!("{label:?}: ERROR {e}"),
        }
    }

    println!("=== orange loop, slower omega_c values, phase pi, CW ===");
    for div in [8.0, 12.0, 17.0, 25.0, 40.0] {
        for label in [StateLabel::Plus, StateLabel::Minus] {
            let spec = LoopSpec::new(om, om / 30.0, PI / 30.0, om / div)
                .unwrap()
                .with_start_phase(PI)
                .with_direction(Direction::Cw);
            let opts = IntegratorOptions::for_loop(&spec);
            let (traj, report) = run_loop(&p, &spec, label, &opts, 10.0).unwrap();
            print!(
                "  w/{div:<4} {label:?}: final={:?} ratio={:.3e} nats={} ",
                report.final_label,
                report.final_overlap_ratio,
                report.nat_events.len()
            );
            for e in &report.nat_events {
                print!("[t/T={:.3}] ", e.time / traj.period());
            }
            println!();
        }
    }
}

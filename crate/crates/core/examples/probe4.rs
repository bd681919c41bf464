use eploop_core::*;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

fn main() {
    let om = TAU * 0.1;
    let p = SystemParams::from_carrier(TAU * 10.0, om, 0.0).unwrap();

    for phase in [FRAC_PI_2, -FRAC_PI_2] {
        println!("=== orange loop, start_phase = {:+.3} ===", phase);
        for (name, dir, label) in [
            ("cw  plus ", Direction::Cw, StateLabel::Plus),
            ("cw  minus", Direction::Cw, StateLabel::Minus),
            ("ccw plus ", Direction::Ccw, StateLabel::Plus),
            ("ccw minus", Direction::Ccw, StateLabel::Minus),
        ] {
            let spec = LoopSpec::new(om, om / 30.0, PI / 30.0, om / 8.0)
                .unwrap()
                .with_start_phase(phase)
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
                    "[t/T={:.3} d/T={:.3}] ",
                    e.time / traj.period(),
                    e.delay / traj.period()
                );
            }
            println!();
        }
    }

    // Delay-time sweeps at the candidate phase: check td < T/2 behavior for
    // criterion 4 style sweeps.
    for phase in [FRAC_PI_2, -FRAC_PI_2] {
        println!("=== a_theta sweep, cw, init minus, phase {:+.3} ===", phase);
        let template = LoopSpec::new(om, om / 30.0, PI / 30.0, om / 8.0)
            .unwrap()
            .with_start_phase(phase);
        let values: Vec<f64> = (0..8)
            .map(|i| PI / 60.0 + (PI / 4.0 - PI / 60.0) * i as f64 / 7.0)
            .collect();
        let res = sweep_delay(
            &p,
            &template,
            SweepAxis::ATheta,
            &values,
            StateLabel::Minus,
            Direction::Cw,
            None,
            10.0,
        );
        for (i, v) in res.axis_values.iter().enumerate() {
            let t = TAU / (om / 8.0);
            print!("  a_theta={:.4} flags={} delays/T:", v, res.chiral_flags[i]);
            for d in &res.delay_times[i] {
                print!(" {:.3}", d / t);
            }
            if let Some(e) = &res.errors[i] {
                print!(" ERR {e}");
            }
            println!();
        }
    }
}

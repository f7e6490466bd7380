//! One line per acceptance criterion on stderr; the test fails if any is red.
//!
//! Run with `cargo test -p liewedge-cli --test acceptance -- --nocapture`.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;

use liewedge::channels::r3::{delta, e, example3_coefficients, gamma0, h, p};
use liewedge::channels::{
    build_system, example1, example2, example3, k_component, kraus_family, kraus_rank, local_dissipator, p_component,
    p_component_on, pauli, pauli2, Axis, ChannelName, ChannelSpec, Label, Site,
};
use liewedge::liealg::{check_conditions, lie_closure};
use liewedge::lindblad::{ad_hat, cptp_audit, gks_dissipator, propagator, Rep};
use liewedge::matcore::{comm, expm, lin_comb, Mat, C64};
use liewedge::par::task_rng;
use liewedge::reachable::{
    contraction_audit, propagate, random_schedule, steer, trotter_slope, Schedule, SteerOptions, U_MAX,
};
use liewedge::semialgebra::{
    orbit_wedge, probe_pair, semialgebra_case, semialgebra_probe, Case, CaseParams, ProbeOptions, PROBE_T, PROBE_TOL,
};
use liewedge::wedge::{
    dual_cone_value, initial_wedge, majorization_cone_contains, orbit_min, random_rotation, saturate, SaturateOptions,
    CONE_TOL,
};
use liewedge::ControlSystem;

use Axis::{X, Y, Z};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn run(id: usize, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let t0 = Instant::now();
    let o = f();
    let el = t0.elapsed();
    let in_time = limit.is_none_or(|l| el <= l);
    let pass = o.pass && in_time;
    let budget = match limit {
        Some(l) => format!(" (limit {:.0} s)", l.as_secs_f64()),
        None => String::new(),
    };
    let _ = writeln!(
        std::io::stderr(),
        "[{}] {:>2} {}: {}; {:.3} s{}",
        if pass { "PASS" } else { "FAIL" },
        id,
        name,
        o.detail,
        el.as_secs_f64(),
        budget
    );
    pass
}

fn rotation(axis: Axis, theta: f64) -> Mat {
    expm(&h(axis).scale(theta))
}

fn conj(g: &Mat, x: &Mat) -> Mat {
    &(&expm(g) * x) * &expm(&g.scale(-1.0))
}

fn commutation_table() -> Outcome {
    let cols = [e(0), e(1), e(2), p(X), p(Y), p(Z)];
    let d = |i, j| delta(i, j).scale(-2.0);
    let neg = |m: Mat| m.scale(-1.0);
    let zero = Mat::zeros(3, 3);
    let rows = [
        (X, [zero.clone(), p(X), neg(p(X)), d(1, 2), neg(p(Z)), p(Y)]),
        (Y, [neg(p(Y)), zero.clone(), p(Y), p(Z), d(2, 0), neg(p(X))]),
        (Z, [p(Z), neg(p(Z)), zero.clone(), neg(p(Y)), p(X), d(0, 1)]),
    ];
    let mut worst = 0.0f64;
    let mut hits = 0;
    for (a, want) in &rows {
        for (c, w) in cols.iter().zip(want) {
            let r = comm(&h(*a), c).dist_max(w);
            worst = worst.max(r);
            hits += usize::from(r <= 1e-14);
        }
    }
    outcome(hits == 18, format!("{hits}/18 brackets, max residual {worst:.1e}"))
}

fn controllability() -> Outcome {
    let dim = |g: &[Mat]| lie_closure(g, 1e-9, 64).map(|s| s.dim()).unwrap_or(0);
    let e1 = dim(&[h(X), h(Y)]);
    let e2 = dim(&[h(Y), h(Z)]);
    let e2c = check_conditions(&example2(1.0)).map(|r| r.dim_kc).unwrap_or(0);
    let sys = |n| build_system(&ChannelSpec::new(n)).unwrap();
    let a = check_conditions(&sys(ChannelName::TwoQubitA)).unwrap();
    let c = check_conditions(&sys(ChannelName::TwoQubitC)).unwrap();
    let b = dim(&sys(ChannelName::TwoQubitB).control_generators());
    let pass = e1 == 3 && e2 == 3 && e2c == 1 && a.dim_kc == 15 && c.dim_kd == 15 && b == 6;
    outcome(
        pass,
        format!(
            "<Hx,Hy> {e1}, <Hy,Hz> {e2}, control-only {e2c}, two-qubit A {}, C {}, B edge {b}",
            a.dim_kc, c.dim_kd
        ),
    )
}

fn example1_saturation() -> Outcome {
    let sat = match saturate(&initial_wedge(&example1(3.0, 2.0, 1.0)), &SaturateOptions::default()) {
        Ok(s) => s,
        Err(err) => return outcome(false, format!("saturation failed: {err}")),
    };
    let w = sat.wedge;
    let so3 = lie_closure(&[h(X), h(Y)], 1e-9, 64).unwrap();
    let edge_ok = sat.converged && w.edge.equal(&so3, 1e-9);
    let mut rng = task_rng(0xacc3, 0);
    let n = 1000;
    let mut disagree = 0;
    let mut inside = 0;
    for _ in 0..n {
        let mut d: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..4.0));
        d.sort_by(|a, b| b.total_cmp(a));
        let r = random_rotation(&mut rng);
        let s = &(&r * &Mat::diag_real(&d)) * &r.transpose();
        let want = majorization_cone_contains(&s, &[3.0, 2.0, 1.0], 1e-9).unwrap();
        inside += usize::from(want);
        disagree += usize::from(w.contains_generator(&s, CONE_TOL) != want);
    }
    let rate = disagree as f64 / n as f64;
    outcome(
        edge_ok && rate <= 1e-3,
        format!(
            "edge dim {} (so(3): {edge_ok}), {inside}/{n} inside, disagreement rate {rate:.1e}",
            w.edge.dim()
        ),
    )
}

fn csv(args: &[&str]) -> Vec<Vec<f64>> {
    let out = Command::new(env!("CARGO_BIN_EXE_liewedge"))
        .args(args)
        .env_remove("LIEWEDGE_THREADS")
        .output()
        .expect("spawn liewedge");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn example2_geometry() -> Outcome {
    let w = saturate(&initial_wedge(&example2(1.0)), &SaturateOptions::default())
        .unwrap()
        .wedge;
    let g0 = gamma0([1.0, 0.0, 1.0]);
    let basis = [h(X), h(Z), g0.clone()];
    let mut ortho = 0.0f64;
    let mut circle = 0.0f64;
    for g in w.cone.generators() {
        ortho = ortho.max(g.inner(&h(Y)).abs());
        let c: Vec<f64> = basis.iter().map(|b| g.inner(b) / b.inner(b)).collect();
        let back = lin_comb(&c, &basis);
        circle = circle
            .max(back.dist_max(g))
            .max(((c[0] / c[2]).hypot(c[1] / c[2]) - 1.0).abs());
    }
    let mut curve = 0.0f64;
    for r in csv(&["figdata", "2a", "--theta-steps", "360"]) {
        let th = r[0];
        curve = curve
            .max((r[1] - th.sin()).abs())
            .max((r[2] - th.cos()).abs())
            .max((r[3] - 1.0).abs());
    }
    for r in csv(&["figdata", "2b", "--theta-steps", "360"]) {
        let th = r[0];
        curve = curve
            .max((r[1] + 1.0).abs())
            .max((r[2] - 1.0).abs())
            .max((r[3] - th.cos()).abs())
            .max((r[4] - 1.0).abs());
    }
    let pass = !w.cone.is_empty() && ortho <= 1e-12 && circle <= 1e-12 && curve <= 1e-12;
    outcome(
        pass,
        format!(
            "{} generators, max |<g,Hy>| {ortho:.1e}, (sin, cos, 1) residual {circle:.1e}, figdata residual {curve:.1e}",
            w.cone.len()
        ),
    )
}

fn example3_expansion() -> Outcome {
    let w = saturate(&initial_wedge(&example3(1.0)), &SaturateOptions::default())
        .unwrap()
        .wedge;
    let span = w.cone_span_dim();
    let g0 = gamma0([1.0, 1.0, 2.0]);
    let dlt = Mat::diag_real(&[7.0 / 6.0, 1.0 / 6.0, -2.0 / 3.0]);
    let basis = [h(X), h(Z), p(Y), dlt, g0.clone()];
    let mut rng = task_rng(0xacc5, 0);
    let (mut fit, mut coef, mut sixth) = (0.0f64, 0.0f64, f64::INFINITY);
    for _ in 0..100 {
        let th = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let r = rotation(Y, th);
        let x = &(&r * &(&h(Z) + &g0)) * &r.transpose();
        let c: Vec<f64> = basis.iter().map(|b| x.inner(b) / b.inner(b)).collect();
        fit = fit.max(lin_comb(&c, &basis).dist_max(&x));
        let closed = example3_coefficients(1.0, th);
        for (a, b) in c.iter().zip(closed) {
            coef = coef.max((a - b).abs());
        }
        sixth = sixth.min((c[4] - (11.0 + (2.0 * th).cos()) / 6.0).abs());
    }
    let pass = span == 5 && fit <= 1e-12 && coef <= 1e-12 && sixth > 0.5;
    outcome(
        pass,
        format!(
            "cone span {span}, expansion residual {fit:.1e}, closed-form /12 residual {coef:.1e}, /6 off by at least {sixth:.2}"
        ),
    )
}

fn closed_forms() -> Outcome {
    let mut gks = 0.0f64;
    for k in Axis::ALL {
        let g = 0.37;
        let s = ad_hat(&pauli(k).scale(0.5)).unwrap();
        let got = gks_dissipator(&[(pauli(k), g)]).unwrap();
        gks = gks.max(got.dist_max(&(&s * &s).scale(2.0 * g)));
    }
    let site_hat = |site: Site, a: Axis| {
        let op = match site {
            Site::Single => pauli(a),
            Site::A => pauli2(a.index(), 0),
            Site::B => pauli2(0, a.index()),
        };
        ad_hat(&op.scale(0.5)).unwrap()
    };
    let twist = |site: Site, c: Axis, x: &Mat, th: f64| conj(&site_hat(site, c).times_i().scale(-th), x);
    let mut rng = task_rng(0xacc6, 0);
    let mut worst = 0.0f64;
    let mut forms = 0usize;
    for _ in 0..100 {
        let th = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        for c in Axis::ALL {
            for d in Axis::ALL {
                let want = twist(Site::Single, c, &site_hat(Site::Single, d).times_i(), th);
                worst = worst.max(k_component(c, d, th).dist_max(&want));
                forms += 1;
            }
            let rates: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..2.0));
            let sets: Vec<Vec<(Axis, f64)>> = vec![
                vec![(X, rates[0])],
                vec![(Y, rates[1])],
                vec![(Z, rates[2])],
                vec![(X, rates[0]), (Y, rates[1])],
                vec![(Y, rates[1]), (Z, rates[2])],
                vec![(Z, rates[2]), (X, rates[0])],
                vec![(X, rates[0]), (Y, rates[1]), (Z, rates[2])],
            ];
            for ks in &sets {
                let want = twist(Site::Single, c, &local_dissipator(Site::Single, ks), th);
                worst = worst.max(p_component(c, ks, th).unwrap().dist_max(&want));
                forms += 1;
            }
            for site in [Site::A, Site::B] {
                for k in Axis::ALL {
                    let ks = [(k, rates[k.index() - 1])];
                    let want = twist(site, c, &local_dissipator(site, &ks), th);
                    worst = worst.max(p_component_on(site, c, &ks, th).unwrap().dist_max(&want));
                    forms += 1;
                }
            }
        }
    }
    outcome(
        gks <= 1e-12 && worst <= 1e-10,
        format!("dissipator residual {gks:.1e}, {forms} closed forms, max residual {worst:.1e}"),
    )
}

fn kraus_families() -> Outcome {
    let channels = [
        (ChannelName::BitFlip, vec![0.3]),
        (ChannelName::PhaseFlip, vec![0.7]),
        (ChannelName::BitPhaseFlip, vec![1.1]),
        (ChannelName::Depolarizing, vec![0.2, 0.5, 0.9]),
    ];
    let mut complete = 0.0f64;
    let mut flow = 0.0f64;
    let mut ranks_ok = true;
    let mut ranks = Vec::new();
    for (name, rates) in &channels {
        let spec = ChannelSpec::new(*name).with_rates(rates.clone());
        let sys = build_system(&spec).unwrap();
        for i in 0..50 {
            let t = 3.0 * i as f64 / 49.0;
            let k = kraus_family(&spec, t).unwrap();
            complete = complete.max(k.completeness_defect());
            let sup = k.superop().unwrap();
            if name.flip_axis().is_some() {
                let u = vec![0.0; sys.num_controls()];
                let prop = propagator(&sys, &u, t).unwrap();
                flow = flow.max(sup.dist_max(&prop.matrix));
            }
            let want = if t == 0.0 {
                1
            } else if name.flip_axis().is_some() {
                2
            } else {
                4
            };
            let r = kraus_rank(&sup).unwrap();
            ranks_ok &= r == want;
            if i < 2 {
                ranks.push(r);
            }
        }
    }
    outcome(
        complete <= 1e-10 && flow <= 1e-10 && ranks_ok,
        format!("completeness {complete:.1e}, flip flow residual {flow:.1e}, ranks at t = 0 and t > 0 {ranks:?}"),
    )
}

fn semialgebra_suite() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let iso = orbit_wedge([1.0; 3]).unwrap();
    let none = semialgebra_probe(
        &iso,
        &ProbeOptions {
            pairs: 10_000,
            ..Default::default()
        },
    )
    .unwrap()
    .is_none();
    pass &= none;
    notes.push(format!("case i witness-free over 1e4 pairs: {none}"));

    let ice = saturate(&initial_wedge(&example2(1.0)), &SaturateOptions::default())
        .unwrap()
        .wedge;
    let g2 = gamma0([1.0, 0.0, 1.0]);
    let w2 = probe_pair(&ice, &(&g2 + &h(Z)), &(&g2 + &h(X)), PROBE_T, 4, PROBE_TOL).unwrap();
    let target = (&p(X) + &p(Z)).scale(0.5);
    let rel2 = w2
        .map(|w| w.offending.dist(&target) / target.norm())
        .unwrap_or(f64::INFINITY);
    pass &= rel2 < 0.05;
    notes.push(format!("ice-cone witness vs (px+pz)/2 relative {rel2:.1e}"));

    let w3 = saturate(&initial_wedge(&example3(1.0)), &SaturateOptions::default())
        .unwrap()
        .wedge;
    let g3 = gamma0([1.0, 1.0, 2.0]);
    let dir = &h(X) + &p(Y);
    let cos = probe_pair(&w3, &(&g3 + &h(Z)), &h(Y), 1.0, 2, PROBE_TOL)
        .unwrap()
        .map(|w| w.offending.inner(&dir) / (w.offending.norm() * dir.norm()))
        .unwrap_or(0.0);
    let outside = !w3.contains(&dir, CONE_TOL);
    pass &= cos.abs() > 0.5 && outside;
    notes.push(format!("third witness cos to Hx+py {cos:.3}, Hx+py outside: {outside}"));

    let mut defect = 0.0f64;
    let mut verdicts = true;
    let mut ii_exact = false;
    for case in Case::ALL {
        let r = semialgebra_case(case, &CaseParams::default()).unwrap();
        defect = defect.max(r.tangent_defect);
        verdicts &= r.semialgebra == (case == Case::I);
        if case == Case::Ii {
            let want = &Mat::diag_real(&[-2.0, 2.0, 0.0]) - &h(Z);
            ii_exact = r.witness.is_some_and(|(b, c)| b == p(Z) && c == want);
        }
    }
    pass &= defect <= 1e-8 && verdicts && ii_exact;
    notes.push(format!(
        "tangent defect {defect:.1e}, case ii commutator exact: {ii_exact}"
    ));
    outcome(pass, notes.join(", "))
}

fn dual_cone() -> Outcome {
    let mut rng = task_rng(0xacc9, 0);
    let mut strict = 0;
    let mut boundary = 0.0f64;
    let mut below = 0.0f64;
    let mut seen = [0usize; 3];
    for (gi, g) in [[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [3.0, 2.0, 1.0]]
        .into_iter()
        .enumerate()
    {
        for i in 0..200 {
            let v: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s = Mat::from_real(3, 3, &v);
            let mut s = (&s + &s.transpose()).scale(0.5);
            if i % 4 == 0 {
                // pin one sample in four to the boundary of the dual cone
                let v = dual_cone_value(g, &s).unwrap();
                let tr = g.iter().sum::<f64>();
                s = &s - &Mat::identity(3).scale(v / tr);
            }
            let exact = dual_cone_value(g, &s).unwrap();
            let mc = orbit_min(&s, g, 10_000, (gi * 1000 + i) as u64).unwrap();
            below = below.max(exact - mc);
            if exact > 1e-8 && mc < -1e-8 {
                strict += 1;
            }
            if exact.abs() <= 1e-8 {
                seen[0] += 1;
                boundary = boundary.max(exact.abs()).max((-mc).max(0.0));
            } else if exact > 0.0 {
                seen[1] += 1;
            } else {
                seen[2] += 1;
            }
        }
    }
    outcome(
        strict == 0 && below <= 1e-8 && boundary <= 1e-8,
        format!(
            "{} boundary / {} interior / {} exterior, strict disagreements {strict}, sampled min below exact by {below:.1e}, boundary slack {boundary:.1e}",
            seen[0], seen[1], seen[2]
        ),
    )
}

fn random_hermitian(n: usize, rng: &mut impl Rng) -> Mat {
    let v = (0..n * n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let m = Mat::from_complex(n, n, v);
    (&m + &m.adjoint()).scale(0.5)
}

fn random_unital(rng: &mut impl Rng, closed: bool) -> ControlSystem {
    let rep = Rep::Qubit;
    let drift = random_hermitian(2, rng);
    let controls = (0..2).map(|_| random_hermitian(2, rng)).collect();
    let ops = if closed {
        vec![]
    } else {
        let k = rng.random_range(1..=3);
        (0..k)
            .map(|_| (random_hermitian(2, rng), rng.random_range(0.0..1.0)))
            .collect()
    };
    ControlSystem::quantum(rep, drift, controls, ops).unwrap()
}

fn cptp_contraction() -> Outcome {
    let mut rng = task_rng(0xacca, 0);
    let mut cptp_fail = 0;
    let mut tp = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let mut incr = f64::NEG_INFINITY;
    let mut drift = 0.0f64;
    for _ in 0..100 {
        let sys = random_unital(&mut rng, false);
        for t in [0.1, 1.0, 10.0] {
            let u: Vec<f64> = (0..2).map(|_| rng.random_range(-U_MAX..U_MAX)).collect();
            let a = cptp_audit(&propagator(&sys, &u, t).unwrap().matrix).unwrap();
            cptp_fail += usize::from(!(a.is_tp && a.is_cp));
            tp = tp.max(a.tp_residual);
            min_eig = min_eig.min(a.choi_min_eig);
        }
        let sched = random_schedule(2, 4, 2.0, U_MAX, &mut rng);
        incr = incr.max(contraction_audit(&sys, &sched, 64).unwrap().max_increment);
        let closed = random_unital(&mut rng, true);
        let sched = random_schedule(2, 4, 2.0, U_MAX, &mut rng);
        drift = drift.max(contraction_audit(&closed, &sched, 64).unwrap().max_drift);
    }
    outcome(
        cptp_fail == 0 && incr <= 1e-9 && drift <= 1e-10,
        format!(
            "{cptp_fail} CPTP failures (tp {tp:.1e}, Choi min {min_eig:.1e}), max increment {incr:.1e}, closed drift {drift:.1e}"
        ),
    )
}

fn reachability() -> Outcome {
    let sys = example1(3.0, 2.0, 1.0);
    let target = propagate(&sys, &Schedule::single(0.7, vec![0.3, -0.5]).unwrap()).unwrap();
    let d = steer(&sys, &target, 1, &SteerOptions::default()).unwrap().distance;
    let spec = ChannelSpec::new(ChannelName::PhaseFlip)
        .with_rates(vec![0.4])
        .with_controls(vec![Label::One(X), Label::One(Y)])
        .with_drift(Some(Label::One(Z)));
    let flip = build_system(&spec).unwrap();
    let (_, slope) = trotter_slope(&flip, &[2.0, 0.0], &[0.0, -1.5], &[0.2, 0.1, 0.05, 0.025, 0.0125]).unwrap();
    outcome(
        d < 1e-6 && (slope - 2.0).abs() <= 0.2,
        format!("steer distance {d:.1e}, Trotter slope {slope:.3}"),
    )
}

#[test]
fn acceptance() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "commutation table", Some(secs(1)), commutation_table),
        run(2, "controllability dimensions", Some(secs(10)), controllability),
        run(3, "first example saturation", Some(secs(30)), example1_saturation),
        run(4, "ice cone geometry", None, example2_geometry),
        run(5, "third example expansion", None, example3_expansion),
        run(6, "dissipator and cone closed forms", None, closed_forms),
        run(7, "Kraus families", None, kraus_families),
        run(8, "semialgebra suite", None, semialgebra_suite),
        run(9, "dual cone criterion", None, dual_cone),
        run(10, "CPTP and contraction", None, cptp_contraction),
        run(11, "reachability", None, reachability),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, &ok)| !ok)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

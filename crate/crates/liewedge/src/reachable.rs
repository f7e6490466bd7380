//! Piecewise-constant propagation, sampling of the system semigroup and steering.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::lindblad::{ControlSystem, Superop};
use crate::matcore::{expm, Mat};
use crate::par::{task_rng, Exec};

/// Default amplitude bound for sampling and steering.
pub const U_MAX: f64 = 5.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub u: Vec<f64>,
}

/// Ordered control segments, earliest first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Schedule {
    segments: Vec<Segment>,
}

impl Schedule {
    pub fn new(segments: Vec<Segment>) -> Result<Schedule> {
        for s in &segments {
            if !(s.duration >= 0.0 && s.duration.is_finite()) {
                return invalid(format!("segment duration must be finite and >= 0, got {}", s.duration));
            }
        }
        Ok(Schedule { segments })
    }

    pub fn empty() -> Schedule {
        Schedule::default()
    }

    pub fn single(duration: f64, u: Vec<f64>) -> Result<Schedule> {
        Schedule::new(vec![Segment { duration, u }])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }
}

/// Π expm(−Δt_i ℒ_{u_i}), later segments acting on the left.
pub fn propagate(sys: &ControlSystem, sched: &Schedule) -> Result<Superop> {
    let mut m = Mat::identity(sys.rep().carrier_dim());
    for s in sched.segments() {
        if s.duration < 0.0 {
            return invalid("negative segment duration");
        }
        let l = sys.generator(&s.u)?;
        m = &expm(&l.scale(-s.duration)) * &m;
    }
    Ok(Superop {
        matrix: m,
        rep: sys.rep(),
    })
}

/// Knobs of [`sample_reachable`].
#[derive(Clone, Copy, Debug)]
pub struct SampleOptions {
    pub n: usize,
    /// Segments per schedule (ℓ ≥ 1).
    pub depth: usize,
    pub horizon: f64,
    pub u_max: f64,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions {
            n: 100,
            depth: 3,
            horizon: 1.0,
            u_max: U_MAX,
            seed: 0x5a3,
            exec: Exec::default(),
        }
    }
}

/// Random schedule: durations uniform on (0, horizon/ℓ], amplitudes uniform on [−u_max, u_max].
pub fn random_schedule(m: usize, depth: usize, horizon: f64, u_max: f64, rng: &mut impl Rng) -> Schedule {
    let segments = (0..depth)
        .map(|_| Segment {
            duration: (1.0 - rng.random::<f64>()) * horizon / depth as f64,
            u: (0..m).map(|_| rng.random_range(-u_max..=u_max)).collect(),
        })
        .collect();
    Schedule { segments }
}

/// Propagators of random schedules, each drawn from its own stream.
pub fn sample_reachable(sys: &ControlSystem, opts: &SampleOptions) -> Result<Vec<(Schedule, Superop)>> {
    if opts.depth == 0 {
        return invalid("sampling depth must be at least 1");
    }
    if !(opts.horizon > 0.0 && opts.u_max >= 0.0) {
        return invalid("horizon must be positive and u_max nonnegative");
    }
    opts.exec
        .map(opts.n, |k| {
            let mut rng = task_rng(opts.seed, k as u64);
            let s = random_schedule(sys.num_controls(), opts.depth, opts.horizon, opts.u_max, &mut rng);
            let p = propagate(sys, &s)?;
            Ok((s, p))
        })
        .into_iter()
        .collect()
}

/// s(t) = Σ_k ‖X(t)B_k‖² along a schedule.
#[derive(Clone, Debug)]
pub struct ContractionReport {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest s(t_{i+1}) − s(t_i); positive values violate contraction.
    pub max_increment: f64,
    /// Largest |s(t_i) − s(0)|.
    pub max_drift: f64,
}

impl ContractionReport {
    pub fn is_contracting(&self, tol: f64) -> bool {
        self.max_increment <= tol
    }
}

/// Evaluates s(t) on `grid + 1` equally spaced times in the coherence representation.
pub fn contraction_audit(sys: &ControlSystem, sched: &Schedule, grid: usize) -> Result<ContractionReport> {
    if !sys.is_unital() {
        let d = sys.dissipator();
        return Err(Error::NotUnital { residual: d.max_abs() });
    }
    if grid == 0 {
        return invalid("grid must be positive");
    }
    let total = sched.total_duration();
    let times: Vec<f64> = (0..=grid).map(|i| total * i as f64 / grid as f64).collect();
    let gens: Vec<Mat> = sched
        .segments()
        .iter()
        .map(|s| sys.generator(&s.u))
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(times.len());
    for &t in &times {
        let mut m = Mat::identity(sys.rep().carrier_dim());
        let mut left = t;
        for (s, l) in sched.segments().iter().zip(&gens) {
            let dt = s.duration.min(left);
            if dt <= 0.0 {
                break;
            }
            m = &expm(&l.scale(-dt)) * &m;
            left -= dt;
        }
        let c = Superop {
            matrix: m,
            rep: sys.rep(),
        }
        .coherence()?;
        values.push(c.norm().powi(2));
    }
    let max_increment = values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let max_drift = values.iter().map(|v| (v - values[0]).abs()).fold(0.0, f64::max);
    Ok(ContractionReport {
        times,
        values,
        max_increment: if max_increment.is_finite() { max_increment } else { 0.0 },
        max_drift,
    })
}

/// Knobs of [`steer`].
#[derive(Clone, Copy, Debug)]
pub struct SteerOptions {
    pub restarts: usize,
    /// Nelder–Mead iterations per restart.
    pub budget: u64,
    pub u_max: f64,
    /// Initial durations are drawn from (0, horizon].
    pub horizon: f64,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for SteerOptions {
    fn default() -> Self {
        SteerOptions {
            restarts: 8,
            budget: 4000,
            u_max: U_MAX,
            horizon: 2.0,
            seed: 0x57ee,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SteerResult {
    pub schedule: Schedule,
    pub distance: f64,
    /// Best distance among the restart starting points.
    pub initial_distance: f64,
    /// Final distance of each restart.
    pub restart_distances: Vec<f64>,
}

struct Objective<'a> {
    sys: &'a ControlSystem,
    target: &'a Mat,
    depth: usize,
}

impl Objective<'_> {
    fn schedule(&self, p: &[f64]) -> Schedule {
        let m = self.sys.num_controls();
        let segments = (0..self.depth)
            .map(|j| {
                let q = &p[j * (m + 1)..(j + 1) * (m + 1)];
                Segment {
                    duration: q[0].abs(),
                    u: q[1..].to_vec(),
                }
            })
            .collect();
        Schedule { segments }
    }

    fn distance(&self, p: &[f64]) -> f64 {
        match propagate(self.sys, &self.schedule(p)) {
            Ok(s) => s.matrix.dist(self.target),
            Err(_) => f64::INFINITY,
        }
    }
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.distance(p).powi(2))
    }
}

/// Derivative-free search for an ℓ-segment schedule reaching `target`.
///
/// Parameters are one duration (taken by absolute value) and m amplitudes per
/// segment. Each restart starts from a random point and runs Nelder–Mead; the
/// best result over restarts is returned. No optimality is claimed.
pub fn steer(sys: &ControlSystem, target: &Superop, depth: usize, opts: &SteerOptions) -> Result<SteerResult> {
    if target.rep != sys.rep() {
        return invalid("target and system use different representations");
    }
    if depth == 0 {
        let d = Mat::identity(sys.rep().carrier_dim()).dist(&target.matrix);
        return Ok(SteerResult {
            schedule: Schedule::empty(),
            distance: d,
            initial_distance: d,
            restart_distances: vec![d],
        });
    }
    let m = sys.num_controls();
    let dim = depth * (m + 1);
    let runs = opts
        .exec
        .map(opts.restarts.max(1), |k| -> Result<(Vec<f64>, f64, f64)> {
            let mut rng = task_rng(opts.seed, k as u64);
            let start: Vec<f64> = (0..dim)
                .map(|i| {
                    if i % (m + 1) == 0 {
                        (1.0 - rng.random::<f64>()) * opts.horizon / depth as f64
                    } else {
                        rng.random_range(-opts.u_max..=opts.u_max)
                    }
                })
                .collect();
            let obj = Objective {
                sys,
                target: &target.matrix,
                depth,
            };
            let d0 = obj.distance(&start);
            let mut simplex = vec![start.clone()];
            for i in 0..dim {
                let mut v = start.clone();
                v[i] += if i % (m + 1) == 0 { 0.1 } else { 0.5 };
                simplex.push(v);
            }
            let solver = NelderMead::new(simplex)
                .with_sd_tolerance(1e-28)
                .map_err(|e| Error::NonConvergence(e.to_string()))?;
            let res = Executor::new(obj, solver)
                .configure(|s| s.max_iters(opts.budget))
                .run()
                .map_err(|e| Error::NonConvergence(e.to_string()))?;
            let best = res.state().get_best_param().cloned().unwrap_or(start);
            let obj = Objective {
                sys,
                target: &target.matrix,
                depth,
            };
            let d = obj.distance(&best);
            Ok((best, d, d0))
        });
    let runs: Vec<(Vec<f64>, f64, f64)> = runs.into_iter().collect::<Result<_>>()?;
    let initial_distance = runs.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let restart_distances: Vec<f64> = runs.iter().map(|r| r.1.min(r.2)).collect();
    let (best, distance) = runs
        .iter()
        .map(|(p, d, _)| (p, *d))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one restart");
    let obj = Objective {
        sys,
        target: &target.matrix,
        depth,
    };
    Ok(SteerResult {
        schedule: obj.schedule(best),
        distance: distance.min(initial_distance),
        initial_distance,
        restart_distances,
    })
}

/// ‖e^{−tB/2} e^{−tA/2} − e^{−t(A+B)/2}‖ for A = ℒ_{u₁}, B = ℒ_{u₂}.
pub fn trotter_defect(sys: &ControlSystem, u1: &[f64], u2: &[f64], t: f64) -> Result<f64> {
    let a = sys.generator(u1)?;
    let b = sys.generator(u2)?;
    let sched = Schedule::new(vec![
        Segment {
            duration: t / 2.0,
            u: u1.to_vec(),
        },
        Segment {
            duration: t / 2.0,
            u: u2.to_vec(),
        },
    ])?;
    let p = propagate(sys, &sched)?;
    Ok(p.matrix.dist(&expm(&(&a + &b).scale(-t / 2.0))))
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return invalid("slope fit needs at least two matching points");
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return invalid("slope fit needs positive data");
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Trotter defects on `ts` and their log-log slope.
pub fn trotter_slope(sys: &ControlSystem, u1: &[f64], u2: &[f64], ts: &[f64]) -> Result<(Vec<f64>, f64)> {
    let d: Vec<f64> = ts
        .iter()
        .map(|&t| trotter_defect(sys, u1, u2, t))
        .collect::<Result<_>>()?;
    let s = loglog_slope(ts, &d)?;
    Ok((d, s))
}

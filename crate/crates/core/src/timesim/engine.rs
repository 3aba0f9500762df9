use std::f64::consts::TAU;

use nalgebra::DMatrix;

use super::{sample_count, Signal, SimConfig, SimError, SimTrace};
use crate::lincore::{zoh_discretize, Cascade, StateSpace};
use crate::resetfreq::ResetElement;

/// Row-major discrete system with the reset rows of `A_ρ` precomputed.
struct Stepper {
    n: usize,
    ad: Vec<f64>,
    bd: Vec<f64>,
    c: Vec<f64>,
    d: f64,
    reset_rows: Vec<(usize, Vec<f64>)>,
    x: Vec<f64>,
    scratch: Vec<f64>,
}

impl Stepper {
    fn new(ss: &StateSpace, a_rho: Option<&DMatrix<f64>>, dt: f64) -> Result<Self, SimError> {
        let n = ss.order();
        let disc = zoh_discretize(ss, dt)?;
        let ad = (0..n * n).map(|k| disc.ad[(k / n, k % n)]).collect();
        let mut reset_rows = Vec::new();
        if let Some(a) = a_rho {
            for i in 0..n {
                let row: Vec<f64> = (0..n).map(|j| a[(i, j)]).collect();
                let identity = row
                    .iter()
                    .enumerate()
                    .all(|(j, &v)| v == if i == j { 1.0 } else { 0.0 });
                if !identity {
                    reset_rows.push((i, row));
                }
            }
        }
        Ok(Self {
            n,
            ad,
            bd: disc.bd.iter().copied().collect(),
            c: disc.c.iter().copied().collect(),
            d: disc.d,
            reset_rows,
            x: vec![0.0; n],
            scratch: vec![0.0; n],
        })
    }

    fn output(&self, u: f64) -> f64 {
        dot(&self.c, &self.x) + self.d * u
    }

    fn reset(&mut self) {
        if self.reset_rows.len() == 1
            && self.reset_rows[0]
                .1
                .iter()
                .enumerate()
                .all(|(j, &v)| j == self.reset_rows[0].0 || v == 0.0)
        {
            let (i, ref row) = self.reset_rows[0];
            self.x[i] *= row[i];
            return;
        }
        let new: Vec<(usize, f64)> = self
            .reset_rows
            .iter()
            .map(|(i, row)| (*i, dot(row, &self.x)))
            .collect();
        for (i, v) in new {
            self.x[i] = v;
        }
    }

    fn advance(&mut self, u: f64) {
        let n = self.n;
        for i in 0..n {
            self.scratch[i] = dot(&self.ad[i * n..(i + 1) * n], &self.x) + self.bd[i] * u;
        }
        std::mem::swap(&mut self.x, &mut self.scratch);
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sign-change test on consecutive trigger samples.
#[inline]
fn crossed(prev: f64, cur: f64) -> bool {
    prev * cur < 0.0 || (cur == 0.0 && prev != 0.0)
}

fn check_resolution(signal: &Signal, cfg: &SimConfig) -> Result<(), SimError> {
    cfg.validate()?;
    let fastest = match signal {
        Signal::MultiSine { tones, omega } => tones.iter().map(|t| t.omega).fold(*omega, f64::max),
        other => other.base_omega(),
    };
    if !(signal.base_omega() > 0.0) {
        return Err(SimError::Config("signal frequency must be positive".into()));
    }
    if TAU / fastest / cfg.dt < 20.0 {
        return Err(SimError::Config(format!(
            "dt = {} gives fewer than 20 samples per period at {fastest} rad/s",
            cfg.dt
        )));
    }
    Ok(())
}

fn empty_trace(input: &Signal, cfg: &SimConfig, len: usize) -> SimTrace {
    SimTrace {
        time: Vec::with_capacity(len),
        e: Vec::with_capacity(len),
        u: Vec::with_capacity(len),
        y: Vec::with_capacity(len),
        control_input: Vec::with_capacity(len),
        reset_flags: Vec::with_capacity(len),
        input: input.clone(),
        config: *cfg,
    }
}

/// Open-loop response of a reset element to `input`. The trigger is the
/// input itself, or `sin(ωt − φ)` at the input's base frequency when
/// `trigger_shift = Some(φ)`. `u`, `y` and `control_input` all hold the
/// element output.
pub fn simulate_open_loop(
    el: &ResetElement,
    input: &Signal,
    trigger_shift: Option<f64>,
    cfg: &SimConfig,
) -> Result<SimTrace, SimError> {
    check_resolution(input, cfg)?;
    let mut st = Stepper::new(el.base(), Some(el.a_rho()), cfg.dt)?;
    let len = sample_count(cfg, input.base_omega());
    let w = input.base_omega();
    let trigger = |t: f64, e: f64| match trigger_shift {
        Some(phi) => (w * t - phi).sin(),
        None => e,
    };
    let mut tr = empty_trace(input, cfg, len);
    let mut prev = 0.0;
    for k in 0..len {
        let t = k as f64 * cfg.dt;
        let e = input.value(t);
        let trig = trigger(t, e);
        let reset = k > 0 && crossed(prev, trig);
        if reset {
            st.reset();
        }
        let y = st.output(e);
        st.advance(e);
        prev = trig;
        tr.time.push(t);
        tr.e.push(e);
        tr.u.push(y);
        tr.y.push(y);
        tr.control_input.push(y);
        tr.reset_flags.push(reset);
    }
    Ok(tr)
}

/// Open-loop response of a purely linear system, with no reset logic at all.
pub fn simulate_linear(
    ss: &StateSpace,
    input: &Signal,
    cfg: &SimConfig,
) -> Result<SimTrace, SimError> {
    check_resolution(input, cfg)?;
    let mut st = Stepper::new(ss, None, cfg.dt)?;
    let len = sample_count(cfg, input.base_omega());
    let mut tr = empty_trace(input, cfg, len);
    for k in 0..len {
        let t = k as f64 * cfg.dt;
        let e = input.value(t);
        let y = st.output(e);
        st.advance(e);
        tr.time.push(t);
        tr.e.push(e);
        tr.u.push(y);
        tr.y.push(y);
        tr.control_input.push(y);
        tr.reset_flags.push(false);
    }
    Ok(tr)
}

/// Controller as a reset front end followed by linear blocks. Simulated as
/// one discretized system whose input `e` is held over each step.
#[derive(Debug, Clone)]
pub struct ControllerChain {
    front: ResetElement,
    back: Cascade,
    combined: ResetElement,
    front_c: Vec<f64>,
}

impl ControllerChain {
    pub fn new(front: ResetElement, back: Cascade) -> Result<Self, SimError> {
        let back_ss = back.to_state_space()?;
        let base = front.base().series(&back_ss);
        let (nf, n) = (front.order(), base.order());
        let mut a_rho = DMatrix::identity(n, n);
        a_rho.view_mut((0, 0), (nf, nf)).copy_from(front.a_rho());
        let combined = ResetElement::new(base, a_rho)
            .map_err(|e| SimError::Config(e.to_string()))?
            .labelled(front.label().to_string());
        let mut front_c = vec![0.0; n];
        front_c[..nf].copy_from_slice(front.base().c().as_slice());
        Ok(Self {
            front,
            back,
            combined,
            front_c,
        })
    }

    /// Purely linear controller.
    pub fn linear(back: Cascade) -> Result<Self, SimError> {
        let unity =
            ResetElement::new(StateSpace::gain(1.0), DMatrix::zeros(0, 0)).expect("empty system");
        Self::new(unity.labelled("linear"), back)
    }

    pub fn front(&self) -> &ResetElement {
        &self.front
    }

    pub fn back(&self) -> &Cascade {
        &self.back
    }

    /// Whole controller as one reset element from `e` to the plant input.
    pub fn combined(&self) -> &ResetElement {
        &self.combined
    }

    /// Same chain with every reset disabled.
    pub fn base_linear(&self) -> Result<Self, SimError> {
        let n = self.front.order();
        let front = ResetElement::new(self.front.base().clone(), DMatrix::identity(n, n))
            .map_err(|e| SimError::Config(e.to_string()))?;
        Self::new(front, self.back.clone())
    }
}

/// Unity negative feedback `e = r − y` around a strictly proper plant. `u`
/// is the output of the reset front end, `control_input` the plant input.
pub fn simulate_closed_loop(
    ctrl: &ControllerChain,
    plant: &StateSpace,
    reference: &Signal,
    cfg: &SimConfig,
) -> Result<SimTrace, SimError> {
    check_resolution(reference, cfg)?;
    if plant.d() != 0.0 {
        return Err(SimError::Config(
            "plant must be strictly proper (D = 0)".into(),
        ));
    }
    let el = ctrl.combined();
    let mut c = Stepper::new(el.base(), Some(el.a_rho()), cfg.dt)?;
    let mut p = Stepper::new(plant, None, cfg.dt)?;
    let front_d = ctrl.front.base().d();
    let len = sample_count(cfg, reference.base_omega());
    let limit = 1e6 * reference.peak_bound();
    let mut tr = empty_trace(reference, cfg, len);
    let mut prev = 0.0;
    for k in 0..len {
        let t = k as f64 * cfg.dt;
        let r = reference.value(t);
        let y = p.output(0.0);
        if !y.is_finite() || (limit > 0.0 && y.abs() > limit) || (limit == 0.0 && y != 0.0) {
            return Err(SimError::Unstable {
                t,
                y: y.abs(),
                limit,
            });
        }
        let e = r - y;
        let reset = k > 0 && crossed(prev, e);
        if reset {
            c.reset();
        }
        let u_front = dot(&ctrl.front_c, &c.x) + front_d * e;
        let u = c.output(e);
        c.advance(e);
        p.advance(u);
        prev = e;
        tr.time.push(t);
        tr.e.push(e);
        tr.u.push(u_front);
        tr.y.push(y);
        tr.control_input.push(u);
        tr.reset_flags.push(reset);
    }
    Ok(tr)
}

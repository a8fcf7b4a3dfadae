//! Bridge approximation: concatenation at interior zeros and the jack
//! construction that lifts a bridge by stacking flipped pedestal excursions.

use lattice::path::{format_time, LatticePath, Time};
use lattice::{first_in_interval, in_bridge_ball, SignFamily, Target};
use num_traits::{ToPrimitive, Zero};

use crate::certificate::Certificate;
use crate::engine::{with_retries, Steerer};
use crate::reset::{densify_after, reduce_sweep};
use crate::segment::Segment;
use crate::SteerError;

/// Tuning of the bridge construction. Heights are lattice units, gaps are
/// grid steps.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeParams {
    /// Resets leave the path strictly below this height.
    pub reset_height: i64,
    /// Resets leave no excursion of this length or longer.
    pub reset_gap: usize,
    pub pedestal_min: i64,
    pub pedestal_max: i64,
    /// Full rebuilds, each after a random restart, before giving up.
    pub attempts: usize,
    /// Resets extend this many steps past the end of the current bridge.
    pub margin: usize,
}

impl Default for BridgeParams {
    fn default() -> Self {
        BridgeParams { reset_height: 5, reset_gap: 8, pedestal_min: 1, pedestal_max: 2, attempts: 16, margin: 64 }
    }
}

/// Structural record of a construction, in call order.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Bridge { a: Time, b: Time },
    Split { z: Time },
    Reset { d: Time },
    Jack { lift: i64, levels: usize },
    Pedestal { a: Time, height: i64, tries: usize },
    Terminal { c: Time, crossing: Time, tries: usize },
    /// The outer `levels` levels stay lifted past the horizon.
    OpenEnd { levels: usize },
}

/// One jack level: a pedestal excursion of `height` starting at index `g`.
#[derive(Debug, Clone, Copy)]
struct Level {
    a: Time,
    g: usize,
    d: usize,
    height: i64,
    base: i64,
    /// First zero after the left ramp reaches the top of the level.
    next: usize,
}

/// The outermost bridge target and the lift accumulated by the enclosing
/// jacks. Errors are measured against it, so inner levels may finish past
/// the end of their own segment.
struct Frame {
    f: Segment,
    offset: i64,
}

/// Steering state plus the parameters of one bridge construction.
pub struct Builder {
    pub st: Steerer,
    pub params: BridgeParams,
    /// Error budget, lattice units.
    budget: f64,
    /// End of the measured window: past it the path is free.
    horizon: Option<Time>,
    pub events: Vec<Event>,
}

impl Builder {
    /// `rho` is the sup-norm radius the construction has to respect.
    pub fn new(st: Steerer, params: BridgeParams, rho: f64) -> Result<Self, SteerError> {
        let budget = st.lat(rho);
        let floor = (params.pedestal_max + params.reset_height) as f64;
        if budget <= floor {
            return Err(SteerError::TooCoarse(format!(
                "rho = {rho} is {budget:.2} lattice units, the construction needs more than {floor}"
            )));
        }
        Ok(Builder { st, params, budget, horizon: None, events: Vec::new() })
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    fn dx(&self) -> Time {
        self.st.dx()
    }

    fn units(&self, y: Time) -> f64 {
        (y / self.dx()).to_f64().unwrap_or(f64::NAN)
    }

    fn level(&self, n: i64) -> Time {
        self.dx() * Time::from_integer(n as i128)
    }

    /// Segments whose sup is at most this many units are approximated by a
    /// plain reset.
    fn flat_units(&self) -> f64 {
        (self.budget / 2.0).floor()
    }

    /// Bridges ending at `t` may leave their outer levels unflipped when
    /// the lifted path stays in budget up to `t`.
    pub fn with_horizon(mut self, t: Time) -> Self {
        self.horizon = Some(t);
        self
    }

    /// Reset after `after` on a window reaching `margin` steps past `until`.
    pub fn reset(&mut self, after: Time, until: Time) -> Result<usize, SteerError> {
        let d = self.st.first_zero_after(after)?;
        let end = (self.st.index_ceil(until) + self.params.margin).min(self.st.steps_count());
        self.events.push(Event::Reset { d: self.st.time(d) });
        if end > d {
            reduce_sweep(&mut self.st, d, end, self.params.reset_height as f64)?;
            let gap = self.st.dt() * Time::from_integer(self.params.reset_gap as i128);
            densify_after(&mut self.st, d, end, gap)?;
        }
        Ok(d)
    }

    /// Approximate the nonnegative bridge `f` (zero at both ends) after the
    /// zero at index `anchor`, which should lie just after `f.start()`.
    pub fn bridge(&mut self, f: &Segment, anchor: usize) -> Result<(), SteerError> {
        let fr = Frame { f: f.clone(), offset: 0 };
        self.bridge_in(f, anchor, &fr)
    }

    fn bridge_in(&mut self, f: &Segment, anchor: usize, fr: &Frame) -> Result<(), SteerError> {
        let (a, b) = (f.start(), f.end());
        self.events.push(Event::Bridge { a, b });
        if self.units(f.sup()) <= self.flat_units() {
            self.reset(self.st.time(anchor), b)?;
            return Ok(());
        }
        let dx = self.dx();
        if let Some(&(z, _)) = f.interior().iter().find(|p| p.1 < dx) {
            let f = f.zeroed_at(z);
            self.bridge_in(&f.restrict(a, z), anchor, fr)?;
            self.events.push(Event::Split { z });
            let next = self.st.first_zero_after(z)?;
            return self.bridge_in(&f.restrict(z, b), next, fr);
        }
        self.jack(f, anchor, fr)
    }

    fn jack(&mut self, f: &Segment, anchor: usize, fr: &Frame) -> Result<(), SteerError> {
        let f = f.complete_subdivision();
        let b = f.end();
        self.reset(self.st.time(anchor), b).map_err(|e| e.at("V0"))?;
        let hmin = f.interior_min().expect("a tall segment has interior breakpoints");
        let cap = f.sup() - self.level(self.flat_units() as i64);
        let lift = (hmin.min(cap) / self.dx()).floor().to_integer() as i64;
        let jack_at = self.events.len();
        self.events.push(Event::Jack { lift, levels: 0 });

        let mut levels: Vec<Level> = Vec::new();
        let mut base = 0i64;
        let mut next = self.st.first_zero_after(f.tau_left(Time::zero()).max(self.st.time(anchor)))?;
        while base < lift {
            let lv = self.pedestal(&f, fr, next, base, lift).map_err(|e| e.at(format!("V1 level {}", levels.len() + 1)))?;
            base += lv.height;
            next = lv.next;
            levels.push(lv);
        }
        self.events[jack_at] = Event::Jack { lift, levels: levels.len() };

        let inner = f.lowered(self.level(lift));
        let inner_fr = Frame { f: fr.f.clone(), offset: fr.offset + lift };
        self.bridge_in(&inner, next, &inner_fr)
            .map_err(|e| e.at(format!("V2 [{}, {}]", format_time(inner.start()), format_time(inner.end()))))?;

        let mut after = self.st.time(next);
        for (k, lv) in levels.iter().enumerate().rev() {
            let found = self.terminal(&f, fr, lv, after);
            if found.is_err() && self.open_end(fr, lv, after) {
                self.events.push(Event::OpenEnd { levels: k + 1 });
                break;
            }
            let (crossing, tg, td) = found.map_err(|e| e.at(format!("V3 level {}", k + 1)))?;
            after = self.st.time(crossing);
            self.flip(lv, tg, td, crossing).map_err(|e| e.at(format!("V4 level {}", k + 1)))?;
            self.restore(crossing, b).map_err(|e| e.at(format!("V4 level {}", k + 1)))?;
        }
        Ok(())
    }

    /// Pick the first excursion after the zero `d0` that can serve as the
    /// pedestal of the level starting at `base`.
    fn pedestal(&mut self, f: &Segment, fr: &Frame, d0: usize, base: i64, lift: i64) -> Result<Level, SteerError> {
        let a = self.st.time(d0);
        let rem = lift - base;
        let lo = self.params.pedestal_min.min(rem);
        let hi = self.params.pedestal_max.min(rem);
        let ramp_end = f.tau_left(self.level(lift));
        let r = self.st.path();
        let v = r.coords();
        for (g, d, h) in excursions_after(r, d0) {
            if r.time(g) > ramp_end {
                break;
            }
            if h < lo || h > hi || v[d] != 0 {
                continue;
            }
            let top = base + h;
            let Some(next) = (d..=r.steps()).find(|&k| v[k] == 0 && r.time(k) >= f.tau_left(self.level(top))) else {
                break;
            };
            // final shape: base + r before the pedestal, base + running max - r
            // on it, base + h + r after it
            let mut run = 0i64;
            let ok = (d0..=next).all(|k| {
                let pred = if k <= g {
                    base + v[k]
                } else if k <= d {
                    run = run.max(v[k]);
                    base + run - v[k]
                } else {
                    top + v[k]
                };
                self.within(fr, r.time(k), pred)
            });
            let paired = ok
                && self
                    .st
                    .first_zero_after(f.tau_right(self.level(top)))
                    .ok()
                    .and_then(|c| self.find_terminal(fr, c, base, h))
                    .is_some();
            if paired {
                self.events.push(Event::Pedestal { a, height: h, tries: 0 });
                return Ok(Level { a, g, d, height: h, base, next });
            }
        }
        Err(SteerError::SearchExhausted { what: "pedestal".into(), tries: 0 })
    }

    /// Pick the first excursion after the right ramp passes the top of `lv`
    /// (and after `after`) that reaches the level height while the error
    /// stays in budget, as `(crossing, g, d)`.
    fn terminal(&mut self, f: &Segment, fr: &Frame, lv: &Level, after: Time) -> Result<(usize, usize, usize), SteerError> {
        let top = lv.base + lv.height;
        let d0 = self.st.first_zero_after(f.tau_right(self.level(top)).max(after))?;
        match self.find_terminal(fr, d0, lv.base, lv.height) {
            Some(found) => {
                self.events.push(Event::Terminal { c: self.st.time(d0), crossing: self.st.time(found.0), tries: 0 });
                Ok(found)
            }
            None => {
                let (found, tries) = self.merge_terminal(fr, d0, lv)?;
                self.events.push(Event::Terminal { c: self.st.time(d0), crossing: self.st.time(found.0), tries });
                Ok(found)
            }
        }
    }

    /// True when `f` ends at the horizon and the path, still lifted to the
    /// top of `lv`, stays in budget from `after` to the end.
    fn open_end(&self, fr: &Frame, lv: &Level, after: Time) -> bool {
        if self.horizon.map_or(true, |t| fr.f.end() < t) {
            return false;
        }
        let top = lv.base + lv.height;
        let r = self.st.path();
        let v = r.coords();
        let end = self.st.index_ceil(fr.f.end()).min(r.steps());
        (self.st.index_ceil(after)..=end).all(|k| self.within(fr, r.time(k), top + v[k]))
    }

    /// True when `pred`, in lattice units above the frame offset, is within
    /// budget of the frame target at `t`.
    fn within(&self, fr: &Frame, t: Time, pred: i64) -> bool {
        (self.units(fr.f.value(t)) - (fr.offset + pred) as f64).abs() < self.budget
    }

    /// Merge two consecutive excursions into one of the summed height with
    /// an all-(-1) restart that keeps the second one positive, until the
    /// merged excursion serves as a terminal for `lv`.
    fn merge_terminal(&mut self, fr: &Frame, d0: usize, lv: &Level) -> Result<((usize, usize, usize), usize), SteerError> {
        let end = fr.f.end();
        let r = self.st.path();
        let exc: Vec<_> = excursions_after(r, d0).take_while(|e| r.time(e.0) < end).collect();
        for (tries, w) in exc.windows(2).enumerate() {
            let ((g1, _, h1), (g2, d2, h2)) = (w[0], w[1]);
            if h1 >= lv.height || h1 + h2 < lv.height {
                continue;
            }
            let a = r.time(g1);
            let q = first_in_interval(r.time(g2), r.time(d2)).expect("nonempty excursion");
            let fam = SignFamily::minus().set(q, 1);
            let next = self.st.preview(a, &fam);
            if let Some(found) = self.find_terminal_in(&next, fr, d0, lv.base, lv.height) {
                self.st.commit(a, &fam, next);
                return Ok((found, tries + 1));
            }
        }
        Err(SteerError::SearchExhausted { what: "terminal excursion".into(), tries: exc.len().saturating_sub(1) })
    }

    fn find_terminal(&self, fr: &Frame, d0: usize, base: i64, height: i64) -> Option<(usize, usize, usize)> {
        self.find_terminal_in(self.st.path(), fr, d0, base, height)
    }

    fn find_terminal_in(&self, r: &LatticePath, fr: &Frame, d0: usize, base: i64, height: i64) -> Option<(usize, usize, usize)> {
        let top = base + height;
        let end = fr.f.end();
        let v = r.coords();
        for (g, d, h) in excursions_after(r, d0) {
            if r.time(g) >= end {
                break;
            }
            if h < height {
                continue;
            }
            let crossing = (g..=d).find(|&k| v[k] == height).expect("excursion reaches its height");
            if r.time(crossing) >= end {
                break;
            }
            // final shape: top + r before the terminal, top - r on it
            let ok = (d0..=crossing).all(|k| {
                let pred = if k <= g { top + v[k] } else { top - v[k] };
                self.within(fr, r.time(k), pred)
            });
            if ok {
                return Some((crossing, g, d));
            }
        }
        None
    }

    /// Undo the lift left after a flipped terminal: two all-(-1) restarts at
    /// the crossing give back the path that followed the terminal, up to a
    /// few flats. Falls back to a reset if the window is still too high.
    fn restore(&mut self, crossing: usize, until: Time) -> Result<(), SteerError> {
        let c = self.st.time(crossing);
        self.st.apply(c, &SignFamily::minus());
        self.st.apply(c, &SignFamily::minus());
        let end = (self.st.index_ceil(until) + self.params.margin).min(self.st.steps_count());
        if self.st.sup(crossing, end) >= self.params.reset_height {
            self.reset(c, until)?;
        }
        Ok(())
    }

    /// Restart at the level's anchor with -1 on the pedestal and on the
    /// terminal: everything between them rises by the pedestal height and the
    /// terminal brings the path back to 0 at the crossing.
    fn flip(&mut self, lv: &Level, tg: usize, td: usize, crossing: usize) -> Result<(), SteerError> {
        let r = self.st.path();
        let number = |g: usize, d: usize| first_in_interval(r.time(g), r.time(d)).expect("nonempty excursion");
        let fam = SignFamily::plus().set(number(lv.g, lv.d), -1).set(number(tg, td), -1);
        self.st.apply(lv.a, &fam);
        let v = self.st.path().coords();
        if v[lv.d] != lv.height || v[crossing] != 0 {
            return Err(SteerError::Internal(format!(
                "flip at {} left {} at the pedestal end and {} at the crossing",
                format_time(lv.a),
                v[lv.d],
                v[crossing]
            )));
        }
        Ok(())
    }
}

/// Excursions starting at index `from` or later, as `(g, d, height)`.
pub fn excursions_after(r: &LatticePath, from: usize) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
    let mut k = from;
    std::iter::from_fn(move || {
        let v = r.coords();
        let n = r.steps();
        while k < n && v[k + 1] == 0 {
            k += 1;
        }
        if k >= n {
            return None;
        }
        let g = k;
        let mut d = k + 1;
        let mut top = v[d];
        while d < n && v[d] != 0 {
            d += 1;
            top = top.max(v[d]);
        }
        k = d;
        Some((g, d, top))
    })
}

/// Result of a bridge or jack construction.
#[derive(Debug, Clone)]
pub struct Built {
    pub path: LatticePath,
    pub certificate: Certificate,
    /// Structure of the successful attempt.
    pub events: Vec<Event>,
    pub attempts: usize,
    pub prefix_checks: usize,
    pub prefix_failures: usize,
}

/// Number `n` and size `h' = h / n` of the lifts of size in `[rho/4, rho/2)`
/// that add up to `h >= rho/2`.
pub fn lift_split(h: f64, rho: f64) -> (usize, f64) {
    assert!(rho > 0.0 && h >= rho / 2.0, "split needs h >= rho/2 > 0");
    let n = (2.0 * h / rho).floor() as usize + 1;
    (n, h / n as f64)
}

fn check_bridge(f: &Segment, rho: f64, delta: Time) -> Result<Target, SteerError> {
    if !f.is_nonnegative() || !f.value(f.start()).is_zero() || !f.value(f.end()).is_zero() {
        return Err(SteerError::BadArgument("a bridge is nonnegative and vanishes at both ends".into()));
    }
    if rho <= 0.0 || delta <= Time::zero() {
        return Err(SteerError::BadArgument("rho and delta must be positive".into()));
    }
    let target = f.to_target()?;
    let osc = target.oscillation(delta).to_f64().unwrap_or(f64::INFINITY);
    if osc >= rho / 4.0 {
        return Err(SteerError::BadArgument(format!("Osc(f, delta) = {osc:.4} is not below rho/4")));
    }
    if f.complete_subdivision().min_gap() <= delta {
        return Err(SteerError::BadArgument("delta must be below the smallest subdivision gap".into()));
    }
    Ok(target)
}

/// Drive `r` into `U_{a,b}(f, rho, delta)` for the nonnegative bridge `f` on
/// `[a, b] = [f.start(), f.end()]`, keeping `[0, D_a]`.
pub fn approximate_bridge(
    f: &Segment,
    rho: f64,
    delta: Time,
    r: &LatticePath,
    seed: u64,
    params: &BridgeParams,
) -> Result<Built, SteerError> {
    let target = check_bridge(f, rho, delta)?;
    let (a, b) = (f.start(), f.end());
    let mut st = Steerer::new(r.clone())?;
    let (st, events, attempts) = with_retries(&mut st, a, params.attempts, seed, |work| {
        let mut builder = Builder::new(work.clone(), params.clone(), rho)?.with_horizon(b);
        let anchor = builder.st.first_zero_after(a)?;
        builder.bridge(f, anchor)?;
        if !in_bridge_ball(builder.st.path(), &target, a, b, rho, delta)? {
            return Err(SteerError::SearchExhausted { what: "bridge ball".into(), tries: 1 });
        }
        *work = builder.st;
        Ok(builder.events)
    })?;
    let certificate = st.certificate(None);
    let (prefix_checks, prefix_failures) = (st.prefix_checks, st.prefix_failures);
    Ok(Built { path: st.into_parts().0, certificate, events, attempts, prefix_checks, prefix_failures })
}

/// Raise the bridge `goal` on `[a', b']` by `lift` inside the frame
/// `[a, b]`, with linear ramps on `[a, a']` and `[b', b]`, and drive `r`
/// into the bridge ball of the lifted profile. A zero lift approximates the
/// goal alone.
#[allow(clippy::too_many_arguments)]
pub fn jack_lift(
    goal: &Segment,
    lift: Time,
    a: Time,
    b: Time,
    rho: f64,
    rho_prime: f64,
    delta: Time,
    r: &LatticePath,
    seed: u64,
    params: &BridgeParams,
) -> Result<Built, SteerError> {
    if lift.is_zero() {
        return approximate_bridge(goal, rho, delta, r, seed, params);
    }
    let (a2, b2) = (goal.start(), goal.end());
    if lift < Time::zero() || !(a < a2 && a2 < b2 && b2 < b) {
        return Err(SteerError::BadArgument("need lift >= 0 and a < a' < b' < b".into()));
    }
    if delta >= (a2 - a).min(b2 - a2).min(b - b2) {
        return Err(SteerError::BadArgument("delta must be below a' - a, b' - a' and b - b'".into()));
    }
    let mut pts = vec![(a, Time::zero())];
    pts.extend(goal.points().iter().map(|&(s, v)| (s, v + lift)));
    pts.push((b, Time::zero()));
    let f = Segment::new(pts)?;
    let osc = f.to_target()?.oscillation(delta).to_f64().unwrap_or(f64::INFINITY);
    if osc >= rho_prime / 4.0 {
        return Err(SteerError::BadArgument(format!("Osc(f, delta) = {osc:.4} is not below rho'/4")));
    }
    approximate_bridge(&f, rho, delta, r, seed, params)
}

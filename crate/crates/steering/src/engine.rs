//! Mutable steering state: the current path plus the steps applied so far.

use lattice::levy::{first_zero_after, inverse_step_after};
use lattice::path::{format_time, LatticePath, PathKind, Time};
use lattice::{seeds, SignFamily};
use num_traits::{ToPrimitive, Zero};

use crate::certificate::{BallSpec, Certificate, Step};
use crate::SteerError;

/// Current path, applied steps and the prefix-preservation audit.
#[derive(Debug, Clone)]
pub struct Steerer {
    r: LatticePath,
    initial_digest: u64,
    steps: Vec<Step>,
    dx: Time,
    /// Number of `F_a` applications whose `[0, D_a]` prefix digest was audited.
    pub prefix_checks: usize,
    pub prefix_failures: usize,
}

/// Run `build` on a copy of `st`. After a failure the copy is dropped, `st`
/// takes one fully random step at `a` and the build starts over. Returns the
/// successful copy, the build's value and the number of attempts used.
pub fn with_retries<T>(
    st: &mut Steerer,
    a: Time,
    attempts: usize,
    seed: u64,
    mut build: impl FnMut(&mut Steerer) -> Result<T, SteerError>,
) -> Result<(Steerer, T, usize), SteerError> {
    assert!(attempts > 0, "at least one attempt");
    let mut last = None;
    for n in 1..=attempts {
        let mut work = st.clone();
        match build(&mut work) {
            Ok(v) => return Ok((work, v, n)),
            Err(e) => last = Some(e),
        }
        let family = SignFamily::random(seeds::derive(seed, &[seeds::label("retry"), n as u64]));
        st.apply(a, &family);
    }
    Err(last.expect("at least one attempt ran"))
}

/// Exact square root of a rational with square numerator and denominator.
pub fn exact_sqrt(x: Time) -> Option<Time> {
    let isqrt = |n: i128| -> Option<i128> {
        if n < 0 {
            return None;
        }
        let s = (n as f64).sqrt().round() as i128;
        (s - 1..=s + 1).find(|&c| c >= 0 && c * c == n)
    };
    Some(Time::new(isqrt(*x.numer())?, isqrt(*x.denom())?))
}

impl Steerer {
    pub fn new(r: LatticePath) -> Result<Self, SteerError> {
        if r.kind() != PathKind::Reflected {
            return Err(SteerError::BadArgument("steering starts from a reflected path".into()));
        }
        let dx = exact_sqrt(r.dt()).ok_or_else(|| {
            SteerError::BadArgument(format!("dt = {} must be the square of a rational", format_time(r.dt())))
        })?;
        Ok(Steerer { initial_digest: r.digest(), r, steps: Vec::new(), dx, prefix_checks: 0, prefix_failures: 0 })
    }

    pub fn path(&self) -> &LatticePath {
        &self.r
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn dx(&self) -> Time {
        self.dx
    }

    pub fn dt(&self) -> Time {
        self.r.dt()
    }

    /// Real value to lattice units.
    pub fn lat(&self, x: f64) -> f64 {
        x / self.dx.to_f64().unwrap_or(f64::NAN)
    }

    pub fn time(&self, k: usize) -> Time {
        self.r.time(k)
    }

    pub fn index_ceil(&self, t: Time) -> usize {
        self.r.index_ceil(t)
    }

    pub fn first_zero_after(&self, a: Time) -> Result<usize, SteerError> {
        first_zero_after(&self.r, a).ok_or_else(|| SteerError::NoZeroAfter(format_time(a)))
    }

    /// Result of `F_a(e, .)` on the current path, without committing it.
    pub fn preview(&self, a: Time, e: &SignFamily) -> LatticePath {
        inverse_step_after(a, e, &self.r)
    }

    /// Apply `F_a(e, .)` and record it.
    pub fn apply(&mut self, a: Time, e: &SignFamily) {
        let next = self.preview(a, e);
        self.commit(a, e, next);
    }

    /// Record a step whose result was computed by [`Steerer::preview`].
    pub fn commit(&mut self, a: Time, e: &SignFamily, next: LatticePath) {
        if let Some(d) = first_zero_after(&self.r, a) {
            self.prefix_checks += 1;
            if next.prefix_digest(d) != self.r.prefix_digest(d) {
                self.prefix_failures += 1;
            }
        }
        self.steps.push(Step::new(a, e));
        self.r = next;
    }

    pub fn certificate(&self, target: Option<BallSpec>) -> Certificate {
        Certificate {
            initial_digest: self.initial_digest,
            final_digest: self.r.digest(),
            target,
            steps: self.steps.clone(),
            signs: None,
        }
    }

    pub fn into_parts(self) -> (LatticePath, Vec<Step>) {
        (self.r, self.steps)
    }

    /// Largest coordinate on indices `a..=b`.
    pub fn sup(&self, a: usize, b: usize) -> i64 {
        let b = b.min(self.r.steps());
        if a > b {
            return 0;
        }
        self.r.coords()[a..=b].iter().copied().max().unwrap_or(0)
    }

    pub fn steps_count(&self) -> usize {
        self.r.steps()
    }

    pub fn is_zero_time(&self, t: Time) -> bool {
        self.r.index_at(t).map_or(false, |k| self.r.coords()[k] == 0) || t.is_zero()
    }
}

//! Greedy search along the orbit of `F` for a CUCZ ball.

use lattice::levy::{chain_step_seed, inverse_step};
use lattice::metrics::{d_cz_geometry, Center};
use lattice::path::{LatticePath, Time};
use lattice::{decompose, in_ball, CuczBall, Profile, SignFamily, Target, ZeroGeometry};
use num_traits::ToPrimitive;

use crate::certificate::{BallSpec, Certificate, Step};
use crate::SteerError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyParams {
    /// Number of tallest excursions whose signs are enumerated.
    pub k: usize,
    /// Weight of `d_cz` in the score.
    pub lambda: f64,
}

impl Default for GreedyParams {
    fn default() -> Self {
        GreedyParams { k: 8, lambda: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct GreedyOutcome {
    /// Best score seen after each step, starting with the initial path.
    pub trace: Vec<f64>,
    /// Set when the ball was hit; its steps lead from `r0` to `path`.
    pub certificate: Option<Certificate>,
    /// Final path of the search (the hitting path on success).
    pub path: LatticePath,
    pub steps: usize,
}

impl GreedyOutcome {
    pub fn hit(&self) -> bool {
        self.certificate.is_some()
    }
}

/// The target sampled once: grid values in lattice units and zero set.
struct Scorer {
    values: Vec<f64>,
    zeros: ZeroGeometry,
    dx: f64,
    dt: Time,
    t: Time,
    lambda: f64,
}

impl Scorer {
    fn new(f: &Target, r: &LatticePath, t: Time, lambda: f64) -> Result<Self, SteerError> {
        if t > r.horizon() {
            return Err(SteerError::BadArgument(format!("t beyond the path horizon {}", r.horizon())));
        }
        let n = r.index_floor(t);
        Ok(Scorer { values: f.grid_values(r.dt(), n), zeros: f.zero_geometry(), dx: r.dx(), dt: r.dt(), t, lambda })
    }

    /// `d_cu + lambda d_cz` for the path with coordinates `v`.
    fn score(&self, v: &[i64]) -> f64 {
        let cu = self.values.iter().zip(v).map(|(f, &x)| (x as f64 * self.dx - f).abs()).fold(0.0, f64::max);
        let idx: Vec<usize> = (0..self.values.len()).filter(|&k| v[k] == 0).collect();
        let zg = ZeroGeometry::from_grid(&idx, self.dt);
        let cz = d_cz_geometry(&self.zeros, &zg, self.t).to_f64().unwrap_or(f64::INFINITY);
        cu + self.lambda * cz
    }
}

/// `F(e, r)` where `e` has sign `signs[i]` on the `i`-th excursion of `r`.
fn step_with(v: &[i64], exc: &[lattice::Excursion], signs: &[i8], out: &mut Vec<i64>) {
    out.clear();
    out.extend_from_slice(v);
    for (ex, &s) in exc.iter().zip(signs) {
        if s < 0 {
            for x in &mut out[ex.g + 1..=ex.d] {
                *x = -*x;
            }
        }
    }
    let mut m = 0;
    for x in out.iter_mut() {
        m = m.min(*x);
        *x -= m;
    }
}

/// Run up to `budget` steps of `F`. Step `n` uses the random family of
/// `(seed, n)` and tries every sign choice on the `k` tallest excursions of
/// the current path, moving to the one with the least `d_cu + lambda d_cz`.
#[allow(clippy::too_many_arguments)]
pub fn greedy_orbit_search(
    f: &Target,
    t: Time,
    rho: f64,
    delta: Time,
    r0: &LatticePath,
    seed: u64,
    budget: usize,
    params: &GreedyParams,
) -> Result<GreedyOutcome, SteerError> {
    if budget == 0 || params.k > 16 {
        return Err(SteerError::BadArgument("need budget >= 1 and k <= 16".into()));
    }
    let ball = CuczBall::new(Center::Target(f.clone()), t, rho, delta);
    let spec = BallSpec { target: f.clone(), t, rho, delta };
    let certify = |steps: &[Step], r: &LatticePath| Certificate {
        initial_digest: r0.digest(),
        final_digest: r.digest(),
        target: Some(spec.clone()),
        steps: steps.to_vec(),
        signs: None,
    };

    let scorer = Scorer::new(f, r0, t, params.lambda)?;
    let mut r = r0.clone();
    let mut best = scorer.score(r.coords());
    let mut trace = vec![best];
    let mut steps = Vec::new();
    if in_ball(&r, &ball)? {
        return Ok(GreedyOutcome { trace, certificate: Some(certify(&steps, &r)), path: r, steps: 0 });
    }
    let mut buf = Vec::new();
    for n in 1..=budget {
        let exc = decompose(&r);
        let mut tall: Vec<usize> = (0..exc.len()).collect();
        tall.sort_by(|&x, &y| exc[y].height.cmp(&exc[x].height).then(exc[x].g.cmp(&exc[y].g)));
        tall.truncate(params.k);
        let base = SignFamily::random(chain_step_seed(seed, n));
        let mut signs: Vec<i8> = exc.iter().map(|ex| base.sign(ex.number)).collect();
        let mut choice = (f64::INFINITY, 0u32);
        for mask in 0..1u32 << tall.len() {
            for (i, &j) in tall.iter().enumerate() {
                signs[j] = if mask >> i & 1 == 1 { -1 } else { 1 };
            }
            step_with(r.coords(), &exc, &signs, &mut buf);
            let s = scorer.score(&buf);
            if s < choice.0 {
                choice = (s, mask);
            }
        }
        let (s, mask) = choice;
        let family = tall.iter().enumerate().fold(base, |e, (i, &j)| {
            e.set(exc[j].number, if mask >> i & 1 == 1 { -1 } else { 1 })
        });
        steps.push(Step::new(Time::from_integer(0), &family));
        r = inverse_step(&family, &r);
        best = best.min(s);
        trace.push(best);
        if in_ball(&r, &ball)? {
            return Ok(GreedyOutcome { trace, certificate: Some(certify(&steps, &r)), path: r, steps: n });
        }
    }
    Ok(GreedyOutcome { trace, certificate: None, path: r, steps: budget })
}

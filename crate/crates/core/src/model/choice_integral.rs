//! Expected maximum and choice probabilities of the four-alternative problem
//! `max_{w_i, w_j} v(w_i, w_j) - ε_i w_i - ε_j w_j` with independent spouse
//! shocks drawn from a [`Disutility`].
//!
//! The husband's shock is integrated analytically through the partial
//! expectation of `F`. Conditional on the wife's shock `e`, the best
//! alternative within each husband branch is `max(v(·,1) - e, v(·,0))`, a
//! kinked function of `e`. Between kinks both branches are either linear in
//! `e` or constant; when they share a slope the integrand is affine in `e` and
//! integrates in closed form, otherwise composite Gauss–Legendre is applied on
//! the (finite) interval between kinks.

use super::household::WorkChoice;
use super::shocks::Disutility;
use crate::error::{Error, Result};
use crate::numerics::gl_pair;

/// Result of integrating the shocks out of one decision problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiceIntegral {
    pub expected_max: f64,
    /// Indexed by [`WorkChoice::index`].
    pub probabilities: [f64; 4],
}

impl ChoiceIntegral {
    pub fn probability(&self, choice: WorkChoice) -> f64 {
        self.probabilities[choice.index()]
    }
}

const QUAD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Piece {
    /// `value - e`
    Linear(f64),
    Const(f64),
    Absent,
}

#[derive(Debug, Clone, Copy)]
struct Branch {
    work: f64,
    care: f64,
}

impl Branch {
    fn kink(&self) -> f64 {
        match (self.work.is_finite(), self.care.is_finite()) {
            (true, true) => self.work - self.care,
            (true, false) => f64::INFINITY,
            (false, _) => f64::NEG_INFINITY,
        }
    }

    fn piece_at(&self, e: f64) -> Piece {
        match (self.work.is_finite(), self.care.is_finite()) {
            (false, false) => Piece::Absent,
            (true, false) => Piece::Linear(self.work),
            (false, true) => Piece::Const(self.care),
            (true, true) => {
                if e <= self.kink() {
                    Piece::Linear(self.work)
                } else {
                    Piece::Const(self.care)
                }
            }
        }
    }
}

fn eval(p: Piece, e: f64) -> f64 {
    match p {
        Piece::Linear(v) => v - e,
        Piece::Const(v) => v,
        Piece::Absent => f64::NEG_INFINITY,
    }
}

/// Integrates the shocks out of alternative-specific values `values`
/// (ordered as [`WorkChoice::ALL`]; `-inf` marks an infeasible alternative).
pub fn integrate_choice(values: [f64; 4], dist: &Disutility) -> Result<ChoiceIntegral> {
    if values.iter().all(|v| !v.is_finite()) {
        return Err(Error::Estimation("all alternatives infeasible".into()));
    }
    if values.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::Estimation(format!(
            "invalid alternative values {values:?}"
        )));
    }
    if dist.is_degenerate() {
        return Ok(deterministic(values));
    }

    let husband_works = Branch {
        work: values[0],
        care: values[1],
    };
    let husband_cares = Branch {
        work: values[2],
        care: values[3],
    };

    let mut cuts: Vec<f64> = [husband_works.kink(), husband_cares.kink()]
        .into_iter()
        .filter(|k| k.is_finite())
        .collect();
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();
    let mut bounds = vec![f64::NEG_INFINITY];
    bounds.extend(cuts);
    bounds.push(f64::INFINITY);

    let mut emax = 0.0;
    let mut probs = [0.0; 4];
    for w in bounds.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let probe = interior_point(lo, hi);
        let a = husband_works.piece_at(probe);
        let b = husband_cares.piece_at(probe);
        let mass = dist.cdf(hi) - dist.cdf(lo);
        if mass <= 0.0 && lo.is_finite() && hi.is_finite() {
            continue;
        }
        // husband-works mass on this interval
        let (value, work_mass) = match (a, b) {
            (Piece::Absent, Piece::Absent) => unreachable!("some alternative is finite"),
            (Piece::Absent, p) | (p, Piece::Absent) => {
                let affine = affine_integral(dist, lo, hi, p);
                let work_mass = if matches!(a, Piece::Absent) {
                    0.0
                } else {
                    mass
                };
                (affine, work_mass)
            }
            (Piece::Linear(va), Piece::Linear(vb)) => {
                let gap = va - vb;
                let v = affine_integral(dist, lo, hi, Piece::Linear(vb))
                    + dist.partial_expectation(gap) * mass;
                (v, dist.cdf(gap) * mass)
            }
            (Piece::Const(va), Piece::Const(vb)) => {
                let gap = va - vb;
                let v = (vb + dist.partial_expectation(gap)) * mass;
                (v, dist.cdf(gap) * mass)
            }
            _ => mixed_interval(dist, lo, hi, a, b)?,
        };
        emax += value;
        let care_mass = mass - work_mass;
        match a {
            Piece::Linear(_) => probs[0] += work_mass,
            Piece::Const(_) => probs[1] += work_mass,
            Piece::Absent => {}
        }
        match b {
            Piece::Linear(_) => probs[2] += care_mass,
            Piece::Const(_) => probs[3] += care_mass,
            Piece::Absent => {}
        }
    }
    for p in probs.iter_mut() {
        *p = p.clamp(0.0, 1.0);
    }
    let total: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= total;
    }
    Ok(ChoiceIntegral {
        expected_max: emax,
        probabilities: probs,
    })
}

fn deterministic(values: [f64; 4]) -> ChoiceIntegral {
    let mut best = 0;
    for k in 1..4 {
        if values[k] > values[best] {
            best = k;
        }
    }
    let mut probabilities = [0.0; 4];
    probabilities[best] = 1.0;
    ChoiceIntegral {
        expected_max: values[best],
        probabilities,
    }
}

fn interior_point(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => 0.0,
    }
}

/// `∫_lo^hi piece(e) dF(e)` for a linear or constant piece.
fn affine_integral(dist: &Disutility, lo: f64, hi: f64, p: Piece) -> f64 {
    let mass = dist.cdf(hi) - dist.cdf(lo);
    match p {
        Piece::Const(v) => v * mass,
        Piece::Linear(v) => v * mass - (dist.lower_first_moment(hi) - dist.lower_first_moment(lo)),
        Piece::Absent => f64::NEG_INFINITY,
    }
}

/// One branch linear, the other constant: integrate
/// `b(e) + P(a(e) - b(e))` and `F(a(e) - b(e))` against `dF`. Parts of the
/// interval beyond the support window carry negligible mass and are assigned
/// to the branch that dominates at the window edge.
fn mixed_interval(dist: &Disutility, lo: f64, hi: f64, a: Piece, b: Piece) -> Result<(f64, f64)> {
    let window = dist.support_window();
    let (qlo, qhi) = (lo.max(-window), hi.min(window));
    if qlo >= qhi {
        let edge = if hi <= -window { hi } else { lo };
        return Ok(tail(dist, lo, hi, a, b, edge));
    }
    let (mut value, mut work) = (0.0, 0.0);
    for (t_lo, t_hi, edge) in [(lo, qlo, qlo), (qhi, hi, qhi)] {
        if t_lo < t_hi {
            let (v, w) = tail(dist, t_lo, t_hi, a, b, edge);
            value += v;
            work += w;
        }
    }
    let value_at = |e: f64| {
        let (va, vb) = (eval(a, e), eval(b, e));
        (vb + dist.partial_expectation(va - vb)) * dist.pdf(e)
    };
    let work_at = |e: f64| dist.cdf(eval(a, e) - eval(b, e)) * dist.pdf(e);

    let (coarse, fine) = gl_pair();
    let width = dist.scale();
    let panels = ((qhi - qlo) / width).ceil().max(1.0) as usize;
    let step = (qhi - qlo) / panels as f64;
    let mut residual = 0.0f64;
    for k in 0..panels {
        let p_lo = qlo + k as f64 * step;
        let p_hi = if k + 1 == panels { qhi } else { p_lo + step };
        let v_fine = fine.integrate(p_lo, p_hi, value_at);
        let v_coarse = coarse.integrate(p_lo, p_hi, value_at);
        residual = residual.max((v_fine - v_coarse).abs());
        value += v_fine;
        work += fine.integrate(p_lo, p_hi, work_at);
    }
    if residual > QUAD_TOL * (1.0 + value.abs()) {
        return Err(Error::Quadrature { lo, hi, residual });
    }
    Ok((value, work))
}

fn tail(dist: &Disutility, lo: f64, hi: f64, a: Piece, b: Piece, edge: f64) -> (f64, f64) {
    let mass = dist.cdf(hi) - dist.cdf(lo);
    if eval(a, edge) >= eval(b, edge) {
        (affine_integral(dist, lo, hi, a), mass)
    } else {
        (affine_integral(dist, lo, hi, b), 0.0)
    }
}

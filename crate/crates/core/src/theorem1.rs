//! Times `t` and matrices `gamma` in SL2(Z) with `u(t) A gamma ~ Xi`.
//!
//! For a convergent index `nu` the lattice `A Z^2` gets the basis
//! `e1 = A (q_nu, -p_nu)`, `e2 = A (q_{nu+1}, -p_{nu+1})`. Lattice points
//! near `(0, eta_1)` and `(0, eta_2)` whose basis coordinates form a
//! matrix of determinant `+-1` are found by solving `xy - zw = 1` in a box
//! of half-width `R = q_{nu+1}^r`. The two points are the columns of
//! `A gamma`, and `t` slides the first of them onto `(xi_1, eta_1)`.

use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::arith::{pow_rational, ApproxReal, Dyadic};
use crate::boxdet::{solve, Backend, BoxDetProblem, IntInterval, Pairing, SolvedBy};
use crate::cf::{CfStream, Convergent, ExpandMode};
use crate::error::{Error, Result};
use crate::lattice::{max_norm, norm_bound, IMat2, IntMat2, Mat2R, Mat2Z, Vec2};

/// The target matrix `[[xi1, xi2], [eta1, eta2]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetSpec {
    xi: Mat2R,
}

impl TargetSpec {
    pub fn new(xi: Mat2R) -> TargetSpec {
        TargetSpec { xi }
    }

    pub fn matrix(&self) -> &Mat2R {
        &self.xi
    }

    /// Entries at `bits`, with the columns swapped (`Xi S`,
    /// `S = [[0, -1], [1, 0]]`) when `|eta1| < |eta2|`.
    pub fn normalized(&self, bits: u32) -> NormalizedTarget {
        let m = self.xi.eval(bits);
        let [x1, x2, e1, e2] = m.0;
        let swap = match crate::arith::compare(&e1.abs(), &e2.abs()) {
            crate::arith::Comparison::Less => true,
            crate::arith::Comparison::Greater => false,
            crate::arith::Comparison::Indistinguishable => e1.contains_zero(),
        };
        if swap {
            NormalizedTarget {
                xi1: x2,
                xi2: -x1,
                eta1: e2,
                eta2: -e1,
                swapped: true,
            }
        } else {
            NormalizedTarget {
                xi1: x1,
                xi2: x2,
                eta1: e1,
                eta2: e2,
                swapped: false,
            }
        }
    }
}

/// Target entries after column normalization.
#[derive(Clone, Debug)]
pub struct NormalizedTarget {
    pub xi1: ApproxReal,
    pub xi2: ApproxReal,
    pub eta1: ApproxReal,
    pub eta2: ApproxReal,
    pub swapped: bool,
}

impl NormalizedTarget {
    pub fn matrix(&self) -> IMat2 {
        IMat2([
            self.xi1.clone(),
            self.xi2.clone(),
            self.eta1.clone(),
            self.eta2.clone(),
        ])
    }

    /// Map `gamma'` for the normalized target back to the original one.
    pub fn unswap(&self, g: &Mat2Z) -> Mat2Z {
        if !self.swapped {
            return g.clone();
        }
        // gamma' S^-1 with S^-1 = [[0, 1], [-1, 0]]
        let [a, b, c, d] = g.entries();
        Mat2Z::new(-b, a.clone(), -d, c.clone()).expect("column swap keeps det 1")
    }
}

/// Two integer columns `(q, -p)`, `(q', -p')` of a lattice basis and the
/// scale `Q` setting the box half-width `R = floor(Q^r)`.
#[derive(Clone, Debug)]
pub struct Frame {
    pub nu: usize,
    pub q: BigInt,
    pub p: BigInt,
    pub q1: BigInt,
    pub p1: BigInt,
    pub scale: BigRational,
}

impl Frame {
    /// The frame of consecutive convergents, with `Q = q_{nu+1}`.
    pub fn from_convergents(c: &Convergent, c1: &Convergent) -> Frame {
        Frame {
            nu: c.nu,
            q: c.q.clone(),
            p: c.p.clone(),
            q1: c1.q.clone(),
            p1: c1.p.clone(),
            scale: BigRational::from_integer(c1.q.clone()),
        }
    }

    /// `P = [[q, q'], [-p, -p']]`.
    pub fn change(&self) -> IntMat2 {
        IntMat2::new(self.q.clone(), self.q1.clone(), -&self.p, -&self.p1)
    }

    /// `det P`, which must be `+-1`.
    pub fn sign(&self) -> Result<i32> {
        let d = self.change().det();
        if d.is_one() {
            Ok(1)
        } else if d == -BigInt::one() {
            Ok(-1)
        } else {
            Err(Error::InvalidParameter(format!("frame determinant is {d}, not +-1")))
        }
    }
}

/// Basis vectors of a frame: `E = A P`.
fn frame_basis(a: &IMat2, f: &Frame, bits: u32) -> (Vec2, Vec2) {
    let int = |n: &BigInt| ApproxReal::from_int(n.clone(), bits);
    (
        a.apply(&int(&f.q), &int(&-&f.p)),
        a.apply(&int(&f.q1), &int(&-&f.p1)),
    )
}

/// The box problem for a frame.
///
/// The centers are the basis coordinates of `(0, eta_1)` and `(0, eta_2)`:
/// `(A_j, B_j) = (A P)^-1 (0, eta_j)`, so `A_2 = sigma A_1`,
/// `B_2 = sigma B_1` with `sigma = eta_2 / eta_1` (and `rho = |sigma|`).
pub fn lemma2_transform_frame(
    a: &Mat2R,
    frame: &Frame,
    eta1: &ApproxReal,
    eta2: &ApproxReal,
    r: &BigRational,
    bits: u32,
) -> Result<BoxDetProblem> {
    if eta1.contains_zero() {
        return Err(Error::Eta1Zero);
    }
    let s = frame.sign()?;
    let am = a.eval(bits);
    let (e1, e2) = frame_basis(&am, frame, bits);
    let det = &e1[0] * &e2[1] - &e2[0] * &e1[1];
    let a1 = (-(&e2[0] * eta1)).div(&det)?;
    let b1 = (&e1[0] * eta1).div(&det)?;
    let sigma = eta2.div(eta1)?;
    BoxDetProblem::new(a1, b1, sigma, frame.scale.clone(), r.clone(), Pairing::Basis { s })
}

/// [`lemma2_transform_frame`] for consecutive convergents.
pub fn lemma2_transform(
    a: &Mat2R,
    c: &Convergent,
    c1: &Convergent,
    eta1: &ApproxReal,
    eta2: &ApproxReal,
    r: &BigRational,
    bits: u32,
) -> Result<BoxDetProblem> {
    lemma2_transform_frame(a, &Frame::from_convergents(c, c1), eta1, eta2, r, bits)
}

/// Which part of the box the solver was allowed to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Window {
    /// `z` in the outer quarter and `x` in the half of their windows that
    /// push `t` positive.
    Directed,
    /// `z` in the outer half on the positive-`t` side.
    HalfDirected,
    Full,
}

/// `(x, z)` windows steering `Xi_1 = (x - A1) e1_u + (z - B1) e2_u` to the
/// side where `t = (xi_1 - Xi_1) / H_1` is positive.
fn directed_windows(
    p: &BoxDetProblem,
    e1u: &ApproxReal,
    e2u: &ApproxReal,
    eta1: &ApproxReal,
    window: Window,
) -> Option<(IntInterval, IntInterval)> {
    let sx = (e1u * eta1).certified_sign()?;
    let sz = (e2u * eta1).certified_sign()?;
    if sx == 0 || sz == 0 {
        return None;
    }
    let r = &p.half_width;
    let (z_off, x_half) = match window {
        Window::Directed => (Integer::div_floor(&(r * 3u32 + 3u32), &BigInt::from(4)), true),
        Window::HalfDirected => (Integer::div_floor(&(r + 1u32), &BigInt::from(2)), false),
        Window::Full => return None,
    };
    let side = |iv: &IntInterval, center: &ApproxReal, dir: i32, off: &BigInt| {
        let c = center.round_nearest();
        if dir > 0 {
            IntInterval::new(c + off, iv.hi.clone())
        } else {
            IntInterval::new(iv.lo.clone(), c - off)
        }
    };
    let z = side(&p.z, &p.b1, -sz, &z_off);
    let x = if x_half {
        side(&p.x, &p.a1, -sx, &BigInt::zero())
    } else {
        p.x.clone()
    };
    Some((x, z))
}

/// Coefficients of a lattice point relative to the Corollary-1 base point
/// `e0` (the lattice point nearest to the box center).
pub type CorollaryCoords = [BigInt; 2];

/// Result of Lemma 2 for one frame: a basis `f1, f2` of the lattice near
/// `(0, eta_1)`, `(0, eta_2)`.
#[derive(Clone, Debug)]
pub struct CandidateBasis {
    pub nu: usize,
    pub f1: Vec2,
    pub f2: Vec2,
    /// `(f1 f2) = A gamma`, for the normalized target.
    pub gamma: Mat2Z,
    pub backend: SolvedBy,
    pub window: Window,
    pub problem: BoxDetProblem,
    /// `(l1, l2)` of `f1` and `f2` with `f_j = e0_j + l1 e1 + l2 e2`.
    pub corollary: [CorollaryCoords; 2],
    /// `|Xi_j| <= 2 M R Q` and `|H_j - eta_j| <= 2 M R / Q` hold certainly.
    pub in_box: bool,
    /// `|A1| / Q` and whether it lies in `[1/(2M^2), 2M^2]`.
    pub a1_ratio: ApproxReal,
    pub a1_in_bracket: bool,
    pub m: ApproxReal,
}

/// Options shared by both pipelines.
#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub r: BigRational,
    pub backend: Backend,
    /// Starting precision; `None` uses `max(256, 4 bitlen(Q) + 64)`.
    pub precision_bits: Option<u32>,
    /// Steer the solution toward positive `t` before using the full box.
    pub directed: bool,
}

impl PipelineOptions {
    pub fn new(r: BigRational) -> PipelineOptions {
        PipelineOptions {
            r,
            backend: Backend::Auto,
            precision_bits: None,
            directed: true,
        }
    }

    pub fn with_backend(mut self, b: Backend) -> PipelineOptions {
        self.backend = b;
        self
    }

    fn start_bits(&self, q: &BigInt) -> u32 {
        self.precision_bits
            .unwrap_or_else(|| 256u32.max(4 * q.bits() as u32 + 64))
    }
}

/// Lemma 2 for a frame: solve the box problem and map the solution back to
/// lattice vectors. Tries the directed windows first when enabled.
pub fn build_candidate_frame(
    a: &Mat2R,
    target: &NormalizedTarget,
    frame: &Frame,
    opts: &PipelineOptions,
    bits: u32,
) -> Result<CandidateBasis> {
    let problem = lemma2_transform_frame(a, frame, &target.eta1, &target.eta2, &opts.r, bits)?;
    let am = a.eval(bits);
    let (e1, e2) = frame_basis(&am, frame, bits);
    let windows: &[Window] = if opts.directed {
        &[Window::Directed, Window::HalfDirected, Window::Full]
    } else {
        &[Window::Full]
    };
    let mut found = None;
    for &w in windows {
        let restricted = match w {
            Window::Full => problem.clone(),
            _ => match directed_windows(&problem, &e1[0], &e2[0], &target.eta1, w) {
                Some((x, z)) => problem.restricted(&x, &z),
                None => continue,
            },
        };
        if let Some(sol) = solve(&restricted, opts.backend)? {
            found = Some((sol, w));
            break;
        }
    }
    let Some((sol, window)) = found else {
        return Err(Error::SolverFailed { nu: frame.nu });
    };
    debug_assert!(problem.is_solution(&sol));
    let s = frame.sign()?;
    let (xp, yp, zp, wp) = sol.lattice_coordinates(s);
    let k = IntMat2::new(xp.clone(), yp.clone(), zp.clone(), wp.clone());
    let g = frame.change().mul(&k);
    let gamma = Mat2Z::new(g.0[0].clone(), g.0[1].clone(), g.0[2].clone(), g.0[3].clone())?;

    let int = |n: &BigInt| ApproxReal::from_int(n.clone(), bits);
    let [g11, g12, g21, g22] = gamma.entries();
    let f1 = am.apply(&int(g11), &int(g21));
    let f2 = am.apply(&int(g12), &int(g22));

    let m = norm_bound(a, bits)?;
    let q = ApproxReal::from_rational(&frame.scale, bits);
    let two_mr = m.mul_int(&problem.half_width).shl(1);
    let bu = &two_mr * &q;
    let bv = two_mr.div(&q)?;
    let in_box = [(&f1, &target.eta1), (&f2, &target.eta2)]
        .iter()
        .all(|(f, eta)| f[0].abs().certainly_le(&bu) && (&f[1] - eta).abs().certainly_le(&bv));

    let a2 = &problem.sigma * &problem.a1;
    let b2 = &problem.sigma * &problem.b1;
    let corollary = [
        [&xp - problem.a1.round_nearest(), &zp - problem.b1.round_nearest()],
        [&yp - a2.round_nearest(), &wp - b2.round_nearest()],
    ];

    let a1_ratio = problem.a1.abs().div(&q)?;
    let m2 = &m * &m;
    let lo = m2.shl(1).recip()?;
    let hi = m2.shl(1);
    let a1_in_bracket = lo.possibly_le(&a1_ratio) && a1_ratio.possibly_le(&hi);

    Ok(CandidateBasis {
        nu: frame.nu,
        f1,
        f2,
        gamma,
        backend: sol.backend,
        window,
        problem,
        corollary,
        in_box,
        a1_ratio,
        a1_in_bracket,
        m,
    })
}

/// Lemma 2 for consecutive convergents `nu`, `nu + 1` of `stream`.
pub fn build_candidate(
    a: &Mat2R,
    xi: &TargetSpec,
    stream: &CfStream,
    nu: usize,
    opts: &PipelineOptions,
) -> Result<CandidateBasis> {
    let (c, c1) = stream.convergent_pair(nu)?;
    let bits = opts.start_bits(&c1.q);
    let target = xi.normalized(bits);
    build_candidate_frame(a, &target, &Frame::from_convergents(&c, &c1), opts, bits)
}

/// Outcome of the Lemma 3 inequality
/// `|t - (xi2 - Xi2)/H2| <= eps (|xi1| + |xi2|) / |H1 H2|`.
#[derive(Clone, Debug)]
pub struct Lemma3Check {
    pub lhs: ApproxReal,
    pub rhs: ApproxReal,
    /// False only when `lhs > rhs` is certain.
    pub holds: bool,
}

/// `t = (xi1 - Xi1) / H1` and the Lemma 3 consistency check.
#[derive(Clone, Debug)]
pub struct TimeAlignment {
    pub t: ApproxReal,
    pub eps: ApproxReal,
    pub lemma3: Lemma3Check,
}

/// Align `f1 = (Xi1, H1)` with `(xi1, eta1)`.
pub fn align_time(f1: &Vec2, f2: &Vec2, target: &NormalizedTarget) -> Result<TimeAlignment> {
    let (big_xi1, h1) = (&f1[0], &f1[1]);
    let (big_xi2, h2) = (&f2[0], &f2[1]);
    if h1.contains_zero() {
        return Err(Error::HZero { index: 1 });
    }
    if h2.contains_zero() {
        return Err(Error::HZero { index: 2 });
    }
    let t = (&target.xi1 - big_xi1).div(h1)?;
    let eps = (h1 - &target.eta1).abs().max(&(h2 - &target.eta2).abs());
    let t2 = (&target.xi2 - big_xi2).div(h2)?;
    let lhs = (&t - &t2).abs();
    let rhs = (&eps * &(target.xi1.abs() + target.xi2.abs())).div(&(h1 * h2).abs())?;
    let holds = lhs.possibly_le(&rhs);
    Ok(TimeAlignment {
        t,
        eps,
        lemma3: Lemma3Check { lhs, rhs, holds },
    })
}

/// One successful construction.
#[derive(Clone, Debug)]
pub struct ApproxResult {
    pub nu: usize,
    /// `q_{nu+1}` (or the scale `Q` of the frame in the uniform variant).
    pub q_next: BigInt,
    /// The time, an exact dyadic.
    pub t: Dyadic,
    pub gamma: Mat2Z,
    /// `u(t) A gamma - Xi`, recomputed from the inputs at doubled precision.
    pub residual: IMat2,
    /// `max_norm(residual)`.
    pub error: ApproxReal,
    pub backend: SolvedBy,
    pub window: Window,
    pub m: ApproxReal,
    pub half_width: BigInt,
    pub lemma3: Lemma3Check,
    pub corollary: [CorollaryCoords; 2],
    pub in_box: bool,
    pub a1_in_bracket: bool,
    pub swapped: bool,
    pub precision_bits: u32,
}

impl ApproxResult {
    pub fn error_upper(&self) -> f64 {
        self.error.upper().to_f64()
    }

    pub fn t_f64(&self) -> f64 {
        self.t.to_f64()
    }
}

/// `u(t) A gamma - Xi` at `bits`.
pub fn residual(a: &Mat2R, xi: &Mat2R, t: &Dyadic, gamma: &Mat2Z, bits: u32) -> IMat2 {
    let u = IMat2::unipotent(&ApproxReal::exact(t.clone(), bits));
    let g = IMat2::from_ints(gamma, bits);
    u.mul(&a.eval(bits)).mul(&g).sub(&xi.eval(bits))
}

const MAX_DOUBLINGS: u32 = 4;

fn retryable(e: &Error) -> bool {
    matches!(
        e,
        Error::HZero { .. } | Error::DivisionByZero | Error::ResidualMismatch | Error::Indistinguishable { .. }
    )
}

/// Full construction for one frame with precision doubling on ambiguity.
pub fn construct(a: &Mat2R, xi: &TargetSpec, frame: &Frame, opts: &PipelineOptions) -> Result<ApproxResult> {
    let q_int = frame.scale.ceil().to_integer();
    let mut bits = opts.start_bits(&q_int);
    let cap = a.available_bits().min(xi.matrix().available_bits());
    let mut attempt = 0;
    loop {
        match construct_at(a, xi, frame, opts, bits) {
            Err(e) if retryable(&e) && attempt < MAX_DOUBLINGS && bits < cap => {
                attempt += 1;
                bits = bits.saturating_mul(2);
            }
            other => return other,
        }
    }
}

fn construct_at(a: &Mat2R, xi: &TargetSpec, frame: &Frame, opts: &PipelineOptions, bits: u32) -> Result<ApproxResult> {
    let target = xi.normalized(bits);
    let cand = build_candidate_frame(a, &target, frame, opts, bits)?;
    let align = align_time(&cand.f1, &cand.f2, &target)?;
    let t = align.t.midpoint();

    // Residual in the working frame, then recomputed from the inputs.
    let u = IMat2::unipotent(&ApproxReal::exact(t.clone(), bits));
    let fm = IMat2([
        cand.f1[0].clone(),
        cand.f2[0].clone(),
        cand.f1[1].clone(),
        cand.f2[1].clone(),
    ]);
    let working = max_norm(&u.mul(&fm).sub(&target.matrix()));
    let gamma = target.unswap(&cand.gamma);
    let fresh = residual(a, xi.matrix(), &t, &gamma, bits.saturating_mul(2));
    let error = max_norm(&fresh);
    if !working.overlaps(&error) {
        return Err(Error::ResidualMismatch);
    }
    Ok(ApproxResult {
        nu: frame.nu,
        q_next: frame.scale.ceil().to_integer(),
        t,
        gamma,
        residual: fresh,
        error,
        backend: cand.backend,
        window: cand.window,
        m: cand.m,
        half_width: cand.problem.half_width.clone(),
        lemma3: align.lemma3,
        corollary: cand.corollary,
        in_box: cand.in_box,
        a1_in_bracket: cand.a1_in_bracket,
        swapped: target.swapped,
        precision_bits: bits,
    })
}

/// Result for one `nu` of a sweep.
#[derive(Clone, Debug)]
pub struct NuOutcome {
    pub nu: usize,
    pub result: Result<ApproxResult>,
}

/// Run the construction for every `nu` in `nu_range`, in parallel, results
/// ordered by `nu`. Hypothesis violations abort; per-`nu` failures are
/// recorded in the outcome.
pub fn approximate(
    a: &Mat2R,
    xi: &TargetSpec,
    nu_range: RangeInclusive<usize>,
    opts: &PipelineOptions,
) -> Result<Vec<NuOutcome>> {
    check_hypotheses(a)?;
    let mut stream = CfStream::new(a.beta(), a.delta(), ExpandMode::Irrational)?;
    let need = nu_range.end() + 2;
    if let Err(e) = stream.ensure(need) {
        if !matches!(e, Error::PrecisionExhausted { .. }) {
            return Err(e);
        }
    }
    let stream = &stream;
    Ok(nu_range
        .into_par_iter()
        .map(|nu| {
            let result = stream
                .convergent_pair(nu)
                .and_then(|(c, c1)| construct(a, xi, &Frame::from_convergents(&c, &c1), opts));
            NuOutcome { nu, result }
        })
        .collect())
}

/// `delta != 0` and `beta / delta` irrational (det 1 is checked when the
/// matrix is built).
pub fn check_hypotheses(a: &Mat2R) -> Result<()> {
    if a.delta().is_zero() {
        return Err(Error::DeltaZero);
    }
    CfStream::new(a.beta(), a.delta(), ExpandMode::Irrational).map(|_| ())
}

/// `8 M (1 + |xi1| + |xi2|) q^(r-1)`, the explicit form of the error bound.
pub fn error_bound(m: &ApproxReal, xi: &Mat2R, q: &BigInt, r: &BigRational, bits: u32) -> Result<ApproxReal> {
    let x = xi.eval(bits);
    let size = ApproxReal::one(bits) + x.0[0].abs() + x.0[1].abs();
    let qr = pow_rational(&BigRational::from_integer(q.clone()), &(r - BigRational::one()), bits)?;
    Ok(m.mul_int(&BigInt::from(8)) * size * qr)
}

//! 2x2 matrices, the lattice `A * Z^2`, its convergent bases and boxes.
//!
//! Points of the plane are written `(u, v)`. The source matrix is laid out as
//! `[[alpha, gamma], [beta, delta]]`, so its columns are `(alpha, beta)` and
//! `(gamma, delta)` and the lattice is spanned by those columns.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{ApproxReal, Dyadic, Quad, RealSpec};
use crate::cf::Convergent;
use crate::error::{Error, Result};

/// A point or vector `(u, v)` with certified coordinates.
pub type Vec2 = [ApproxReal; 2];

/// Certified 2x2 real matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IMat2(pub [ApproxReal; 4]);

impl IMat2 {
    pub fn entries(&self) -> &[ApproxReal; 4] {
        &self.0
    }

    pub fn from_ints(m: &Mat2Z, prec: u32) -> IMat2 {
        IMat2(m.0.clone().map(|x| ApproxReal::from_int(x, prec)))
    }

    pub fn mul(&self, o: &IMat2) -> IMat2 {
        let [a, b, c, d] = &self.0;
        let [e, f, g, h] = &o.0;
        IMat2([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }

    pub fn sub(&self, o: &IMat2) -> IMat2 {
        let [a, b, c, d] = &self.0;
        let [e, f, g, h] = &o.0;
        IMat2([a - e, b - f, c - g, d - h])
    }

    pub fn det(&self) -> ApproxReal {
        let [a, b, c, d] = &self.0;
        a * d - b * c
    }

    pub fn column(&self, j: usize) -> Vec2 {
        [self.0[j].clone(), self.0[2 + j].clone()]
    }

    /// `self * (x, y)`.
    pub fn apply(&self, x: &ApproxReal, y: &ApproxReal) -> Vec2 {
        let [a, b, c, d] = &self.0;
        [a * x + b * y, c * x + d * y]
    }

    /// The upper unipotent matrix `[[1, t], [0, 1]]`.
    pub fn unipotent(t: &ApproxReal) -> IMat2 {
        let p = t.prec();
        IMat2([
            ApproxReal::one(p),
            t.clone(),
            ApproxReal::zero(p),
            ApproxReal::one(p),
        ])
    }
}

/// Maximum of the absolute values of the entries.
pub fn max_norm(m: &IMat2) -> ApproxReal {
    let mut acc = m.0[0].abs();
    for x in &m.0[1..] {
        acc = acc.max(&x.abs());
    }
    acc
}

/// Integer 2x2 matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMat2(pub [BigInt; 4]);

impl IntMat2 {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> IntMat2 {
        IntMat2([a, b, c, d])
    }

    pub fn det(&self) -> BigInt {
        let [a, b, c, d] = &self.0;
        a * d - b * c
    }

    pub fn mul(&self, o: &IntMat2) -> IntMat2 {
        let [a, b, c, d] = &self.0;
        let [e, f, g, h] = &o.0;
        IntMat2([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }
}

/// An element of SL2(Z): integer entries with determinant exactly 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat2Z(pub(crate) [BigInt; 4]);

impl Mat2Z {
    pub fn new(l11: BigInt, l12: BigInt, l21: BigInt, l22: BigInt) -> Result<Mat2Z> {
        let m = IntMat2([l11, l12, l21, l22]);
        if !m.det().is_one() {
            return Err(Error::InvalidParameter(format!(
                "integer matrix has determinant {}, expected 1",
                m.det()
            )));
        }
        Ok(Mat2Z(m.0))
    }

    pub fn identity() -> Mat2Z {
        Mat2Z([BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one()])
    }

    pub fn entries(&self) -> &[BigInt; 4] {
        &self.0
    }

    pub fn det(&self) -> BigInt {
        let [a, b, c, d] = &self.0;
        a * d - b * c
    }

    pub fn mul(&self, o: &Mat2Z) -> Mat2Z {
        Mat2Z(IntMat2(self.0.clone()).mul(&IntMat2(o.0.clone())).0)
    }
}

impl fmt::Display for Mat2Z {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = &self.0;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

/// How unimodularity of a [`Mat2R`] was established.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DetCertificate {
    /// `det = 1` verified in exact arithmetic.
    Exact,
    /// `|det - 1| <= 2^-tolerance_log2` could not be refuted at `bits`.
    Tolerance { bits: u32, tolerance_log2: u32 },
}

/// Real 2x2 matrix with determinant 1, entries given as [`RealSpec`]s.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat2R {
    entries: [RealSpec; 4],
    cert: DetCertificate,
}

/// Working precision for the determinant check of inexact or mixed-field
/// matrices.
pub const DET_CHECK_BITS: u32 = 256;

impl Mat2R {
    /// Checked constructor: exact entries in a common quadratic field are
    /// checked exactly, anything else to tolerance `2^-(bits/2)`.
    pub fn new(a11: RealSpec, a12: RealSpec, a21: RealSpec, a22: RealSpec) -> Result<Mat2R> {
        Mat2R::with_check_bits([a11, a12, a21, a22], DET_CHECK_BITS)
    }

    pub fn with_check_bits(entries: [RealSpec; 4], check_bits: u32) -> Result<Mat2R> {
        if let Some(det) = exact_det(&entries) {
            if det == Quad::from_int(BigInt::one()) {
                return Ok(Mat2R {
                    entries,
                    cert: DetCertificate::Exact,
                });
            }
            return Err(Error::NotUnimodular {
                tolerance: "0 (exact)".into(),
            });
        }
        let bits = entries
            .iter()
            .map(RealSpec::available_bits)
            .min()
            .unwrap_or(u32::MAX)
            .min(check_bits)
            .max(16);
        let tol_log2 = bits / 2;
        let m = IMat2(entries.clone().map(|e| e.eval_capped(bits)));
        let diff = (m.det() - ApproxReal::one(bits)).abs();
        let tol = ApproxReal::exact(Dyadic::new(BigInt::one(), -(tol_log2 as i64)), bits);
        if !diff.possibly_le(&tol) {
            return Err(Error::NotUnimodular {
                tolerance: format!("2^-{tol_log2}"),
            });
        }
        Ok(Mat2R {
            entries,
            cert: DetCertificate::Tolerance {
                bits,
                tolerance_log2: tol_log2,
            },
        })
    }

    /// Build from exact field elements.
    pub fn from_quads(a11: Quad, a12: Quad, a21: Quad, a22: Quad) -> Result<Mat2R> {
        Mat2R::new(
            RealSpec::from_quad(a11),
            RealSpec::from_quad(a12),
            RealSpec::from_quad(a21),
            RealSpec::from_quad(a22),
        )
    }

    pub fn identity() -> Mat2R {
        Mat2R {
            entries: [RealSpec::int(1), RealSpec::int(0), RealSpec::int(0), RealSpec::int(1)],
            cert: DetCertificate::Exact,
        }
    }

    pub fn entries(&self) -> &[RealSpec; 4] {
        &self.entries
    }

    pub fn certificate(&self) -> &DetCertificate {
        &self.cert
    }

    pub fn is_exact(&self) -> bool {
        self.entries.iter().all(RealSpec::is_exact)
    }

    /// Bits the entries can certify.
    pub fn available_bits(&self) -> u32 {
        self.entries.iter().map(RealSpec::available_bits).min().unwrap()
    }

    /// Entries as exact field elements, when they share one.
    pub fn as_quads(&self) -> Option<[Quad; 4]> {
        let q = [
            self.entries[0].as_quad()?,
            self.entries[1].as_quad()?,
            self.entries[2].as_quad()?,
            self.entries[3].as_quad()?,
        ];
        let shared = q.iter().all(|a| q.iter().all(|b| a.same_field(b)));
        shared.then_some(q)
    }

    /// Enclosure of all entries (capped at what decimal entries supply).
    pub fn eval(&self, bits: u32) -> IMat2 {
        IMat2(self.entries.clone().map(|e| e.eval_capped(bits)))
    }

    pub fn alpha(&self) -> &RealSpec {
        &self.entries[0]
    }
    pub fn gamma(&self) -> &RealSpec {
        &self.entries[1]
    }
    pub fn beta(&self) -> &RealSpec {
        &self.entries[2]
    }
    pub fn delta(&self) -> &RealSpec {
        &self.entries[3]
    }

    /// Parse `{"a11": "...", "a12": "...", "a21": "...", "a22": "..."}`.
    pub fn from_json_str(s: &str) -> Result<Mat2R> {
        let file: MatrixFile = serde_json::from_str(s)
            .map_err(|e| Error::InvalidParameter(format!("matrix JSON: {e}")))?;
        file.to_mat()
    }

    pub fn to_json_string(&self) -> String {
        let [a, b, c, d] = &self.entries;
        let file = MatrixFile {
            a11: a.to_string(),
            a12: b.to_string(),
            a21: c.to_string(),
            a22: d.to_string(),
        };
        serde_json::to_string_pretty(&file).expect("plain strings serialize")
    }
}

/// On-disk matrix layout, row-major, entries as real literals.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub a11: String,
    pub a12: String,
    pub a21: String,
    pub a22: String,
}

impl MatrixFile {
    pub fn to_mat(&self) -> Result<Mat2R> {
        Mat2R::new(
            self.a11.parse()?,
            self.a12.parse()?,
            self.a21.parse()?,
            self.a22.parse()?,
        )
    }
}

fn exact_det(e: &[RealSpec; 4]) -> Option<Quad> {
    let q: Vec<Quad> = e.iter().map(RealSpec::as_quad).collect::<Option<_>>()?;
    q[0].mul(&q[3])?.sub(&q[1].mul(&q[2])?)
}

/// `M = 4 max(|alpha|, |beta|, |gamma|, |delta|, 1/|delta|)`.
pub fn norm_bound(a: &Mat2R, bits: u32) -> Result<ApproxReal> {
    if a.delta().is_zero() {
        return Err(Error::DeltaZero);
    }
    let m = a.eval(bits);
    let delta = &m.0[3];
    if delta.contains_zero() {
        return Err(Error::DeltaZero);
    }
    let inv = delta.abs().recip()?;
    let mut acc = inv;
    for x in &m.0 {
        acc = acc.max(&x.abs());
    }
    Ok(acc.shl(2))
}

/// `P = [[q_nu, q_{nu+1}], [-p_nu, -p_{nu+1}]]`: lattice coordinates of the
/// convergent basis in terms of the columns of `A`.
pub fn change_of_basis(c: &Convergent, c1: &Convergent) -> IntMat2 {
    IntMat2([c.q.clone(), c1.q.clone(), -&c.p, -&c1.p])
}

/// A basis `e1, e2` of the lattice together with its integer coordinates.
#[derive(Clone, Debug)]
pub struct LatticeBasis {
    pub e1: Vec2,
    pub e2: Vec2,
    /// Columns are the coordinates of `e1`, `e2` in the columns of `A`.
    pub change: IntMat2,
    pub nu: usize,
}

impl LatticeBasis {
    /// `E = (e1 e2)` as a matrix.
    pub fn matrix(&self) -> IMat2 {
        IMat2([
            self.e1[0].clone(),
            self.e2[0].clone(),
            self.e1[1].clone(),
            self.e2[1].clone(),
        ])
    }

    /// `det change`, which is `+-1` for a basis.
    pub fn change_det(&self) -> BigInt {
        self.change.det()
    }

    /// Real coordinates of `point` in the basis `(e1, e2)`.
    pub fn coordinates(&self, point: &Vec2) -> Result<Vec2> {
        let e = self.matrix();
        let det = e.det();
        let [a, b, c, d] = &e.0;
        let x = (d * &point[0] - b * &point[1]).div(&det)?;
        let y = (a * &point[1] - c * &point[0]).div(&det)?;
        Ok([x, y])
    }

    /// `e0 + l1 e1 + l2 e2` for integers `l1`, `l2`.
    pub fn combine(&self, base: &Vec2, l1: &BigInt, l2: &BigInt) -> Vec2 {
        let c = |i: usize| &base[i] + &(self.e1[i].mul_int(l1) + self.e2[i].mul_int(l2));
        [c(0), c(1)]
    }
}

/// `e1 = A (q_nu, -p_nu)`, `e2 = A (q_{nu+1}, -p_{nu+1})`.
pub fn basis_from_convergents(a: &Mat2R, c: &Convergent, c1: &Convergent, bits: u32) -> LatticeBasis {
    let m = a.eval(bits);
    let change = change_of_basis(c, c1);
    let col = |q: &BigInt, p: &BigInt| {
        m.apply(&ApproxReal::from_int(q.clone(), bits), &ApproxReal::from_int(-p, bits))
    };
    LatticeBasis {
        e1: col(&c.q, &c.p),
        e2: col(&c1.q, &c1.p),
        change,
        nu: c.nu,
    }
}

/// Exact basis vectors when the entries of `A` share a quadratic field.
pub fn exact_basis(a: &Mat2R, c: &Convergent, c1: &Convergent) -> Option<[[Quad; 2]; 2]> {
    let [al, ga, be, de] = a.as_quads()?;
    let col = |q: &BigInt, p: &BigInt| -> Option<[Quad; 2]> {
        let np = -p;
        Some([
            al.mul_int(q).add(&ga.mul_int(&np))?,
            be.mul_int(q).add(&de.mul_int(&np))?,
        ])
    };
    Some([col(&c.q, &c.p)?, col(&c1.q, &c1.p)?])
}

/// Axis-parallel box `|u - cu| <= hu`, `|v - cv| <= hv`.
#[derive(Clone, Debug)]
pub struct Box {
    pub center_u: ApproxReal,
    pub center_v: ApproxReal,
    pub half_u: ApproxReal,
    pub half_v: ApproxReal,
}

impl Box {
    /// Certainly inside (closed box).
    pub fn contains(&self, p: &Vec2) -> bool {
        let du = (&p[0] - &self.center_u).abs();
        let dv = (&p[1] - &self.center_v).abs();
        du.certainly_le(&self.half_u) && dv.certainly_le(&self.half_v)
    }
}

/// The box `|u| <= M q_next`, `|v| <= M / q_next`.
pub fn fundamental_box(m: &ApproxReal, q_next: &BigInt) -> Box {
    let p = m.prec();
    let q = ApproxReal::from_int(q_next.clone(), p);
    Box {
        center_u: ApproxReal::zero(p),
        center_v: ApproxReal::zero(p),
        half_u: m * &q,
        half_v: m.div(&q).expect("q_next >= 1"),
    }
}

/// The box `|u| <= 2MR q_next`, `|v - eta| <= 2MR / q_next`.
pub fn shifted_box(m: &ApproxReal, q_next: &BigInt, eta: &ApproxReal, r: &BigInt) -> Box {
    let p = m.prec();
    let scale = m.mul_int(r).shl(1);
    let q = ApproxReal::from_int(q_next.clone(), p);
    Box {
        center_u: ApproxReal::zero(p),
        center_v: eta.clone(),
        half_u: &scale * &q,
        half_v: scale.div(&q).expect("q_next >= 1"),
    }
}

/// A point reduced modulo the lattice.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub l1: BigInt,
    pub l2: BigInt,
    pub point: Vec2,
}

/// Subtract the lattice point whose basis coordinates are the rounded
/// coordinates of `point` (ties toward negative infinity).
pub fn reduce(basis: &LatticeBasis, point: &Vec2) -> Result<Reduced> {
    let [x, y] = basis.coordinates(point)?;
    let l1 = x.round_nearest();
    let l2 = y.round_nearest();
    let lat = basis.combine(&zero_vec(point[0].prec()), &l1, &l2);
    Ok(Reduced {
        point: [&point[0] - &lat[0], &point[1] - &lat[1]],
        l1,
        l2,
    })
}

/// Lattice point nearest to `point` in basis coordinates.
pub fn nearest_lattice_point(basis: &LatticeBasis, point: &Vec2) -> Result<(BigInt, BigInt, Vec2)> {
    let [x, y] = basis.coordinates(point)?;
    let l1 = x.round_nearest();
    let l2 = y.round_nearest();
    let p = basis.combine(&zero_vec(point[0].prec()), &l1, &l2);
    Ok((l1, l2, p))
}

/// Points `e0 + l1 e1 + l2 e2`, `|l_j| <= R`, with `e0` the lattice point
/// nearest to `(0, eta)`. Returned in lexicographic `(l1, l2)` order.
pub fn corollary_points(basis: &LatticeBasis, eta: &ApproxReal, r: u32) -> Result<Vec<(i64, i64, Vec2)>> {
    let p = eta.prec();
    let (_, _, e0) = nearest_lattice_point(basis, &[ApproxReal::zero(p), eta.clone()])?;
    let r = r as i64;
    let mut out = Vec::with_capacity(((2 * r + 1) * (2 * r + 1)) as usize);
    for l1 in -r..=r {
        for l2 in -r..=r {
            let pt = basis.combine(&e0, &BigInt::from(l1), &BigInt::from(l2));
            out.push((l1, l2, pt));
        }
    }
    Ok(out)
}

fn zero_vec(p: u32) -> Vec2 {
    [ApproxReal::zero(p), ApproxReal::zero(p)]
}

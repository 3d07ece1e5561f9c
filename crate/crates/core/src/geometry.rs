//! Discrete differential geometry of conformally parametrized patches in R^m.
//!
//! All operators act on an [`Immersion`] sampled on a [`GridChart`]. A [`SurfaceGeometry`]
//! computes the derivatives and the frame once, runs the rank and conformality gates, and then
//! serves every residual. Complex-valued fields are carried as a pair of real fields.

use nalgebra::{DMatrix, DVector};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::grid::{Axis, Field, GridChart, Norms};
use crate::multivector::{grade_masks, GradedProduct, Multivector};
use crate::par;

/// A sampled map from a chart into R^m, 3 <= m <= 6.
#[derive(Clone, Debug)]
pub struct Immersion {
    pub name: String,
    pub m: usize,
    pub phi: Field,
    /// Conformality residual certified by the producer of `phi`.
    pub conformal_claim: f64,
    /// Closed-form conformal factor, when the producer knows it.
    pub lambda_exact: Option<Field>,
}

impl Immersion {
    pub fn new(name: impl Into<String>, phi: Field, conformal_claim: f64) -> Result<Self> {
        let m = phi.comps;
        if !(3..=6).contains(&m) {
            return Err(Error::Dimension(m));
        }
        phi.chart.validate()?;
        Ok(Self {
            name: name.into(),
            m,
            phi,
            conformal_claim,
            lambda_exact: None,
        })
    }

    pub fn with_lambda(mut self, lambda: Field) -> Self {
        self.lambda_exact = Some(lambda);
        self
    }

    pub fn chart(&self) -> &GridChart {
        &self.phi.chart
    }

    /// `x -> R x + b` with `rotation` an m x m row-major matrix.
    pub fn rigid_motion(&self, rotation: &[f64], shift: &[f64]) -> Result<Self> {
        let m = self.m;
        if rotation.len() != m * m || shift.len() != m {
            return Err(Error::InvalidParameter(format!(
                "rigid motion in R^{m} needs {} rotation and {m} shift entries",
                m * m
            )));
        }
        let phi = self.phi.map(m, |p, out| {
            for (r, o) in out.iter_mut().enumerate() {
                *o = shift[r] + (0..m).map(|c| rotation[r * m + c] * p[c]).sum::<f64>();
            }
        });
        Ok(Self { phi, ..self.clone() })
    }

    /// Pads the immersion into R^m by zero coordinates.
    pub fn embed(&self, m: usize) -> Result<Self> {
        if m < self.m || m > 6 {
            return Err(Error::Dimension(m));
        }
        let old = self.m;
        let phi = self.phi.map(m, |p, out| {
            out[..old].copy_from_slice(p);
            out[old..].iter_mut().for_each(|o| *o = 0.0);
        });
        Ok(Self { m, phi, ..self.clone() })
    }
}

/// First and second partial derivatives of the immersion.
#[derive(Clone, Debug)]
pub struct Derivatives {
    pub d1: Field,
    pub d2: Field,
    pub d11: Field,
    pub d22: Field,
    pub d12: Field,
}

pub fn partials(im: &Immersion) -> Derivatives {
    let d1 = im.phi.d1();
    let d2 = im.phi.d2();
    let d12 = d2.d1();
    Derivatives {
        d11: im.phi.d11(),
        d22: im.phi.d22(),
        d1,
        d2,
        d12,
    }
}

/// Conformal factor and the dimensionless conformality residual
/// `max(| |Phi1| - |Phi2| | e^-lambda, |<Phi1, Phi2>| e^-2lambda)` over the interior.
#[derive(Clone, Debug)]
pub struct ConformalFactor {
    pub lambda: Field,
    pub residual: f64,
    pub gate: f64,
}

impl ConformalFactor {
    pub fn passes(&self) -> bool {
        self.residual <= self.gate
    }
}

fn check_rank(d1: &Field, d2: &Field, eps: f64) -> Result<()> {
    let c = d1.chart;
    let bad = par::map_collect(c.n1, |i1| {
        (0..c.n2).find_map(|i2| {
            let (a, b) = (d1.at(i1, i2), d2.at(i1, i2));
            let (aa, bb, ab) = (dot(a, a), dot(b, b), dot(a, b));
            let ratio = if aa > 0.0 && bb > 0.0 {
                (aa * bb - ab * ab) / (aa * bb)
            } else {
                0.0
            };
            (!(ratio > eps)).then_some((i2, ratio))
        })
    });
    match bad
        .into_iter()
        .enumerate()
        .find_map(|(i1, b)| b.map(|(i2, r)| (i1, i2, r)))
    {
        Some((i1, i2, ratio)) => Err(Error::RankDeficient { i1, i2, ratio }),
        None => Ok(()),
    }
}

fn conformal_from(im: &Immersion, d1: &Field, d2: &Field, tol: &Tolerances) -> Result<ConformalFactor> {
    check_rank(d1, d2, tol.rank_eps)?;
    let c = *im.chart();
    let lambda = Field::from_fn(c, 1, |i1, i2, out| {
        out[0] = 0.5 * dot(d1.at(i1, i2), d1.at(i1, i2)).ln();
    });
    let r1 = c.interior(Axis::X1, tol.margin);
    let r2 = c.interior(Axis::X2, tol.margin);
    let residual = par::max(r1.len(), |k| {
        let i1 = r1.start + k;
        r2.clone().fold(0.0, |acc: f64, i2| {
            let (a, b) = (d1.at(i1, i2), d2.at(i1, i2));
            let s2 = dot(a, a);
            let s = s2.sqrt();
            let len = (s - dot(b, b).sqrt()).abs() / s;
            acc.max(len).max(dot(a, b).abs() / s2)
        })
    });
    let gate = im.conformal_claim + tol.conformal_discretization * c.h_max().powi(2);
    Ok(ConformalFactor { lambda, residual, gate })
}

/// Conformal factor with its residual; fails only on rank deficiency.
pub fn conformal_factor(im: &Immersion, tol: &Tolerances) -> Result<ConformalFactor> {
    conformal_from(im, &im.phi.d1(), &im.phi.d2(), tol)
}

/// Unit tangent fields, conformal factor and Gauss map `n = *(e1 ^ e2)`, stored as compact
/// grade m-2 components.
#[derive(Clone, Debug)]
pub struct FrameField {
    pub e1: Field,
    pub e2: Field,
    pub lambda: Field,
    pub n: Field,
    /// Orthonormalized tangent basis (`t1 = e1`, `t2` the Gram-Schmidt correction of `e2`).
    pub t1: Field,
    pub t2: Field,
}

pub fn gauss_map(im: &Immersion, tol: &Tolerances) -> Result<FrameField> {
    Ok(SurfaceGeometry::new(im, tol)?.frame)
}

/// Complex scalar field `f` of a quadratic differential `f dz^2`.
#[derive(Clone, Debug)]
pub struct QuadraticDifferential {
    pub re: Field,
    pub im: Field,
    /// Interior maximum of `|d f / d zbar|`.
    pub cr_residual: f64,
}

impl QuadraticDifferential {
    pub fn new<F>(chart: GridChart, margin: usize, f: F) -> Self
    where
        F: Fn(f64, f64) -> (f64, f64) + Sync + Send,
    {
        let re = Field::from_fn(chart, 1, |i1, i2, o| o[0] = f(chart.x1(i1), chart.x2(i2)).0);
        let im = Field::from_fn(chart, 1, |i1, i2, o| o[0] = f(chart.x1(i1), chart.x2(i2)).1);
        Self::from_fields(re, im, margin)
    }

    pub fn from_fields(re: Field, im: Field, margin: usize) -> Self {
        let dbar = dbar(&re, &im);
        let cr_residual = dbar.interior_norms(margin).linf;
        Self { re, im, cr_residual }
    }

    pub fn one(chart: GridChart) -> Self {
        Self::new(chart, 0, |_, _| (1.0, 0.0))
    }
}

/// `d/dzbar = (d1 + i d2) / 2` of a complex field, returned with components (re, im).
fn dbar(re: &Field, im: &Field) -> Field {
    let (a1, a2, b1, b2) = (re.d1(), re.d2(), im.d1(), im.d2());
    let c = re.chart;
    let comps = re.comps;
    Field::from_fn(c, 2 * comps, |i1, i2, out| {
        for k in 0..comps {
            out[k] = 0.5 * (a1.at(i1, i2)[k] - b2.at(i1, i2)[k]);
            out[comps + k] = 0.5 * (b1.at(i1, i2)[k] + a2.at(i1, i2)[k]);
        }
    })
}

/// Weingarten form from the second-derivative formula and from the divergence formula.
#[derive(Clone, Debug)]
pub struct WeingartenField {
    pub re: Field,
    pub im: Field,
    pub alt_re: Field,
    pub alt_im: Field,
    /// Interior L2 distance between the two formulas in the induced area measure, relative to
    /// `|H0| + |H|` in the same measure.
    pub discrepancy: f64,
    /// Interior maximum of the tangential part of the divergence formula.
    pub normality_residual: f64,
}

#[derive(Clone, Debug)]
pub struct MeanCurvature {
    pub h: Field,
    pub willmore_energy: f64,
}

#[derive(Clone, Debug)]
pub struct IsothermicResidual {
    /// Pointwise `|Im(conj(f) H0)|`.
    pub pointwise: Field,
    pub max: f64,
    /// For `f = 1`: `d1[e^-2l Phi2] + d2[e^-2l Phi1]`.
    pub vector: Option<Field>,
    /// For `f = 1`: distance between `Im H0` and minus half the vector residual, measured like
    /// [`WeingartenField::discrepancy`].
    pub identity_discrepancy: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Residual {
    pub field: Field,
    pub norms: Norms,
}

#[derive(Clone, Debug)]
pub struct ConstrainedWillmore {
    pub residual: Residual,
    /// `f = e^{2 lambda} H0 . H` as a quadratic differential, with its holomorphy residual.
    pub f: QuadraticDifferential,
    /// Willmore operator plus `4 Re(f conj H0)`.
    pub chain: Residual,
}

#[derive(Clone, Debug)]
pub struct ChristoffelDual {
    pub dual: Immersion,
    pub closure: f64,
    /// Interior max of `|Phi1 . L2 - Phi2 . L1|` relative to `|Phi1||L2| + |Phi2||L1|`.
    pub dot_residual: f64,
    /// Same for `|Phi1 ^ L2 - Phi2 ^ L1|`.
    pub wedge_residual: f64,
}

/// Derivatives, frame and gates of one immersion, shared by all residual operators.
pub struct SurfaceGeometry<'a> {
    pub im: &'a Immersion,
    pub der: Derivatives,
    pub conformal: ConformalFactor,
    pub frame: FrameField,
    tol: Tolerances,
}

impl<'a> SurfaceGeometry<'a> {
    /// Runs the rank and conformality gates.
    pub fn new(im: &'a Immersion, tol: &Tolerances) -> Result<Self> {
        let g = Self::ungated(im, tol)?;
        if !g.conformal.passes() {
            return Err(Error::NotConformal {
                residual: g.conformal.residual,
                gate: g.conformal.gate,
            });
        }
        Ok(g)
    }

    /// Runs only the rank gate. Used by diagnostics that are meaningful on any chart.
    pub fn ungated(im: &'a Immersion, tol: &Tolerances) -> Result<Self> {
        let der = partials(im);
        let conformal = conformal_from(im, &der.d1, &der.d2, tol)?;
        let m = im.m;
        let normal_table = GradedProduct::new(m, 1, 1, m - 2, |a, b| Ok(a.wedge(b).hodge()))?;
        let frame = build_frame(&der, &conformal.lambda, &normal_table);
        Ok(Self {
            im,
            der,
            conformal,
            frame,
            tol: tol.clone(),
        })
    }

    pub fn chart(&self) -> GridChart {
        *self.im.chart()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn margin(&self) -> usize {
        self.tol.margin
    }

    #[inline]
    pub fn lambda(&self, i1: usize, i2: usize) -> f64 {
        self.frame.lambda.value(i1, i2)
    }

    /// Interior L2 norm with respect to the induced area `e^{2 lambda} dx1 dx2`.
    pub fn area_l2(&self, f: &Field) -> f64 {
        let c = self.chart();
        let r1 = c.interior(Axis::X1, self.tol.margin);
        let r2 = c.interior(Axis::X2, self.tol.margin);
        par::sum(r1.len(), |k| {
            let i1 = r1.start + k;
            r2.clone()
                .map(|i2| {
                    let v = f.at(i1, i2);
                    dot(v, v) * (2.0 * self.lambda(i1, i2)).exp() * c.node_weight(i1, i2)
                })
                .sum()
        })
        .sqrt()
    }

    /// Margin for operators that nest four derivatives: one-sided boundary errors reach one
    /// node further into the interior.
    fn deep_margin(&self) -> usize {
        self.tol.margin + 1
    }

    /// Normal projection of `v` at a node.
    #[inline]
    pub fn project_normal(&self, i1: usize, i2: usize, v: &[f64], out: &mut [f64]) {
        let (t1, t2) = (self.frame.t1.at(i1, i2), self.frame.t2.at(i1, i2));
        let (a, b) = (dot(v, t1), dot(v, t2));
        for k in 0..v.len() {
            out[k] = v[k] - a * t1[k] - b * t2[k];
        }
    }

    /// Projects every node of an m-component field onto the normal space.
    pub fn normal_part(&self, f: &Field) -> Field {
        Field::from_fn(self.chart(), f.comps, |i1, i2, out| {
            self.project_normal(i1, i2, f.at(i1, i2), out)
        })
    }

    /// `e^{-2 lambda} Phi_i` for i = 1, 2.
    fn scaled_tangents(&self) -> (Field, Field) {
        let m = self.im.m;
        let c = self.chart();
        let g = |d: &Field| {
            Field::from_fn(c, m, |i1, i2, out| {
                let s = (-2.0 * self.lambda(i1, i2)).exp();
                for (o, v) in out.iter_mut().zip(d.at(i1, i2)) {
                    *o = s * v;
                }
            })
        };
        (g(&self.der.d1), g(&self.der.d2))
    }

    /// `H0 = 1/2 e^{-2 lambda} pi_n(Phi11 - Phi22 - 2i Phi12)` as (re, im).
    pub fn h0(&self) -> (Field, Field) {
        let m = self.im.m;
        let c = self.chart();
        let d = &self.der;
        let re = Field::from_fn(c, m, |i1, i2, out| {
            let s = 0.5 * (-2.0 * self.lambda(i1, i2)).exp();
            let mut v = [0.0; 6];
            for k in 0..m {
                v[k] = s * (d.d11.at(i1, i2)[k] - d.d22.at(i1, i2)[k]);
            }
            self.project_normal(i1, i2, &v[..m], out);
        });
        let im = Field::from_fn(c, m, |i1, i2, out| {
            let s = -(-2.0 * self.lambda(i1, i2)).exp();
            let mut v = [0.0; 6];
            for k in 0..m {
                v[k] = s * d.d12.at(i1, i2)[k];
            }
            self.project_normal(i1, i2, &v[..m], out);
        });
        (re, im)
    }

    pub fn mean_curvature(&self) -> MeanCurvature {
        let m = self.im.m;
        let c = self.chart();
        let d = &self.der;
        let h = Field::from_fn(c, m, |i1, i2, out| {
            let s = 0.5 * (-2.0 * self.lambda(i1, i2)).exp();
            let mut v = [0.0; 6];
            for k in 0..m {
                v[k] = s * (d.d11.at(i1, i2)[k] + d.d22.at(i1, i2)[k]);
            }
            self.project_normal(i1, i2, &v[..m], out);
        });
        let willmore_energy = par::sum(c.n1, |i1| {
            (0..c.n2)
                .map(|i2| {
                    let hv = h.at(i1, i2);
                    dot(hv, hv) * (2.0 * self.lambda(i1, i2)).exp() * c.node_weight(i1, i2)
                })
                .sum()
        });
        MeanCurvature { h, willmore_energy }
    }

    pub fn weingarten(&self) -> WeingartenField {
        let (re, im) = self.h0();
        let (g1, g2) = self.scaled_tangents();
        let alt_re = g1.d1().sub(&g2.d2()).scale(0.5);
        let alt_im = g2.d1().add(&g1.d2()).scale(-0.5);
        let margin = self.margin();
        let h = self.mean_curvature().h;
        let diff = stack(&re.sub(&alt_re), &im.sub(&alt_im));
        let scale = self.area_l2(&stack(&re, &im)) + self.area_l2(&h);
        let discrepancy = ratio(self.area_l2(&diff), scale);
        let alt = stack(&alt_re, &alt_im);
        let tangential = Field::from_fn(self.chart(), 2 * self.im.m, |i1, i2, out| {
            let m = self.im.m;
            let v = alt.at(i1, i2);
            let mut p = [0.0; 6];
            for part in 0..2 {
                self.project_normal(i1, i2, &v[part * m..(part + 1) * m], &mut p);
                for k in 0..m {
                    out[part * m + k] = v[part * m + k] - p[k];
                }
            }
        });
        WeingartenField {
            re,
            im,
            alt_re,
            alt_im,
            discrepancy,
            normality_residual: tangential.interior_norms(margin).linf,
        }
    }

    /// `d1[e^-2l Phi2] + d2[e^-2l Phi1]`.
    pub fn isothermic_vector(&self) -> Field {
        let (g1, g2) = self.scaled_tangents();
        g2.d1().add(&g1.d2())
    }

    pub fn isothermic_residual(&self, q: &QuadraticDifferential) -> Result<IsothermicResidual> {
        if !q.re.chart.same_nodes(self.im.chart()) {
            return Err(Error::ChartMismatch(
                "quadratic differential and immersion use different charts".into(),
            ));
        }
        let (re, im) = self.h0();
        let pointwise = Field::from_fn(self.chart(), 1, |i1, i2, out| {
            let (fr, fi) = (q.re.value(i1, i2), q.im.value(i1, i2));
            let (hr, hi) = (re.at(i1, i2), im.at(i1, i2));
            out[0] = hr
                .iter()
                .zip(hi)
                .map(|(a, b)| (fr * b - fi * a).powi(2))
                .sum::<f64>()
                .sqrt();
        });
        let max = pointwise.interior_norms(self.margin()).linf;
        let is_one = q.re.data.iter().all(|v| *v == 1.0) && q.im.data.iter().all(|v| *v == 0.0);
        let (vector, identity_discrepancy) = if is_one {
            let v = self.isothermic_vector();
            let diff = im.add(&v.scale(0.5));
            let scale = self.area_l2(&stack(&re, &im)) + self.area_l2(&self.mean_curvature().h);
            let d = ratio(self.area_l2(&diff), scale);
            (Some(v), Some(d))
        } else {
            (None, None)
        };
        Ok(IsothermicResidual {
            pointwise,
            max,
            vector,
            identity_discrepancy,
        })
    }

    /// Interior max of `|Im H0|`, the gate used by operators that need isothermic coordinates.
    pub fn isothermic_defect(&self) -> f64 {
        self.h0().1.interior_norms(self.margin()).linf
    }

    pub fn require_isothermic(&self, module: &'static str) -> Result<f64> {
        let r = self.isothermic_defect();
        if r > self.tol.isothermic_gate {
            return Err(Error::NotIsothermic {
                module,
                residual: r,
                gate: self.tol.isothermic_gate,
            });
        }
        Ok(r)
    }

    fn willmore_operator(&self, h: &Field) -> Field {
        let m = self.im.m;
        let c = self.chart();
        let n = &self.frame.n;
        let (h1, h2) = (h.d1(), h.d2());
        let (n1, n2) = (n.d1(), n.d2());
        let star = GradedProduct::new(m, m - 2, 1, 1, |a, b| Ok(a.wedge(b).hodge()))
            .expect("grade m-2 wedge vector is an (m-1)-vector");
        let flux = |dh: &Field, w: &Field, sign: f64| {
            Field::from_fn(c, m, |i1, i2, out| {
                let dhv = dh.at(i1, i2);
                let mut p = [0.0; 6];
                self.project_normal(i1, i2, dhv, &mut p);
                let mut s = [0.0; 6];
                star.apply(w.at(i1, i2), h.at(i1, i2), &mut s);
                for k in 0..m {
                    out[k] = dhv[k] - 3.0 * p[k] + sign * s[k];
                }
            })
        };
        let v1 = flux(&h1, &n2, -1.0);
        let v2 = flux(&h2, &n1, 1.0);
        v1.d1().add(&v2.d2())
    }

    /// `div(grad H - 3 pi_n(grad H) + *(grad^perp n ^ H))`.
    pub fn willmore_residual(&self) -> Residual {
        let h = self.mean_curvature().h;
        let field = self.willmore_operator(&h);
        Residual {
            norms: field.interior_norms(self.deep_margin()),
            field,
        }
    }

    pub fn constrained_willmore(&self, q: f64) -> ConstrainedWillmore {
        let m = self.im.m;
        let c = self.chart();
        let h = self.mean_curvature().h;
        let w = self.willmore_operator(&h);
        let s = self.isothermic_vector();
        let field = w.sub(&s.scale(q));
        let (h0r, h0i) = self.h0();
        let f_re = Field::from_fn(c, 1, |i1, i2, o| {
            o[0] = (2.0 * self.lambda(i1, i2)).exp() * dot(h0r.at(i1, i2), h.at(i1, i2))
        });
        let f_im = Field::from_fn(c, 1, |i1, i2, o| {
            o[0] = (2.0 * self.lambda(i1, i2)).exp() * dot(h0i.at(i1, i2), h.at(i1, i2))
        });
        let chain = Field::from_fn(c, m, |i1, i2, out| {
            let (fr, fi) = (f_re.value(i1, i2), f_im.value(i1, i2));
            for k in 0..m {
                out[k] = w.at(i1, i2)[k] + 4.0 * (fr * h0r.at(i1, i2)[k] + fi * h0i.at(i1, i2)[k]);
            }
        });
        let margin = self.deep_margin();
        ConstrainedWillmore {
            residual: Residual {
                norms: field.interior_norms(margin),
                field,
            },
            f: QuadraticDifferential::from_fields(f_re, f_im, self.margin()),
            chain: Residual {
                norms: chain.interior_norms(margin),
                field: chain,
            },
        }
    }

    /// `e^{-2l} d_zbar(e^{2l} H0 . H) - H . d_z H - H0 . d_zbar H`, components (re, im).
    pub fn codazzi_residual(&self) -> Residual {
        let c = self.chart();
        let h = self.mean_curvature().h;
        let (h0r, h0i) = self.h0();
        let e2l = |i1: usize, i2: usize| (2.0 * self.lambda(i1, i2)).exp();
        let f_re = Field::from_fn(c, 1, |i1, i2, o| o[0] = e2l(i1, i2) * dot(h0r.at(i1, i2), h.at(i1, i2)));
        let f_im = Field::from_fn(c, 1, |i1, i2, o| o[0] = e2l(i1, i2) * dot(h0i.at(i1, i2), h.at(i1, i2)));
        let fbar = dbar(&f_re, &f_im);
        let (dh1, dh2) = (h.d1(), h.d2());
        let field = Field::from_fn(c, 2, |i1, i2, out| {
            let s = 1.0 / e2l(i1, i2);
            let hv = h.at(i1, i2);
            let (a1, a2) = (dh1.at(i1, i2), dh2.at(i1, i2));
            let (r, i) = (h0r.at(i1, i2), h0i.at(i1, i2));
            let hdz_re = 0.5 * dot(hv, a1);
            let hdz_im = -0.5 * dot(hv, a2);
            let h0dzb_re = 0.5 * (dot(r, a1) - dot(i, a2));
            let h0dzb_im = 0.5 * (dot(r, a2) + dot(i, a1));
            let fb = fbar.at(i1, i2);
            out[0] = s * fb[0] - hdz_re - h0dzb_re;
            out[1] = s * fb[1] - hdz_im - h0dzb_im;
        });
        Residual {
            norms: field.interior_norms(self.margin()),
            field,
        }
    }

    /// `-Delta lambda - e^{2 lambda} K` with the extrinsic Gauss curvature.
    pub fn liouville(&self) -> Residual {
        let c = self.chart();
        let m = self.im.m;
        let d = &self.der;
        let lap = self.frame.lambda.laplacian();
        let field = Field::from_fn(c, 1, |i1, i2, out| {
            let (mut a, mut b, mut e) = ([0.0; 6], [0.0; 6], [0.0; 6]);
            self.project_normal(i1, i2, d.d11.at(i1, i2), &mut a);
            self.project_normal(i1, i2, d.d22.at(i1, i2), &mut b);
            self.project_normal(i1, i2, d.d12.at(i1, i2), &mut e);
            let l = self.lambda(i1, i2);
            let k = (-4.0 * l).exp() * (dot(&a[..m], &b[..m]) - dot(&e[..m], &e[..m]));
            out[0] = -lap.value(i1, i2) - (2.0 * l).exp() * k;
        });
        Residual {
            norms: field.interior_norms(self.margin()),
            field,
        }
    }

    /// Integrates `e^{-2l} Phi1 dx1 - e^{-2l} Phi2 dx2` along the spine: first the `i1 = 0`
    /// line in x2, then every line of constant x2 in x1.
    pub fn christoffel_dual(&self) -> Result<ChristoffelDual> {
        self.require_isothermic("geometry_core")?;
        let c = self.chart();
        let m = self.im.m;
        let (w1, g2) = self.scaled_tangents();
        let w2 = g2.scale(-1.0);
        let closure = loop_closure(&w1, &w2);
        if closure > self.tol.closure {
            return Err(Error::NotIsothermic {
                module: "geometry_core",
                residual: closure,
                gate: self.tol.closure,
            });
        }
        let l = integrate_one_form(&w1, &w2);
        let dual = Immersion {
            name: format!("{}_dual", self.im.name),
            m,
            phi: l,
            conformal_claim: self.im.conformal_claim,
            lambda_exact: self.im.lambda_exact.as_ref().map(|f| f.scale(-1.0)),
        };
        let (l1, l2) = (dual.phi.d1(), dual.phi.d2());
        let d = &self.der;
        let r1 = c.interior(Axis::X1, self.tol.margin);
        let r2 = c.interior(Axis::X2, self.tol.margin);
        let pair = par::map_collect(r1.len(), |k| {
            let i1 = r1.start + k;
            r2.clone().fold((0.0f64, 0.0f64), |(dm, wm), i2| {
                let (p1, p2) = (d.d1.at(i1, i2), d.d2.at(i1, i2));
                let (q1, q2) = (l1.at(i1, i2), l2.at(i1, i2));
                let scale = norm(p1) * norm(q2) + norm(p2) * norm(q1);
                let dres = (dot(p1, q2) - dot(p2, q1)).abs() / scale;
                let mut w2 = 0.0;
                for a in 0..m {
                    for b in a + 1..m {
                        let v = (p1[a] * q2[b] - p1[b] * q2[a]) - (p2[a] * q1[b] - p2[b] * q1[a]);
                        w2 += v * v;
                    }
                }
                (dm.max(dres), wm.max(w2.sqrt() / scale))
            })
        });
        let (dot_residual, wedge_residual) = pair
            .into_iter()
            .fold((0.0f64, 0.0f64), |(a, b), (x, y)| (a.max(x), b.max(y)));
        Ok(ChristoffelDual {
            dual,
            closure,
            dot_residual,
            wedge_residual,
        })
    }
}

fn build_frame(der: &Derivatives, lambda: &Field, table: &GradedProduct) -> FrameField {
    let c = der.d1.chart;
    let m = der.d1.comps;
    let t1 = der.d1.map(m, |p, out| {
        let s = 1.0 / norm(p);
        out.iter_mut().zip(p).for_each(|(o, v)| *o = s * v);
    });
    let t2 = Field::from_fn(c, m, |i1, i2, out| {
        let (u, p) = (t1.at(i1, i2), der.d2.at(i1, i2));
        let a = dot(p, u);
        for k in 0..m {
            out[k] = p[k] - a * u[k];
        }
        let s = 1.0 / norm(out);
        out.iter_mut().for_each(|o| *o *= s);
    });
    let e2 = Field::from_fn(c, m, |i1, i2, out| {
        let s = (-lambda.value(i1, i2)).exp();
        out.iter_mut().zip(der.d2.at(i1, i2)).for_each(|(o, v)| *o = s * v);
    });
    let n = Field::from_fn(c, table.out_len(), |i1, i2, out| {
        table.apply(t1.at(i1, i2), t2.at(i1, i2), out)
    });
    FrameField {
        e1: t1.clone(),
        e2,
        lambda: lambda.clone(),
        n,
        t1,
        t2,
    }
}

/// Largest full-period integral of a one-form around a periodic axis.
fn loop_closure(w1: &Field, w2: &Field) -> f64 {
    let c = w1.chart;
    let mut worst: f64 = 0.0;
    if c.periodic1 {
        for i2 in 0..c.n2 {
            let mut s = vec![0.0; w1.comps];
            for i1 in 0..c.n1 {
                s.iter_mut().zip(w1.at(i1, i2)).for_each(|(a, v)| *a += v * c.h1());
            }
            worst = worst.max(norm(&s));
        }
    }
    if c.periodic2 {
        for i1 in 0..c.n1 {
            let mut s = vec![0.0; w2.comps];
            for i2 in 0..c.n2 {
                s.iter_mut().zip(w2.at(i1, i2)).for_each(|(a, v)| *a += v * c.h2());
            }
            worst = worst.max(norm(&s));
        }
    }
    worst
}

/// Trapezoid path integral of `w1 dx1 + w2 dx2` from node (0, 0) along the spine.
pub fn integrate_one_form(w1: &Field, w2: &Field) -> Field {
    let c = w1.chart;
    let m = w1.comps;
    let mut spine = vec![0.0; c.n2 * m];
    for i2 in 1..c.n2 {
        for k in 0..m {
            spine[i2 * m + k] = spine[(i2 - 1) * m + k] + 0.5 * c.h2() * (w2.at(0, i2 - 1)[k] + w2.at(0, i2)[k]);
        }
    }
    // Each line of constant x2 is independent; integrate them in parallel, then transpose.
    let lines: Vec<Vec<f64>> = par::map_collect(c.n2, |i2| {
        let mut line = vec![0.0; c.n1 * m];
        line[..m].copy_from_slice(&spine[i2 * m..(i2 + 1) * m]);
        for i1 in 1..c.n1 {
            for k in 0..m {
                line[i1 * m + k] = line[(i1 - 1) * m + k] + 0.5 * c.h1() * (w1.at(i1 - 1, i2)[k] + w1.at(i1, i2)[k]);
            }
        }
        line
    });
    Field::from_fn(c, m, |i1, i2, out| {
        out.copy_from_slice(&lines[i2][i1 * m..(i1 + 1) * m])
    })
}

/// Least-squares sphere through a point cloud: returns the centre and the relative radius
/// spread `(max r - min r) / mean r`.
pub fn sphere_fit(points: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
    let m = points.first().map_or(0, |p| p.len());
    if points.len() < m + 2 {
        return Err(Error::InvalidParameter("sphere fit needs at least m + 2 points".into()));
    }
    // |x|^2 = 2 c . x + k, linear in (c, k).
    let a = DMatrix::from_fn(points.len(), m + 1, |r, j| if j < m { 2.0 * points[r][j] } else { 1.0 });
    let b = DVector::from_fn(points.len(), |r, _| dot(&points[r], &points[r]));
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::InvalidParameter(format!("sphere fit: {e}")))?;
    let centre: Vec<f64> = sol.iter().take(m).copied().collect();
    let radii: Vec<f64> = points
        .iter()
        .map(|p| p.iter().zip(&centre).map(|(x, c)| (x - c).powi(2)).sum::<f64>().sqrt())
        .collect();
    let mean = radii.iter().sum::<f64>() / radii.len() as f64;
    let (lo, hi) = radii
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), r| (lo.min(*r), hi.max(*r)));
    Ok((centre, (hi - lo) / mean))
}

/// Dimension of the compact storage of the Gauss map.
pub fn normal_components(m: usize) -> usize {
    grade_masks(m, m - 2).len()
}

/// Gauss map at a node as a multivector.
pub fn normal_multivector(frame: &FrameField, m: usize, i1: usize, i2: usize) -> Result<Multivector> {
    Multivector::from_grade(m, m - 2, frame.n.at(i1, i2))
}

/// Concatenates two fields on the same chart component-wise.
pub fn stack(a: &Field, b: &Field) -> Field {
    let (ca, cb) = (a.comps, b.comps);
    Field::from_fn(a.chart, ca + cb, |i1, i2, out| {
        out[..ca].copy_from_slice(a.at(i1, i2));
        out[ca..].copy_from_slice(b.at(i1, i2));
    })
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn weingarten(im: &Immersion, tol: &Tolerances) -> Result<WeingartenField> {
    Ok(SurfaceGeometry::new(im, tol)?.weingarten())
}

pub fn mean_curvature(im: &Immersion, tol: &Tolerances) -> Result<MeanCurvature> {
    Ok(SurfaceGeometry::new(im, tol)?.mean_curvature())
}

pub fn isothermic_residual(im: &Immersion, q: &QuadraticDifferential, tol: &Tolerances) -> Result<IsothermicResidual> {
    SurfaceGeometry::new(im, tol)?.isothermic_residual(q)
}

pub fn willmore_residual(im: &Immersion, tol: &Tolerances) -> Result<Residual> {
    Ok(SurfaceGeometry::new(im, tol)?.willmore_residual())
}

pub fn constrained_willmore_residual(im: &Immersion, q: f64, tol: &Tolerances) -> Result<ConstrainedWillmore> {
    if !(q >= 0.0) {
        return Err(Error::InvalidParameter(format!("Q must be nonnegative, got {q}")));
    }
    Ok(SurfaceGeometry::new(im, tol)?.constrained_willmore(q))
}

pub fn codazzi_residual(im: &Immersion, tol: &Tolerances) -> Result<Residual> {
    Ok(SurfaceGeometry::new(im, tol)?.codazzi_residual())
}

pub fn christoffel_dual(im: &Immersion, tol: &Tolerances) -> Result<ChristoffelDual> {
    SurfaceGeometry::new(im, tol)?.christoffel_dual()
}

pub fn liouville_check(im: &Immersion, tol: &Tolerances) -> Result<Residual> {
    Ok(SurfaceGeometry::new(im, tol)?.liouville())
}

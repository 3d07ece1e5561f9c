//! Entropy densities and fluxes of isothermic immersions, their conservation laws, and the
//! potentials `A`, `B`, `alpha` obtained by integrating them.
//!
//! For an isothermic chart, with `e_i = e^{-lambda} Phi_i`,
//!
//! ```text
//! D1 = |d2 n ⌐ e2|^2 + lambda_1^2 - lambda_2^2,   D2 = |d1 n ⌐ e1|^2 + lambda_2^2 - lambda_1^2,
//! F  = 2 lambda_1 lambda_2,
//! d1 D1 + d2 F = 0,   d2 D2 + d1 F = 0.
//! ```
//!
//! Squares of `(m-3)`-vectors are squared Euclidean norms.

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::geometry::{integrate_one_form, Immersion, SurfaceGeometry};
use crate::grid::{Field, GridChart, Norms};
use crate::multivector::GradedProduct;

const MODULE: &str = "entropy_laws";

#[derive(Clone, Debug)]
pub struct EntropyFields {
    pub d1: Field,
    pub d2: Field,
    pub f: Field,
    /// `d1 D1 + d2 F`.
    pub residual1: Field,
    /// `d2 D2 + d1 F`.
    pub residual2: Field,
    pub norms1: Norms,
    pub norms2: Norms,
    /// Interior L1 residual of both laws over the summed L1 sizes of the derivatives of each
    /// square they balance.
    pub relative: f64,
    pub isothermic_defect: f64,
    pub margin: usize,
}

/// Squared norms of the four frame contractions `d_i n ⌐ e_j`, indexed `[i][j]`. Both frame
/// vectors are `Phi_j / |Phi_j|`, which keeps the construction symmetric in the coordinates.
fn contractions(g: &SurfaceGeometry) -> Result<[[Field; 2]; 2]> {
    let m = g.im.m;
    let table = GradedProduct::new(m, m - 2, 1, m - 3, |a, b| a.contract(b))?;
    let n = &g.frame.n;
    let dn = [n.d1(), n.d2()];
    let unit = |d: &Field| {
        d.map(m, |p, out| {
            let s = 1.0 / p.iter().map(|v| v * v).sum::<f64>().sqrt();
            out.iter_mut().zip(p).for_each(|(o, v)| *o = s * v);
        })
    };
    let e = [unit(&g.der.d1), unit(&g.der.d2)];
    let sq = |i: usize, j: usize| {
        Field::from_fn(g.chart(), 1, |i1, i2, out| {
            let mut buf = [0.0; 20];
            table.apply(dn[i].at(i1, i2), e[j].at(i1, i2), &mut buf);
            out[0] = buf[..table.out_len()].iter().map(|v| v * v).sum();
        })
    };
    Ok([[sq(0, 0), sq(0, 1)], [sq(1, 0), sq(1, 1)]])
}

/// `(ln |Phi_1|^2 + ln |Phi_2|^2) / 4`, invariant under swapping the coordinates.
fn symmetric_lambda(g: &SurfaceGeometry) -> Field {
    let sq = |p: &[f64]| p.iter().map(|v| v * v).sum::<f64>();
    Field::from_fn(g.chart(), 1, |i1, i2, out| {
        out[0] = 0.25 * (sq(g.der.d1.at(i1, i2)).ln() + sq(g.der.d2.at(i1, i2)).ln())
    })
}

/// Densities, fluxes and conservation residuals. Refuses charts failing the isothermic gate.
pub fn entropy_fields(im: &Immersion, tol: &Tolerances) -> Result<EntropyFields> {
    let g = SurfaceGeometry::new(im, tol)?;
    let isothermic_defect = g.require_isothermic(MODULE)?;
    let c = contractions(&g)?;
    let chart = g.chart();
    let lam = symmetric_lambda(&g);
    let (l1, l2) = (lam.d1(), lam.d2());
    let d1 = Field::from_fn(chart, 1, |i1, i2, out| {
        let (a, b) = (l1.value(i1, i2), l2.value(i1, i2));
        out[0] = c[1][1].value(i1, i2) + a * a - b * b;
    });
    let d2 = Field::from_fn(chart, 1, |i1, i2, out| {
        let (a, b) = (l1.value(i1, i2), l2.value(i1, i2));
        out[0] = c[0][0].value(i1, i2) + b * b - a * a;
    });
    let f = Field::from_fn(chart, 1, |i1, i2, out| {
        out[0] = 2.0 * l1.value(i1, i2) * l2.value(i1, i2)
    });
    // Three nested differences: one-sided boundary stencils reach one node further in.
    let margin = g.margin() + 1;
    let residual1 = d1.d1().add(&f.d2());
    let residual2 = d2.d2().add(&f.d1());
    let norms1 = residual1.interior_norms(margin);
    let norms2 = residual2.interior_norms(margin);
    // The laws balance derivatives of the individual squares; their sizes set the scale.
    let sq = |a: &Field| a.map(1, |v, o| o[0] = v[0] * v[0]);
    let (s1, s2) = (sq(&l1), sq(&l2));
    let scale: f64 = [
        c[1][1].d1(),
        s1.d1(),
        s2.d1(),
        f.d2(),
        c[0][0].d2(),
        s1.d2(),
        s2.d2(),
        f.d1(),
    ]
    .iter()
    .map(|t| t.interior_norms(margin).l1)
    .sum();
    // Constant densities cancel to rounding; the floor keeps the ratio meaningful there.
    let area = Field::from_fn(chart, 1, |_, _, o| o[0] = 1.0).interior_norms(margin).l1;
    let mass: f64 = [&d1, &d2, &f].iter().map(|t| t.interior_norms(margin).l1).sum();
    let relative = (norms1.l1 + norms2.l1) / scale.max(1e-6 * (mass + area));
    Ok(EntropyFields {
        d1,
        d2,
        f,
        residual1,
        residual2,
        norms1,
        norms2,
        relative,
        isothermic_defect,
        margin,
    })
}

/// Interior maxima of the quantities that vanish on isothermic charts.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    /// `|pi_n(Phi_12)|`.
    pub normal_mixed: f64,
    /// `|d2 n ⌐ Phi_1|`.
    pub d2n_phi1: f64,
    /// `|d1 n ⌐ Phi_2|`.
    pub d1n_phi2: f64,
    /// `| |grad n|^2 - |d1 n ⌐ e1|^2 - |d2 n ⌐ e2|^2 |` relative to `max |grad n|^2`.
    pub gradient_identity: f64,
    pub isothermic_defect: f64,
}

/// Orthogonality report on a chart that passes the isothermic gate.
pub fn orthogonality_checks(im: &Immersion, tol: &Tolerances) -> Result<OrthogonalityReport> {
    let g = SurfaceGeometry::new(im, tol)?;
    g.require_isothermic(MODULE)?;
    orthogonality_of(&g)
}

/// Same report without the conformal and isothermic gates, for diagnosing arbitrary charts.
pub fn orthogonality_report(im: &Immersion, tol: &Tolerances) -> Result<OrthogonalityReport> {
    orthogonality_of(&SurfaceGeometry::ungated(im, tol)?)
}

fn orthogonality_of(g: &SurfaceGeometry) -> Result<OrthogonalityReport> {
    let margin = g.margin();
    let normal_mixed = g.normal_part(&g.der.d12).interior_norms(margin).linf;
    let c = contractions(g)?;
    let lam = &g.frame.lambda;
    let scaled = |f: &Field| {
        Field::from_fn(g.chart(), 1, |i1, i2, out| {
            out[0] = (f.value(i1, i2) * (2.0 * lam.value(i1, i2)).exp()).sqrt()
        })
        .interior_norms(margin)
        .linf
    };
    let n = &g.frame.n;
    let (n1, n2) = (n.d1(), n.d2());
    let grad_sq = Field::from_fn(g.chart(), 1, |i1, i2, out| {
        let s = |f: &Field| f.at(i1, i2).iter().map(|v| v * v).sum::<f64>();
        out[0] = s(&n1) + s(&n2);
    });
    let gap = Field::from_fn(g.chart(), 1, |i1, i2, out| {
        out[0] = grad_sq.value(i1, i2) - c[0][0].value(i1, i2) - c[1][1].value(i1, i2)
    });
    let top = grad_sq.interior_norms(margin).linf;
    let gap = gap.interior_norms(margin).linf;
    Ok(OrthogonalityReport {
        normal_mixed,
        d2n_phi1: scaled(&c[1][0]),
        d1n_phi2: scaled(&c[0][1]),
        gradient_identity: if top > 1e-300 { gap / top } else { gap },
        isothermic_defect: g.isothermic_defect(),
    })
}

/// `A`, `B` with `grad A = (-F, D1)`, `grad B = (D2, -F)`, and `alpha` with
/// `grad alpha = (B, A)`, all of zero mean. Potentials live on the unrolled chart: they need
/// not be periodic.
#[derive(Clone, Debug)]
pub struct Potentials {
    pub a: Field,
    pub b: Field,
    pub alpha: Field,
    pub curl: CurlResiduals,
    /// Interior norms of `alpha_22 - D1`, `alpha_11 - D2`, `alpha_12 + F`.
    pub identities: [Norms; 3],
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CurlResiduals {
    /// `d1 A - d2 B`.
    pub ab: Norms,
    /// Largest gap between the two line-integration orders, per potential.
    pub path_a: f64,
    pub path_b: f64,
    pub path_alpha: f64,
}

/// Integrates the entropy fields. Refuses when the conservation laws fail the relative
/// integrability gate.
pub fn reconstruct_potentials(ef: &EntropyFields, tol: &Tolerances) -> Result<Potentials> {
    if !(ef.relative <= tol.integrability) {
        return Err(Error::Integrability {
            residual: ef.relative,
            gate: tol.integrability,
        });
    }
    let chart = ef.d1.chart.unrolled();
    let on = |f: &Field| Field {
        chart,
        comps: 1,
        data: f.data.clone(),
    };
    let (d1, d2, f) = (on(&ef.d1), on(&ef.d2), on(&ef.f));
    let minus_f = f.scale(-1.0);
    // alpha integrates the primitives anchored at the first node; all three are centred after.
    let (a, path_a) = potential(&minus_f, &d1);
    let (b, path_b) = potential(&d2, &minus_f);
    let (alpha, path_alpha) = potential(&b, &a);
    let (a, b, alpha) = (centred(a), centred(b), centred(alpha));
    let m = ef.margin;
    let ab = a.d1().sub(&b.d2()).interior_norms(m);
    let identities = [
        alpha.d22().sub(&d1).interior_norms(m),
        alpha.d11().sub(&d2).interior_norms(m),
        alpha.d12().add(&f).interior_norms(m),
    ];
    Ok(Potentials {
        a,
        b,
        alpha,
        curl: CurlResiduals {
            ab,
            path_a,
            path_b,
            path_alpha,
        },
        identities,
    })
}

/// Primitive of `(w1, w2)` vanishing at the first node: the average of both line-integration
/// orders, with the largest gap between them.
fn potential(w1: &Field, w2: &Field) -> (Field, f64) {
    let first = integrate_one_form(w1, w2);
    let second = transpose(&integrate_one_form(&transpose(w2), &transpose(w1)));
    let gap = first.sub(&second).max_abs();
    (first.add(&second).scale(0.5), gap)
}

fn centred(f: Field) -> Field {
    let mean = f.mean();
    f.map(1, |v, o| o[0] = v[0] - mean)
}

fn transpose(f: &Field) -> Field {
    let c = f.chart;
    let t = GridChart {
        x1_range: c.x2_range,
        x2_range: c.x1_range,
        n1: c.n2,
        n2: c.n1,
        periodic1: c.periodic2,
        periodic2: c.periodic1,
    };
    Field::from_fn(t, f.comps, |i1, i2, out| out.copy_from_slice(f.at(i2, i1)))
}

//! Levi-Civita connection and curvature from metric jets.
//!
//! Components depend on the first two coordinates only; derivatives along
//! the remaining (Killing) coordinates vanish identically.

use crate::jet::{Jet, Scalar};
use crate::metric::{det_sym, inv_sym, sym, PointJets};

pub type Mat<T, const N: usize> = [[T; N]; N];
pub type Gamma<T, const N: usize> = [[[T; N]; N]; N];
pub type Riemann<T, const N: usize> = [[[[T; N]; N]; N]; N];

/// The 4-metric in coordinates `(t1, t2, z1, z2)`.
pub fn four_metric<T: Scalar>(j: &PointJets<T>) -> Mat<Jet<T>, 4> {
    let z = j.h[0].zero_like();
    let mut g = [[z; 4]; 4];
    let hf = |i: usize, k: usize| j.fk(i, 0) * sym(&j.h, 0, k) + j.fk(i, 1) * sym(&j.h, 1, k);
    for i in 0..2 {
        for jj in 0..2 {
            g[i][jj] = sym(&j.gt, i, jj) + j.fk(i, 0) * hf(jj, 0) + j.fk(i, 1) * hf(jj, 1);
        }
        for k in 0..2 {
            g[i][2 + k] = hf(i, k);
            g[2 + k][i] = g[i][2 + k];
        }
    }
    for k in 0..2 {
        for l in 0..2 {
            g[2 + k][2 + l] = sym(&j.h, k, l);
        }
    }
    g
}

/// Inverse 4-metric from the block structure of the submersion form.
pub fn four_inverse<T: Scalar>(j: &PointJets<T>) -> Mat<Jet<T>, 4> {
    let gi = inv_sym(&j.gt, j.det_gt);
    let hi = inv_sym(&j.h, j.det_h);
    let z = j.h[0].zero_like();
    let mut g = [[z; 4]; 4];
    for i in 0..2 {
        for jj in 0..2 {
            g[i][jj] = sym(&gi, i, jj);
        }
        for k in 0..2 {
            let v = -(sym(&gi, i, 0) * j.fk(0, k) + sym(&gi, i, 1) * j.fk(1, k));
            g[i][2 + k] = v;
            g[2 + k][i] = v;
        }
    }
    for k in 0..2 {
        for l in 0..2 {
            let mut acc = sym(&hi, k, l);
            for a in 0..2 {
                for b in 0..2 {
                    acc = acc + j.fk(a, k) * j.fk(b, l) * sym(&gi, a, b);
                }
            }
            g[2 + k][2 + l] = acc;
        }
    }
    g
}

/// `(g̃, g̃⁻¹)` as full 2×2 matrices.
pub fn orbit_metric<T: Scalar>(j: &PointJets<T>) -> (Mat<Jet<T>, 2>, Mat<Jet<T>, 2>) {
    let gi = inv_sym(&j.gt, det_sym(&j.gt));
    let full = |a: &[Jet<T>; 3]| [[a[0], a[1]], [a[1], a[2]]];
    (full(&j.gt), full(&gi))
}

fn dg<T: Scalar, const N: usize>(g: &Mat<Jet<T>, N>, d: usize, b: usize, c: usize) -> T {
    if d < 2 {
        g[b][c].d(d)
    } else {
        g[b][c].value().zero_like()
    }
}

/// `Γ^a_{bc}`, indexed `[a][b][c]`.
pub fn christoffel<T: Scalar, const N: usize>(g: &Mat<Jet<T>, N>, ginv: &Mat<Jet<T>, N>) -> Gamma<T, N> {
    let z = g[0][0].value().zero_like();
    let mut low = [[[z; N]; N]; N];
    for (d, ld) in low.iter_mut().enumerate() {
        for (b, ldb) in ld.iter_mut().enumerate() {
            for (c, v) in ldb.iter_mut().enumerate() {
                *v = (dg(g, b, d, c) + dg(g, c, d, b) - dg(g, d, b, c)) * 0.5;
            }
        }
    }
    let mut out = [[[z; N]; N]; N];
    for (a, oa) in out.iter_mut().enumerate() {
        for b in 0..N {
            for c in b..N {
                let mut acc = z;
                for (d, ld) in low.iter().enumerate() {
                    acc = acc + ginv[a][d].value() * ld[b][c];
                }
                oa[b][c] = acc;
                oa[c][b] = acc;
            }
        }
    }
    out
}

fn nest_mat<T: Scalar, const N: usize>(m: &Mat<Jet<T>, N>) -> Mat<Jet<Jet<T>>, N> {
    m.map(|row| row.map(|x| x.nest()))
}

/// `R^a_{bcd} = ∂_cΓ^a_{db} − ∂_dΓ^a_{cb} + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb}`,
/// indexed `[a][b][c][d]`, together with the Christoffel symbols.
pub fn riemann<T: Scalar, const N: usize>(g: &Mat<Jet<T>, N>, ginv: &Mat<Jet<T>, N>) -> (Riemann<T, N>, Gamma<T, N>) {
    let gj = christoffel(&nest_mat(g), &nest_mat(ginv));
    let z = g[0][0].value().zero_like();
    let gam = gj.map(|a| a.map(|b| b.map(|c| c.value())));
    let dgam = |c: usize, a: usize, b: usize, d: usize| -> T {
        if c < 2 {
            gj[a][b][d].d(c)
        } else {
            z
        }
    };
    let mut r = [[[[z; N]; N]; N]; N];
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                for d in 0..N {
                    let mut acc = dgam(c, a, d, b) - dgam(d, a, c, b);
                    for e in 0..N {
                        acc = acc + gam[a][c][e] * gam[e][d][b] - gam[a][d][e] * gam[e][c][b];
                    }
                    r[a][b][c][d] = acc;
                }
            }
        }
    }
    (r, gam)
}

pub fn ricci_from<T: Scalar, const N: usize>(r: &Riemann<T, N>) -> Mat<T, N> {
    let z = r[0][0][0][0].zero_like();
    let mut out = [[z; N]; N];
    for b in 0..N {
        for d in 0..N {
            let mut acc = z;
            for (a, ra) in r.iter().enumerate() {
                acc = acc + ra[b][a][d];
            }
            out[b][d] = acc;
        }
    }
    out
}

/// Fully covariant `R_{abcd} = g_{ae} R^e_{bcd}`.
pub fn lower<T: Scalar, const N: usize>(r: &Riemann<T, N>, g: &Mat<Jet<T>, N>) -> Riemann<T, N> {
    let z = r[0][0][0][0].zero_like();
    let mut out = [[[[z; N]; N]; N]; N];
    for a in 0..N {
        for b in 0..N {
            for c in 0..N {
                for d in 0..N {
                    let mut acc = z;
                    for (e, re) in r.iter().enumerate() {
                        acc = acc + g[a][e].value() * re[b][c][d];
                    }
                    out[a][b][c][d] = acc;
                }
            }
        }
    }
    out
}

/// Sectional curvature `g(R(U,V)V, U) / (g(U,U)g(V,V) − g(U,V)²)`.
pub fn sectional(rm: &Riemann<f64, 4>, g: &Mat<f64, 4>, u: &[f64; 4], v: &[f64; 4]) -> f64 {
    let mut num = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    num += rm[a][b][c][d] * u[a] * v[b] * u[c] * v[d];
                }
            }
        }
    }
    let ip = |x: &[f64; 4], y: &[f64; 4]| {
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                s += g[a][b] * x[a] * y[b];
            }
        }
        s
    };
    num / (ip(u, u) * ip(v, v) - ip(u, v).powi(2))
}

pub fn values<T: Scalar, const N: usize>(m: &Mat<Jet<T>, N>) -> Mat<T, N> {
    m.map(|row| row.map(|x| x.value()))
}

//! O'Neill tensors of the submersion onto the orbit space, in the frame
//! `{H, H⊥, C, C⊥}`.

use nalgebra::Matrix4;

use crate::curvature::{christoffel, four_inverse, four_metric, values, Gamma, Mat};
use crate::error::{Error, Result};
use crate::invariants::{frame, FrameData};
use crate::metric::PointJets;

#[derive(Clone, Debug)]
pub struct OneillData {
    /// `T^{(a)}_{(b)(c)}` indexed `[a][b][c]` from 0.
    pub t: [[[f64; 4]; 4]; 4],
    /// `A^{(a)}_{(b)(c)}` indexed `[a][b][c]` from 0.
    pub a: [[[f64; 4]; 4]; 4],
    /// `𝒯 = T(C, H⊥)` and `𝒯⊥ = T(C⊥, H⊥)` as 4-vectors.
    pub tvec: [f64; 4],
    pub tperp: [f64; 4],
    pub ell_t: f64,
    pub ell_tperp: f64,
    pub theta_c: f64,
    pub theta_cperp: f64,
    pub t331: f64,
    pub t441: f64,
    pub t332: f64,
    pub t342: f64,
    pub t341: f64,
    pub a123: f64,
    pub a213: f64,
    pub a312: f64,
    pub a321: f64,
    pub frame: FrameData,
}

/// Covariant derivatives along the adapted frame at one point.
pub struct Connection {
    g: Mat<f64, 4>,
    gamma: Gamma<f64, 4>,
    /// `f_i^k`
    f: [[f64; 2]; 2],
    /// `∂_c f_i^k`, indexed `[c][i][k]`
    df: [[[f64; 2]; 2]; 2],
}

impl Connection {
    pub fn new(j: &PointJets) -> Connection {
        let g4 = four_metric(j);
        let gi = four_inverse(j);
        let gamma = christoffel(&g4, &gi);
        let f = [[j.fk(0, 0).value(), j.fk(0, 1).value()], [j.fk(1, 0).value(), j.fk(1, 1).value()]];
        let mut df = [[[0.0; 2]; 2]; 2];
        for (c, dc) in df.iter_mut().enumerate() {
            for (i, di) in dc.iter_mut().enumerate() {
                for (k, v) in di.iter_mut().enumerate() {
                    *v = j.fk(i, k).d(c);
                }
            }
        }
        Connection { g: values(&g4), gamma, f, df }
    }

    pub fn metric(&self) -> &Mat<f64, 4> {
        &self.g
    }

    pub fn christoffels(&self) -> &Gamma<f64, 4> {
        &self.gamma
    }

    pub fn dot(&self, u: &[f64; 4], v: &[f64; 4]) -> f64 {
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                s += self.g[a][b] * u[a] * v[b];
            }
        }
        s
    }

    /// Horizontal coefficients `a^i` and vertical coefficients `b^k`.
    fn split(&self, v: &[f64; 4]) -> ([f64; 2], [f64; 2]) {
        let a = [v[0], v[1]];
        let b = [v[2] + self.f[0][0] * a[0] + self.f[1][0] * a[1], v[3] + self.f[0][1] * a[0] + self.f[1][1] * a[1]];
        (a, b)
    }

    fn join_split(&self, a: [f64; 2], b: [f64; 2]) -> [f64; 4] {
        [a[0], a[1], b[0] - a[0] * self.f[0][0] - a[1] * self.f[1][0], b[1] - a[0] * self.f[0][1] - a[1] * self.f[1][1]]
    }

    pub fn hor(&self, v: &[f64; 4]) -> [f64; 4] {
        let (a, _) = self.split(v);
        self.join_split(a, [0.0, 0.0])
    }

    pub fn ver(&self, v: &[f64; 4]) -> [f64; 4] {
        let (_, b) = self.split(v);
        [0.0, 0.0, b[0], b[1]]
    }

    /// `∇_U` of the horizontal field with constant frame coefficients `a`.
    fn nabla_hor(&self, u: &[f64; 4], a: [f64; 2]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (c, uc) in u.iter().enumerate() {
            for (i, ai) in a.iter().enumerate() {
                let w = uc * ai;
                if w == 0.0 {
                    continue;
                }
                for (o, oa) in out.iter_mut().enumerate() {
                    let mut v = self.gamma[o][c][i];
                    for m in 0..2 {
                        v -= self.f[i][m] * self.gamma[o][c][2 + m];
                    }
                    *oa += w * v;
                }
                if c < 2 {
                    for m in 0..2 {
                        out[2 + m] -= w * self.df[c][i][m];
                    }
                }
            }
        }
        out
    }

    /// `∇_U` of the vertical field with constant coefficients `b`.
    fn nabla_ver(&self, u: &[f64; 4], b: [f64; 2]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (o, oa) in out.iter_mut().enumerate() {
            for (c, uc) in u.iter().enumerate() {
                for (k, bk) in b.iter().enumerate() {
                    *oa += uc * bk * self.gamma[o][c][2 + k];
                }
            }
        }
        out
    }

    pub fn tensor_t(&self, w1: &[f64; 4], w2: &[f64; 4]) -> [f64; 4] {
        let v1 = self.ver(w1);
        let (a2, b2) = self.split(w2);
        let p = self.hor(&self.nabla_ver(&v1, b2));
        let q = self.ver(&self.nabla_hor(&v1, a2));
        add(&p, &q)
    }

    pub fn tensor_a(&self, w1: &[f64; 4], w2: &[f64; 4]) -> [f64; 4] {
        let h1 = self.hor(w1);
        let (a2, b2) = self.split(w2);
        let p = self.ver(&self.nabla_hor(&h1, a2));
        let q = self.hor(&self.nabla_ver(&h1, b2));
        add(&p, &q)
    }
}

fn add(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

fn det_of_map(con: &Connection, w: &[f64; 4]) -> f64 {
    let mut m = Matrix4::zeros();
    for b in 0..4 {
        let mut e = [0.0; 4];
        e[b] = 1.0;
        let col = con.tensor_t(w, &e);
        for a in 0..4 {
            m[(a, b)] = col[a];
        }
    }
    m.determinant()
}

pub fn oneill(j: &PointJets, tol: f64) -> Result<OneillData> {
    let fr = frame(j, tol);
    if !fr.valid() {
        return Err(Error::FrameRequired(fr.notice().unwrap_or_default()));
    }
    let con = Connection::new(j);
    let y = fr.vectors;
    let lens = [fr.ell_h, fr.ell_hperp, fr.ell_c, fr.ell_cperp];
    let mut t = [[[0.0; 4]; 4]; 4];
    let mut a = [[[0.0; 4]; 4]; 4];
    for b in 0..4 {
        for c in 0..4 {
            let tv = con.tensor_t(&y[b], &y[c]);
            let av = con.tensor_a(&y[b], &y[c]);
            for k in 0..4 {
                t[k][b][c] = con.dot(&tv, &y[k]) / lens[k];
                a[k][b][c] = con.dot(&av, &y[k]) / lens[k];
            }
        }
    }
    let tvec = con.tensor_t(&y[2], &y[1]);
    let tperp = con.tensor_t(&y[3], &y[1]);
    Ok(OneillData {
        t,
        a,
        tvec,
        tperp,
        ell_t: con.dot(&tvec, &tvec),
        ell_tperp: con.dot(&tperp, &tperp),
        theta_c: det_of_map(&con, &y[2]),
        theta_cperp: det_of_map(&con, &y[3]),
        t331: t[2][2][0],
        t441: t[3][3][0],
        t332: t[2][2][1],
        t342: t[2][3][1],
        t341: t[2][3][0],
        a123: a[0][1][2],
        a213: a[1][0][2],
        a312: a[2][0][1],
        a321: a[2][1][0],
        frame: fr,
    })
}

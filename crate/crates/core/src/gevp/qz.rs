//! Complex single-shift QZ on a Hessenberg-triangular pair.

use crate::numkit::{fro, tri_hess_reduce, CMat, Givens, C64, EPS, ZERO};
use crate::{Error, Result};

/// Generalized Schur form `A = Q·S·Zᴴ`, `B = Q·T·Zᴴ`; `T` has a real
/// non-negative diagonal.
#[derive(Debug, Clone)]
pub struct GeneralizedSchur {
    pub s: CMat,
    pub t: CMat,
    pub q: CMat,
    pub z: CMat,
}

impl GeneralizedSchur {
    /// `(S_jj, T_jj)` for every `j`.
    pub fn pairs(&self) -> Vec<(C64, C64)> {
        (0..self.s.nrows())
            .map(|j| (self.s[(j, j)], self.t[(j, j)]))
            .collect()
    }
}

#[inline]
fn abs1(z: C64) -> f64 {
    z.re.abs() + z.im.abs()
}

const SAFMIN: f64 = f64::MIN_POSITIVE;

pub fn qz(a: &CMat, b: &CMat) -> Result<GeneralizedSchur> {
    let n = a.nrows();
    // B → triangular, A → Hessenberg
    let red = tri_hess_reduce(b, a)?;
    let (mut h, mut t, mut q, mut z) = (red.h, red.t, red.q, red.z);
    if n == 0 {
        return Ok(GeneralizedSchur { s: h, t, q, z });
    }

    let ulp = EPS;
    let anorm = fro(&h);
    let bnorm = fro(&t);
    let atol = SAFMIN.max(ulp * anorm);
    let btol = SAFMIN.max(ulp * bnorm);
    let ascale = 1.0 / SAFMIN.max(anorm);
    let bscale = 1.0 / SAFMIN.max(bnorm);

    let ilo = 0usize;
    let mut ilast = n - 1;
    let mut ifirst;
    let mut iiter = 0usize;
    let mut eshift = ZERO;
    let maxit = 30 * n;
    let mut done = vec![false; n];

    // control flow labels of the reference algorithm
    enum Next {
        Split,      // H(ilast, ilast-1) = 0
        ZeroTLast,  // T(ilast, ilast) = 0
        Sweep,      // QZ step on ifirst..=ilast
    }

    let mut jiter = 0usize;
    loop {
        if jiter >= maxit {
            let partial = (0..n)
                .map(|j| done[j].then(|| (h[(j, j)], t[(j, j)])))
                .collect();
            return Err(Error::QzNoConvergence {
                failed_at: ilast,
                partial,
            });
        }
        jiter += 1;

        ifirst = ilo;
        let next = 'decide: {
            if ilast == ilo {
                break 'decide Next::Split;
            }
            if abs1(h[(ilast, ilast - 1)])
                <= SAFMIN.max(ulp * (abs1(h[(ilast, ilast)]) + abs1(h[(ilast - 1, ilast - 1)])))
            {
                h[(ilast, ilast - 1)] = ZERO;
                break 'decide Next::Split;
            }
            if t[(ilast, ilast)].norm() <= btol {
                t[(ilast, ilast)] = ZERO;
                break 'decide Next::ZeroTLast;
            }
            for j in (ilo..ilast).rev() {
                let ilazro = if j == ilo {
                    true
                } else if abs1(h[(j, j - 1)])
                    <= SAFMIN.max(ulp * (abs1(h[(j, j)]) + abs1(h[(j - 1, j - 1)])))
                {
                    h[(j, j - 1)] = ZERO;
                    true
                } else {
                    false
                };
                if t[(j, j)].norm() < btol {
                    t[(j, j)] = ZERO;
                    let mut ilazr2 = !ilazro
                        && abs1(h[(j, j - 1)]) * (ascale * abs1(h[(j + 1, j)]))
                            <= abs1(h[(j, j)]) * (ascale * atol);
                    if ilazro || ilazr2 {
                        for jch in j..ilast {
                            let (g, r) = Givens::new(h[(jch, jch)], h[(jch + 1, jch)]);
                            h[(jch, jch)] = r;
                            h[(jch + 1, jch)] = ZERO;
                            g.rows(&mut h, jch, jch + 1, jch + 1..n);
                            g.rows(&mut t, jch, jch + 1, jch + 1..n);
                            g.accumulate_adjoint(&mut q, jch, jch + 1);
                            if ilazr2 {
                                h[(jch, jch - 1)] *= g.c;
                            }
                            ilazr2 = false;
                            if abs1(t[(jch + 1, jch + 1)]) >= btol {
                                if jch + 1 >= ilast {
                                    break 'decide Next::Split;
                                }
                                ifirst = jch + 1;
                                break 'decide Next::Sweep;
                            }
                            t[(jch + 1, jch + 1)] = ZERO;
                        }
                        break 'decide Next::ZeroTLast;
                    } else {
                        // chase the zero down to T(ilast, ilast)
                        for jch in j..ilast {
                            let (g, r) = Givens::new(t[(jch, jch + 1)], t[(jch + 1, jch + 1)]);
                            t[(jch, jch + 1)] = r;
                            t[(jch + 1, jch + 1)] = ZERO;
                            if jch + 2 < n {
                                g.rows(&mut t, jch, jch + 1, jch + 2..n);
                            }
                            g.rows(&mut h, jch, jch + 1, jch - 1..n);
                            g.accumulate_adjoint(&mut q, jch, jch + 1);

                            let (g, r) = Givens::new(h[(jch + 1, jch)], h[(jch + 1, jch - 1)]);
                            h[(jch + 1, jch)] = r;
                            h[(jch + 1, jch - 1)] = ZERO;
                            g.cols(&mut h, jch, jch - 1, 0..jch + 1);
                            g.cols(&mut t, jch, jch - 1, 0..jch);
                            g.cols(&mut z, jch, jch - 1, 0..n);
                        }
                        break 'decide Next::ZeroTLast;
                    }
                } else if ilazro {
                    ifirst = j;
                    break 'decide Next::Sweep;
                }
            }
            return Err(Error::QzNoConvergence {
                failed_at: ilast,
                partial: vec![None; n],
            });
        };

        match next {
            Next::ZeroTLast | Next::Split => {
                if let Next::ZeroTLast = next {
                    let (g, r) = Givens::new(h[(ilast, ilast)], h[(ilast, ilast - 1)]);
                    h[(ilast, ilast)] = r;
                    h[(ilast, ilast - 1)] = ZERO;
                    g.cols(&mut h, ilast, ilast - 1, 0..ilast);
                    g.cols(&mut t, ilast, ilast - 1, 0..ilast);
                    g.cols(&mut z, ilast, ilast - 1, 0..n);
                }
                let absb = t[(ilast, ilast)].norm();
                if absb > SAFMIN {
                    let sign = (t[(ilast, ilast)] / absb).conj();
                    t[(ilast, ilast)] = C64::new(absb, 0.0);
                    for r in 0..ilast {
                        t[(r, ilast)] *= sign;
                    }
                    for r in 0..=ilast {
                        h[(r, ilast)] *= sign;
                    }
                    for r in 0..n {
                        z[(r, ilast)] *= sign;
                    }
                } else {
                    t[(ilast, ilast)] = ZERO;
                }
                done[ilast] = true;
                if ilast == ilo {
                    break;
                }
                ilast -= 1;
                iiter = 0;
                eshift = ZERO;
            }
            Next::Sweep => {
                iiter += 1;
                let shift = if iiter % 10 != 0 {
                    let u12 = (bscale * t[(ilast - 1, ilast)]) / (bscale * t[(ilast, ilast)]);
                    let ad11 = (ascale * h[(ilast - 1, ilast - 1)]) / (bscale * t[(ilast - 1, ilast - 1)]);
                    let ad21 = (ascale * h[(ilast, ilast - 1)]) / (bscale * t[(ilast - 1, ilast - 1)]);
                    let ad12 = (ascale * h[(ilast - 1, ilast)]) / (bscale * t[(ilast, ilast)]);
                    let ad22 = (ascale * h[(ilast, ilast)]) / (bscale * t[(ilast, ilast)]);
                    let abi22 = ad22 - u12 * ad21;
                    let abi12 = ad12 - u12 * ad11;
                    let mut shift = abi22;
                    let ctemp = abi12.sqrt() * ad21.sqrt();
                    if ctemp != ZERO {
                        let x = (ad11 - shift) * 0.5;
                        let temp2 = abs1(x);
                        let temp = abs1(ctemp).max(temp2);
                        let mut y = ((x / temp).powi(2) + (ctemp / temp).powi(2)).sqrt() * temp;
                        if temp2 > 0.0 {
                            let xs = x / temp2;
                            if xs.re * y.re + xs.im * y.im < 0.0 {
                                y = -y;
                            }
                        }
                        shift -= ctemp * (ctemp / (x + y));
                    }
                    shift
                } else {
                    if iiter % 20 == 0 && bscale * abs1(t[(ilast, ilast)]) > SAFMIN {
                        eshift += (ascale * h[(ilast, ilast)]) / (bscale * t[(ilast, ilast)]);
                    } else {
                        eshift += (ascale * h[(ilast, ilast - 1)]) / (bscale * t[(ilast - 1, ilast - 1)]);
                    }
                    eshift
                };

                let mut istart = ifirst;
                let mut ctemp = h[(ifirst, ifirst)] * ascale - shift * (t[(ifirst, ifirst)] * bscale);
                for j in (ifirst + 1..ilast).rev() {
                    let c = h[(j, j)] * ascale - shift * (t[(j, j)] * bscale);
                    let mut temp = abs1(c);
                    let mut temp2 = ascale * abs1(h[(j + 1, j)]);
                    let tempr = temp.max(temp2);
                    if tempr < 1.0 && tempr != 0.0 {
                        temp /= tempr;
                        temp2 /= tempr;
                    }
                    if abs1(h[(j, j - 1)]) * temp2 <= temp * atol {
                        istart = j;
                        ctemp = c;
                        break;
                    }
                }

                let (mut g, _) = Givens::new(ctemp, h[(istart + 1, istart)] * ascale);
                for j in istart..ilast {
                    if j > istart {
                        let (g2, r) = Givens::new(h[(j, j - 1)], h[(j + 1, j - 1)]);
                        g = g2;
                        h[(j, j - 1)] = r;
                        h[(j + 1, j - 1)] = ZERO;
                    }
                    g.rows(&mut h, j, j + 1, j..n);
                    g.rows(&mut t, j, j + 1, j..n);
                    g.accumulate_adjoint(&mut q, j, j + 1);

                    let (gc, r) = Givens::new(t[(j + 1, j + 1)], t[(j + 1, j)]);
                    t[(j + 1, j + 1)] = r;
                    t[(j + 1, j)] = ZERO;
                    gc.cols(&mut h, j + 1, j, 0..(j + 3).min(ilast + 1));
                    gc.cols(&mut t, j + 1, j, 0..j + 1);
                    gc.cols(&mut z, j + 1, j, 0..n);
                }
            }
        }
    }
    Ok(GeneralizedSchur { s: h, t, q, z })
}

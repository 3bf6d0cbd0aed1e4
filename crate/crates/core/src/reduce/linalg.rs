//! Dense decompositions used by the reducers.

#![allow(clippy::needless_range_loop)]

use ndarray::{Array1, Array2};

use crate::scalar::Scalar;

/// Thin singular value decomposition `A = U diag(s) V^T`, with the singular
/// values in non-increasing order.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    /// `n x p`; columns for zero singular values are zero.
    pub u: Array2<T>,
    pub s: Array1<T>,
    /// `p x p`, orthogonal.
    pub v: Array2<T>,
}

const MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD. Columns are rotated pairwise until all
/// pairs are orthogonal to working precision; `V` accumulates the rotations.
pub fn jacobi_svd<T: Scalar>(a: &Array2<T>) -> Svd<T> {
    let (n, p) = a.dim();
    // column-major working copy
    let mut cols: Vec<Vec<T>> = (0..p).map(|j| a.column(j).to_vec()).collect();
    let mut v: Vec<Vec<T>> = (0..p)
        .map(|j| (0..p).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..p {
            for j in i + 1..p {
                let (ci, cj) = (&cols[i], &cols[j]);
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = T::zero();
                for k in 0..n {
                    alpha += ci[k] * ci[k];
                    beta += cj[k] * cj[k];
                    gamma += ci[k] * cj[k];
                }
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma + gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, i, j, c, s);
                rotate(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<T> = cols.iter().map(|c| c.iter().map(|&x| x * x).sum::<T>().sqrt()).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap().then(x.cmp(&y)));
    let mut u = Array2::zeros((n, p));
    let mut vm = Array2::zeros((p, p));
    let mut s = Array1::zeros(p);
    let tiny = norms.iter().fold(T::zero(), |m, &x| m.max(x)) * eps * T::count(n.max(p));
    for (dst, &src) in order.iter().enumerate() {
        s[dst] = norms[src];
        if norms[src] > tiny {
            for k in 0..n {
                u[[k, dst]] = cols[src][k] / norms[src];
            }
        }
        for k in 0..p {
            vm[[k, dst]] = v[src][k];
        }
    }
    Svd { u, s, v: vm }
}

fn rotate<T: Scalar>(cols: &mut [Vec<T>], i: usize, j: usize, c: T, s: T) {
    let (lo, hi) = cols.split_at_mut(j);
    let (a, b) = (&mut lo[i], &mut hi[0]);
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}

/// Eigen-decomposition of a symmetric matrix by Householder reduction to
/// tridiagonal form followed by the implicit QL algorithm. Eigenvalues are
/// returned in non-increasing order; eigenvectors are the matching columns.
pub fn symmetric_eigen<T: Scalar>(a: &Array2<T>) -> (Array1<T>, Array2<T>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "symmetric_eigen needs a square matrix");
    if n == 0 {
        return (Array1::zeros(0), Array2::zeros((0, 0)));
    }
    let mut v: Vec<Vec<T>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[y].partial_cmp(&d[x]).unwrap().then(x.cmp(&y)));
    let vals = Array1::from_iter(order.iter().map(|&i| d[i]));
    let vecs = Array2::from_shape_fn((n, n), |(r, c)| v[r][order[c]]);
    (vals, vecs)
}

fn tred2<T: Scalar>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) {
    let n = d.len();
    let zero = T::zero();
    d.copy_from_slice(&v[n - 1][..n]);
    for i in (1..n).rev() {
        let mut scale = zero;
        let mut h = zero;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == zero {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = zero;
                v[j][i] = zero;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > zero {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = zero;
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = zero;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let upd = f * e[k] + g * d[k];
                    v[k][j] -= upd;
                }
                d[j] = v[i - 1][j];
                v[i][j] = zero;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = T::one();
        let h = d[i + 1];
        if h != zero {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = zero;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    let upd = g * d[k];
                    v[k][j] -= upd;
                }
            }
        }
        for k in 0..=i {
            v[k][i + 1] = zero;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = zero;
    }
    v[n - 1][n - 1] = T::one();
    e[0] = zero;
}

fn tql2<T: Scalar>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) {
    let n = d.len();
    let zero = T::zero();
    let one = T::one();
    let two = one + one;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = zero;
    let mut f = zero;
    let mut tst1 = zero;
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            for _ in 0..64 {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(one);
                if p < zero {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = one;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = zero;
                let mut s2 = zero;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        let hk = row[i + 1];
                        row[i + 1] = s * row[i] + c * hk;
                        row[i] = c * row[i] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = zero;
    }
}

/// Flips each column so its largest-magnitude entry is positive (first such
/// entry on ties). Returns the applied signs.
pub fn fix_column_signs<T: Scalar>(m: &mut Array2<T>) -> Vec<T> {
    let mut signs = Vec::with_capacity(m.ncols());
    for mut col in m.columns_mut() {
        let mut best = T::zero();
        for &x in col.iter() {
            if x.abs() > best.abs() {
                best = x;
            }
        }
        let s = if best < T::zero() { -T::one() } else { T::one() };
        if s < T::zero() {
            col.mapv_inplace(|x| -x);
        }
        signs.push(s);
    }
    signs
}

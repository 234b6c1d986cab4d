//! Interpolation on `Grid2` (tensor cubic Lagrange) and `Grid3` (trilinear or
//! tricubic).

use crate::grid::{Grid2, VectorField3};

/// Reflection rule for r < 0 across the axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[inline]
pub fn cubic_weights(t: f64) -> [f64; 4] {
    // Nodes at -1, 0, 1, 2.
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Evaluates the grid function `values` at (r, z) with 4x4 Lagrange stencils.
///
/// Indices below 0 in r reflect to `-1-i` with the given parity; indices past
/// the last r cell or outside the z range contribute 0.
pub fn cubic2(grid: &Grid2, values: &[f64], r: f64, z: f64, parity: Parity) -> f64 {
    let tr = r.abs() / grid.dr - 0.5;
    let tz = (z + grid.z_max) / grid.dz;
    if tr > grid.nr as f64 || tz < -1.0 || tz > grid.nz as f64 {
        return 0.0;
    }
    let ir = tr.floor();
    let iz = tz.floor();
    let wr = cubic_weights(tr - ir);
    let wz = cubic_weights(tz - iz);
    let ir = ir as i64;
    let iz = iz as i64;
    let mut acc = 0.0;
    for (a, wa) in wr.iter().enumerate() {
        let mut i = ir - 1 + a as i64;
        let mut sign = 1.0;
        if i < 0 {
            i = -1 - i;
            if parity == Parity::Odd {
                sign = -1.0;
            }
        }
        if i >= grid.nr as i64 {
            continue;
        }
        let mut row = 0.0;
        for (b, wb) in wz.iter().enumerate() {
            let j = iz - 1 + b as i64;
            if j < 0 || j >= grid.nz as i64 {
                continue;
            }
            row += wb * values[grid.idx(i as usize, j as usize)];
        }
        acc += sign * wa * row;
    }
    let s = if r < 0.0 && parity == Parity::Odd { -1.0 } else { 1.0 };
    s * acc
}

/// Trilinear interpolation; points outside the box give 0.
pub fn trilinear(field: &VectorField3, p: [f64; 3]) -> [f64; 3] {
    let g = &field.grid;
    let mut base = [0usize; 3];
    let mut frac = [0.0f64; 3];
    for d in 0..3 {
        let t = (p[d] + g.half_width) / g.h;
        if !(0.0..=(g.n - 1) as f64).contains(&t) {
            return [0.0; 3];
        }
        let mut b = t.floor() as usize;
        if b >= g.n - 1 {
            b = g.n - 2;
        }
        base[d] = b;
        frac[d] = t - b as f64;
    }
    let mut out = [0.0; 3];
    for di in 0..2 {
        let wx = if di == 0 { 1.0 - frac[0] } else { frac[0] };
        for dj in 0..2 {
            let wy = if dj == 0 { 1.0 - frac[1] } else { frac[1] };
            for dk in 0..2 {
                let wk = if dk == 0 { 1.0 - frac[2] } else { frac[2] };
                let w = wx * wy * wk;
                if w == 0.0 {
                    continue;
                }
                let v = field.at(base[0] + di, base[1] + dj, base[2] + dk);
                out[0] += w * v[0];
                out[1] += w * v[1];
                out[2] += w * v[2];
            }
        }
    }
    out
}

/// Tensor cubic Lagrange interpolation; points outside the box give 0 and
/// stencil nodes past the edge contribute 0.
pub fn tricubic(field: &VectorField3, p: [f64; 3]) -> [f64; 3] {
    let g = &field.grid;
    let mut base = [0i64; 3];
    let mut w = [[0.0f64; 4]; 3];
    for d in 0..3 {
        let t = (p[d] + g.half_width) / g.h;
        if !(0.0..=(g.n - 1) as f64).contains(&t) {
            return [0.0; 3];
        }
        let b = t.floor().min((g.n - 2) as f64);
        base[d] = b as i64;
        w[d] = cubic_weights(t - b);
    }
    let n = g.n as i64;
    let mut out = [0.0; 3];
    for (a, wa) in w[0].iter().enumerate() {
        let i = base[0] - 1 + a as i64;
        if i < 0 || i >= n {
            continue;
        }
        for (b, wb) in w[1].iter().enumerate() {
            let j = base[1] - 1 + b as i64;
            if j < 0 || j >= n {
                continue;
            }
            for (c, wc) in w[2].iter().enumerate() {
                let k = base[2] - 1 + c as i64;
                if k < 0 || k >= n {
                    continue;
                }
                let wt = wa * wb * wc;
                let v = field.at(i as usize, j as usize, k as usize);
                out[0] += wt * v[0];
                out[1] += wt * v[1];
                out[2] += wt * v[2];
            }
        }
    }
    out
}

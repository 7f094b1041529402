//! Two-piece cubic least-squares spline used to detrend before the
//! periodicity search. A literal transcription of the reference routine,
//! including its index bookkeeping, so results agree to rounding.

const N_SPLINE: usize = 4;
const DEG: usize = 3;
const PIECES: usize = 2;
const PIECES_EXT: usize = 8;
const N_BREAKS: usize = 3;

fn matrix_multiply(a1: usize, a2: usize, a: &[f64], b2: usize, b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; a1 * b2];
    for i in 0..a1 {
        for j in 0..b2 {
            let mut acc = 0.0;
            for k in 0..a2 {
                acc += a[i * a2 + k] * b[k * b2 + j];
            }
            c[i * b2 + j] = acc;
        }
    }
    c
}

fn matrix_times_vector(a1: usize, a2: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a1)
        .map(|i| {
            let mut acc = 0.0;
            for k in 0..a2 {
                acc += a[i * a2 + k] * b[k];
            }
            acc
        })
        .collect()
}

/// Gaussian elimination without pivoting.
fn gauss_elimination(size: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut m: Vec<Vec<f64>> = (0..size).map(|i| a[i * size..(i + 1) * size].to_vec()).collect();
    let mut be = b.to_vec();
    for i in 0..size {
        for j in i + 1..size {
            let factor = m[j][i] / m[i][i];
            be[j] -= factor * be[i];
            for k in i..size {
                m[j][k] -= factor * m[i][k];
            }
        }
    }
    let mut x = vec![0.0; size];
    for i in (0..size).rev() {
        let mut acc = be[i];
        for j in i + 1..size {
            acc -= x[j] * m[i][j];
        }
        x[i] = acc / m[i][i];
    }
    x
}

fn lsqsolve(rows: usize, cols: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut at = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            at[j * rows + i] = a[i * cols + j];
        }
    }
    let ata = matrix_multiply(cols, rows, &at, cols, a);
    let atb = matrix_times_vector(cols, rows, &at, b);
    gauss_elimination(cols, &ata, &atb)
}

fn icumsum(a: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(a.len());
    let mut s = 0;
    for &v in a {
        s += v;
        out.push(s);
    }
    out
}

pub(super) fn splinefit(y: &[f64]) -> Vec<f64> {
    let size = y.len() as i64;
    let breaks: [i64; N_BREAKS] = [0, (size as f64 / 2.0).floor() as i64 - 1, size - 1];
    let h0 = [breaks[1] - breaks[0], breaks[2] - breaks[1]];
    let h_copy = [h0[0], h0[1], h0[0], h0[1]];
    let hl = [h_copy[DEG], h_copy[DEG - 1], h_copy[DEG - 2]];
    let hl_cs = icumsum(&hl);
    let bl: Vec<i64> = (0..DEG).map(|i| breaks[0] - hl_cs[i]).collect();
    let hr = [h_copy[0], h_copy[1], h_copy[2]];
    let hr_cs = icumsum(&hr);
    let br: Vec<i64> = (0..DEG).map(|i| breaks[2] + hr_cs[i]).collect();
    let mut breaks_ext = [0i64; 3 * DEG];
    for i in 0..DEG {
        breaks_ext[i] = bl[DEG - 1 - i];
        breaks_ext[i + 3] = breaks[i];
        breaks_ext[i + 6] = br[i];
    }
    let mut h_ext = [0i64; 3 * DEG - 1];
    for i in 0..3 * DEG - 1 {
        h_ext[i] = breaks_ext[i + 1] - breaks_ext[i];
    }

    const NC: usize = N_SPLINE * PIECES_EXT;
    let mut coefs = [[0.0f64; N_SPLINE + 1]; NC];
    for i in (0..NC).step_by(N_SPLINE) {
        coefs[i][0] = 1.0;
    }
    let mut ii = [[0usize; PIECES_EXT]; DEG + 1];
    for i in 0..PIECES_EXT {
        for (r, row) in ii.iter_mut().enumerate() {
            row[i] = (r + i).min(PIECES_EXT - 1);
        }
    }
    let mut h = [0.0f64; NC];
    for (i, hv) in h.iter_mut().enumerate() {
        *hv = h_ext[ii[i % N_SPLINE][i / N_SPLINE]] as f64;
    }

    let mut q = [[0.0f64; PIECES_EXT]; N_SPLINE];
    for k in 1..N_SPLINE {
        for j in 0..k {
            for l in 0..NC {
                coefs[l][j] *= h[l] / (k - j) as f64;
            }
        }
        for l in 0..NC {
            let mut acc = 0.0;
            for m in 0..N_SPLINE {
                acc += coefs[l][m];
            }
            q[l % N_SPLINE][l / N_SPLINE] = acc;
        }
        for l in 0..PIECES_EXT {
            for m in 1..N_SPLINE {
                q[m][l] += q[m - 1][l];
            }
        }
        for l in 0..NC {
            coefs[l][k] = if l % N_SPLINE == 0 { 0.0 } else { q[l % N_SPLINE - 1][l / N_SPLINE] };
        }
        let mut fmax = [0.0f64; NC];
        for i in 0..PIECES_EXT {
            for j in 0..N_SPLINE {
                fmax[i * N_SPLINE + j] = q[N_SPLINE - 1][i];
            }
        }
        for j in 0..k + 1 {
            for l in 0..NC {
                coefs[l][j] /= fmax[l];
            }
        }
        for i in 0..NC - DEG {
            for j in 0..k + 1 {
                coefs[i][j] -= coefs[DEG + i][j];
            }
        }
        for i in (0..NC).step_by(N_SPLINE) {
            coefs[i][k] = 0.0;
        }
    }

    let mut scale = [1.0f64; NC];
    for k in 0..N_SPLINE - 1 {
        for i in 0..NC {
            scale[i] /= h[i];
        }
        for i in 0..NC {
            coefs[i][(N_SPLINE - 1) - (k + 1)] *= scale[i];
        }
    }

    let mut jj = [[0usize; PIECES]; N_SPLINE];
    for i in 0..N_SPLINE {
        for j in 0..PIECES {
            jj[i][j] = if i == 0 { N_SPLINE * (1 + j) } else { DEG };
        }
    }
    for i in 1..N_SPLINE {
        for j in 0..PIECES {
            jj[i][j] += jj[i - 1][j];
        }
    }
    let mut coefs_out = [[0.0f64; N_SPLINE]; N_SPLINE * PIECES];
    for i in 0..N_SPLINE * PIECES {
        let flat = jj[i % N_SPLINE][i / N_SPLINE] - 1;
        coefs_out[i].copy_from_slice(&coefs[flat][..N_SPLINE]);
    }

    let n = y.len();
    let mut xs_b = vec![0i64; n * N_SPLINE];
    let mut index_b = vec![0usize; n * N_SPLINE];
    let mut break_ind = 1usize;
    for i in 0..n {
        if i as i64 >= breaks[break_ind] && break_ind < N_BREAKS - 1 {
            break_ind += 1;
        }
        for j in 0..N_SPLINE {
            xs_b[i * N_SPLINE + j] = i as i64 - breaks[break_ind - 1];
            index_b[i * N_SPLINE + j] = j + (break_ind - 1) * N_SPLINE;
        }
    }
    let mut v_b: Vec<f64> = index_b.iter().map(|&k| coefs_out[k][0]).collect();
    for i in 1..N_SPLINE {
        for j in 0..n * N_SPLINE {
            v_b[j] = v_b[j] * xs_b[j] as f64 + coefs_out[index_b[j]][i];
        }
    }

    let mut a = vec![0.0f64; n * (N_SPLINE + 1)];
    let mut bi = 0usize;
    for i in 0..N_SPLINE * n {
        if (i / N_SPLINE) as i64 >= breaks[1] {
            bi = 1;
        }
        a[(i % N_SPLINE) + bi + (i / N_SPLINE) * (N_SPLINE + 1)] = v_b[i];
    }
    let x = lsqsolve(n, N_SPLINE + 1, &a, y);

    let mut c = [[0.0f64; N_SPLINE * PIECES]; PIECES + N_SPLINE - 1];
    for i in 0..N_SPLINE * N_SPLINE * PIECES {
        let row = i % N_SPLINE + (i / N_SPLINE) % 2;
        let col = i / N_SPLINE;
        c[row][col] = coefs_out[i % (N_SPLINE * 2)][i / (N_SPLINE * 2)];
    }
    let mut coefs_spline = [[0.0f64; N_SPLINE]; PIECES];
    for j in 0..N_SPLINE * PIECES {
        let col = j / PIECES;
        let row = j % PIECES;
        for (i, xi) in x.iter().enumerate() {
            coefs_spline[row][col] += c[i][j] * xi;
        }
    }

    let half = |j: usize| usize::from(j as i64 >= breaks[1]);
    let mut out: Vec<f64> = (0..n).map(|i| coefs_spline[half(i)][0]).collect();
    for i in 1..N_SPLINE {
        for (j, o) in out.iter_mut().enumerate() {
            let s = half(j);
            *o = *o * (j as i64 - breaks[1] * s as i64) as f64 + coefs_spline[s][i];
        }
    }
    out
}

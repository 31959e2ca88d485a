
/// `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

/// Ordinary least-squares line. `None` when fewer than two distinct `x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<Line> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for i in 0..n {
        let dx = xs[i] - mx;
        sxx += dx * dx;
        sxy += dx * (ys[i] - my);
    }
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    Some(Line { slope, intercept: my - slope * mx })
}

/// Least-squares quadratic `y = c2 x^2 + c1 x + c0`, returned as `[c2, c1, c0]`.
///
/// Solved on centred and scaled abscissae, then mapped back, which keeps the
/// normal equations well conditioned for inputs like `log10 N` around 9.
/// `None` if the design is singular (fewer than three distinct `x`).
pub fn fit_quadratic(xs: &[f64], ys: &[f64]) -> Option<[f64; 3]> {
    let n = xs.len().min(ys.len());
    if n < 3 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let sx = xs[..n].iter().map(|x| (x - mx).abs()).fold(0.0, f64::max);
    if !(sx > 0.0) {
        return None;
    }
    // Normal equations in u = (x - mx) / sx.
    let mut m = [[0.0f64; 4]; 3];
    for i in 0..n {
        let u = (xs[i] - mx) / sx;
        let row = [u * u, u, 1.0];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] += row[r] * row[c];
            }
            m[r][3] += row[r] * ys[i];
        }
    }
    let [q2, q1, q0] = solve3(m)?;
    // y = q2 u^2 + q1 u + q0 with u = (x - mx)/sx
    let c2 = q2 / (sx * sx);
    let c1 = q1 / sx - 2.0 * q2 * mx / (sx * sx);
    let c0 = q0 - q1 * mx / sx + q2 * mx * mx / (sx * sx);
    Some([c2, c1, c0])
}

fn solve3(mut m: [[f64; 4]; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..4 {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

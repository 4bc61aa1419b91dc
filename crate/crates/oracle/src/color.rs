//! BT.601 full-range analog YUV by plain 3x3 matrix arithmetic, with the
//! inverse computed through the adjugate (an independent route from whatever
//! the engine does).

pub const KR: f64 = 0.299;
pub const KG: f64 = 0.587;
pub const KB: f64 = 0.114;
pub const U_SCALE: f64 = 0.492111;
pub const V_SCALE: f64 = 0.877283;

/// Forward matrix M such that [y, u, v]^T = M * [r, g, b]^T.
pub fn yuv_from_rgb_matrix() -> [[f64; 3]; 3] {
    [
        [KR, KG, KB],
        // u = U_SCALE * (b - y)
        [-U_SCALE * KR, -U_SCALE * KG, U_SCALE * (1.0 - KB)],
        // v = V_SCALE * (r - y)
        [V_SCALE * (1.0 - KR), -V_SCALE * KG, -V_SCALE * KB],
    ]
}

/// 3x3 inverse via the adjugate / determinant formula.
pub fn inverse3(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let cof = |r: usize, c: usize| -> f64 {
        let rs: Vec<usize> = (0..3).filter(|&i| i != r).collect();
        let cs: Vec<usize> = (0..3).filter(|&j| j != c).collect();
        let minor = m[rs[0]][cs[0]] * m[rs[1]][cs[1]] - m[rs[0]][cs[1]] * m[rs[1]][cs[0]];
        if (r + c) % 2 == 0 {
            minor
        } else {
            -minor
        }
    };
    let mut inv = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            // adjugate = transposed cofactor matrix
            inv[r][c] = cof(c, r) / det;
        }
    }
    inv
}

pub fn rgb_to_yuv(rgb: [f64; 3]) -> [f64; 3] {
    apply(yuv_from_rgb_matrix(), rgb)
}

pub fn yuv_to_rgb(yuv: [f64; 3]) -> [f64; 3] {
    apply(inverse3(yuv_from_rgb_matrix()), yuv)
}

fn apply(m: [[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for r in 0..3 {
        out[r] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2];
    }
    out
}

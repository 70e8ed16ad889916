//! 8×8 integer DCT, zigzag scan and dead-zone scalar quantization.

pub const N: usize = 8;
pub const AREA: usize = N * N;
/// Largest coefficient level accepted by the decoder.
pub const MAX_LEVEL: i32 = 1 << 15;

/// Integer DCT-II basis, rows scaled so that each has norm 64·√8.
const M: [[i64; N]; N] = [
    [64, 64, 64, 64, 64, 64, 64, 64],
    [89, 75, 50, 18, -18, -50, -75, -89],
    [83, 36, -36, -83, -83, -36, 36, 83],
    [75, -18, -89, -50, 50, 89, 18, -75],
    [64, -64, -64, 64, 64, -64, -64, 64],
    [50, -89, 18, 75, -75, -18, 89, -50],
    [36, -83, 83, -36, -36, 83, -83, 36],
    [18, -50, 75, -89, 89, -75, 50, -18],
];

/// Both passes together scale by 2^15.
const SHIFT: u32 = 15;

fn round_shift(v: i64) -> i32 {
    let half = 1i64 << (SHIFT - 1);
    let r = if v >= 0 {
        (v + half) >> SHIFT
    } else {
        -((-v + half) >> SHIFT)
    };
    r as i32
}

/// Forward transform of a row-major residual block; the result is
/// approximately orthonormal.
pub fn forward(block: &[i32; AREA]) -> [i32; AREA] {
    let mut tmp = [0i64; AREA];
    for u in 0..N {
        for x in 0..N {
            tmp[u * N + x] = (0..N).map(|y| M[u][y] * i64::from(block[y * N + x])).sum();
        }
    }
    let mut out = [0i32; AREA];
    for u in 0..N {
        for v in 0..N {
            out[u * N + v] = round_shift((0..N).map(|x| tmp[u * N + x] * M[v][x]).sum());
        }
    }
    out
}

pub fn inverse(coef: &[i32; AREA]) -> [i32; AREA] {
    let mut tmp = [0i64; AREA];
    for y in 0..N {
        for v in 0..N {
            tmp[y * N + v] = (0..N).map(|u| M[u][y] * i64::from(coef[u * N + v])).sum();
        }
    }
    let mut out = [0i32; AREA];
    for y in 0..N {
        for x in 0..N {
            out[y * N + x] = round_shift((0..N).map(|v| tmp[y * N + v] * M[v][x]).sum());
        }
    }
    out
}

/// Scan position → raster index.
pub const ZIGZAG: [usize; AREA] = {
    let mut z = [0usize; AREA];
    let mut i = 0;
    let mut s = 0;
    while s < 2 * N - 1 {
        let mut k = 0;
        while k <= s {
            // odd diagonals run top-right to bottom-left
            let (r, c) = if s % 2 == 1 { (k, s - k) } else { (s - k, k) };
            if r < N && c < N {
                z[i] = r * N + c;
                i += 1;
            }
            k += 1;
        }
        s += 1;
    }
    z
};

const LEVEL_SCALE: [i64; 6] = [40, 45, 51, 57, 64, 72];

/// Quantizer step in 1/64 units: 64·2^((qp−4)/6), tabulated per qp mod 6.
pub fn qstep_x64(qp: u8) -> i64 {
    LEVEL_SCALE[usize::from(qp % 6)] << (qp / 6)
}

/// Dead-zone quantization with rounding offset 1/3.
pub fn quantize(c: i32, qp: u8) -> i32 {
    let step = qstep_x64(qp);
    let mag = (i64::from(c.unsigned_abs()) * 64 * 3 + step) / (3 * step);
    let mag = mag.min(i64::from(MAX_LEVEL)) as i32;
    if c < 0 {
        -mag
    } else {
        mag
    }
}

pub fn dequantize(level: i32, qp: u8) -> i32 {
    let step = qstep_x64(qp);
    let mag = (i64::from(level.unsigned_abs()) * step + 32) >> 6;
    let mag = mag.min(i64::from(i32::MAX)) as i32;
    if level < 0 {
        -mag
    } else {
        mag
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn qp4_step_is_one() {
        assert_eq!(qstep_x64(4), 64);
        assert_eq!(qstep_x64(22), 64 * 8);
        assert_eq!(qstep_x64(10), 128);
        for qp in 0..=51u8 {
            let exact = 64.0 * 2f64.powf((f64::from(qp) - 4.0) / 6.0);
            assert!((qstep_x64(qp) as f64 / exact - 1.0).abs() < 0.02, "qp {qp}");
        }
    }

    #[test]
    fn dead_zone() {
        // step 8: |c|/8 + 1/3 floors to 0 below 5.33
        assert_eq!(quantize(5, 22), 0);
        assert_eq!(quantize(6, 22), 1);
        assert_eq!(quantize(-6, 22), -1);
        assert_eq!(quantize(13, 22), 1);
        assert_eq!(quantize(14, 22), 2);
        assert_eq!(dequantize(-2, 22), -16);
    }

    #[test]
    fn zigzag_is_permutation_starting_right() {
        let mut seen = [false; AREA];
        for &i in &ZIGZAG {
            assert!(!seen[i]);
            seen[i] = true;
        }
        assert_eq!(&ZIGZAG[..6], &[0, 1, 8, 16, 9, 2]);
        assert_eq!(ZIGZAG[63], 63);
    }

    #[test]
    fn dc_only() {
        let c = forward(&[10; AREA]);
        assert_eq!(c[0], 80);
        assert!(c[1..].iter().all(|&v| v == 0));
        assert_eq!(inverse(&c), [10; AREA]);
    }

    #[test]
    fn matches_float_dct() {
        let block: [i32; AREA] = std::array::from_fn(|i| ((i * 37 + 11) % 255) as i32 - 128);
        let c = forward(&block);
        let norm = block.iter().map(|&v| f64::from(v * v)).sum::<f64>().sqrt();
        for u in 0..N {
            for v in 0..N {
                let a = |k: usize| if k == 0 { (1.0f64 / 8.0).sqrt() } else { 0.5 };
                let mut s = 0.0;
                for y in 0..N {
                    for x in 0..N {
                        s += f64::from(block[y * N + x])
                            * ((2 * y + 1) as f64 * u as f64 * std::f64::consts::PI / 16.0).cos()
                            * ((2 * x + 1) as f64 * v as f64 * std::f64::consts::PI / 16.0).cos();
                    }
                }
                let want = a(u) * a(v) * s;
                // the integer basis deviates from the cosines by about 1%
                assert!((f64::from(c[u * N + v]) - want).abs() < 0.015 * norm + 0.5, "{u},{v}");
            }
        }
    }

    proptest! {
        #[test]
        fn near_perfect_reconstruction(v in proptest::collection::vec(-255i32..=255, AREA)) {
            let block: [i32; AREA] = v.try_into().unwrap();
            let back = inverse(&forward(&block));
            for (a, b) in block.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 2);
            }
        }
    }
}

//! Gray-mapped QPSK on {(±1 ± j)/√2}.

use rand::Rng;

use crate::linalg::C64;

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// First bit selects the sign of the real part, second bit the imaginary
/// part; a zero bit maps to the positive half-plane.
pub fn qpsk_modulate(bits: (bool, bool)) -> C64 {
    let s = |b: bool| if b { -H } else { H };
    C64::new(s(bits.0), s(bits.1))
}

/// Nearest constellation point. Points on an axis resolve toward the
/// positive half-plane.
pub fn qpsk_slice(z: C64) -> C64 {
    C64::new(if z.re >= 0.0 { H } else { -H }, if z.im >= 0.0 { H } else { -H })
}

/// Inverse of [`qpsk_modulate`] on the slicer's decision regions.
pub fn qpsk_bits(z: C64) -> (bool, bool) {
    (z.re < 0.0, z.im < 0.0)
}

/// Number of differing bits (0, 1 or 2) between two symbols.
pub fn bit_errors(sent: C64, decided: C64) -> u32 {
    let (a0, a1) = qpsk_bits(sent);
    let (b0, b1) = qpsk_bits(decided);
    (a0 != b0) as u32 + (a1 != b1) as u32
}

pub fn random_symbol<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    qpsk_modulate((rng.random(), rng.random()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAIRS: [(bool, bool); 4] = [(false, false), (false, true), (true, false), (true, true)];

    #[test]
    fn quadrant_rule() {
        assert_eq!(qpsk_modulate((false, false)), C64::new(H, H));
        assert_eq!(qpsk_slice(C64::new(0.3, 0.9)), C64::new(H, H));
        assert_eq!(qpsk_slice(C64::new(0.001, -0.002)), C64::new(H, -H));
    }

    #[test]
    fn slicer_is_idempotent_on_constellation() {
        for p in PAIRS {
            let s = qpsk_modulate(p);
            assert_eq!(qpsk_slice(s), s);
            assert_eq!(qpsk_bits(s), p);
            assert!((s.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ties_go_positive() {
        assert_eq!(qpsk_slice(C64::new(0.0, 0.0)), C64::new(H, H));
        assert_eq!(qpsk_slice(C64::new(-1.0, 0.0)), C64::new(-H, H));
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        let a = qpsk_modulate((false, false));
        assert_eq!(bit_errors(a, qpsk_modulate((true, false))), 1);
        assert_eq!(bit_errors(a, qpsk_modulate((true, true))), 2);
        assert_eq!(bit_errors(a, a), 0);
    }
}

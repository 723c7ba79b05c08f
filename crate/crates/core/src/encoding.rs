//! Fixed-point embedding of real feature vectors into `Z_n^t`.
//!
//! A component `v` becomes `round(v * S) mod n` (round half away from zero),
//! with negative values landing in the upper half of `Z_n`. Reading a residue
//! back uses the centered convention of [`decode_centered`].
//!
//! Modular results only agree with integer results while every quantity
//! stays inside the centered range `(-n/2, n/2)`. For squared distances of
//! two encoded vectors with components bounded by `X`, the worst case is
//! `4 t X^2`; [`DistanceBound`] enforces `4 t X^2 < n / 2` before anything is
//! encrypted.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use thiserror::Error;

/// Default fixed-point multiplier.
pub const DEFAULT_SCALE: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error("feature vector must have at least one component")]
    EmptyVector,
    #[error("component {index} is not finite")]
    NonFinite { index: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("component {index} does not fit in the centered range of Z_n")]
    ComponentOverflow { index: usize },
    #[error("component {index} exceeds the safe magnitude for squared distances")]
    UnsafeMagnitude { index: usize },
    #[error("scale must be a positive integer")]
    InvalidScale,
    #[error("no positive safe magnitude: n must exceed 4 * t * S^2")]
    BoundUnsatisfiable,
    #[error("residue {index} is not below the modulus")]
    ResidueOutOfRange { index: usize },
    #[error("vectors use different moduli or scales")]
    ParameterMismatch,
    #[error("threshold must be finite and non-negative")]
    InvalidThreshold,
}

/// Real-valued feature vector with `t >= 1` finite components.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(components: Vec<f64>) -> Result<Self, EncodingError> {
        if components.is_empty() {
            return Err(EncodingError::EmptyVector);
        }
        if let Some(index) = components.iter().position(|c| !c.is_finite()) {
            return Err(EncodingError::NonFinite { index });
        }
        Ok(Self(components))
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Largest absolute component.
    pub fn max_magnitude(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, c| f64::max(acc, libm::fabs(*c)))
    }
}

/// A feature vector embedded in `Z_n^t` at scale `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedVector {
    residues: Vec<BigUint>,
    scale: u64,
    modulus: BigUint,
}

impl EncodedVector {
    pub fn new(residues: Vec<BigUint>, scale: u64, modulus: BigUint) -> Result<Self, EncodingError> {
        if residues.is_empty() {
            return Err(EncodingError::EmptyVector);
        }
        if scale == 0 {
            return Err(EncodingError::InvalidScale);
        }
        if let Some(index) = residues.iter().position(|r| r >= &modulus) {
            return Err(EncodingError::ResidueOutOfRange { index });
        }
        Ok(Self {
            residues,
            scale,
            modulus,
        })
    }

    pub fn residues(&self) -> &[BigUint] {
        &self.residues
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn dim(&self) -> usize {
        self.residues.len()
    }

    /// Residues read back as signed integers.
    pub fn centered(&self) -> Vec<BigInt> {
        self.residues
            .iter()
            .map(|r| decode_centered(r, &self.modulus))
            .collect()
    }

    /// Sum of squared centered components, reduced into `Z_n`.
    pub fn sq_norm_residue(&self) -> BigUint {
        let sum: BigInt = self.centered().iter().map(|x| x * x).sum();
        to_residue(&sum, &self.modulus)
    }
}

fn to_residue(x: &BigInt, n: &BigUint) -> BigUint {
    let n = BigInt::from(n.clone());
    let r = ((x % &n) + &n) % &n;
    r.to_biguint().expect("non-negative after reduction")
}

/// Encodes `v` component-wise as `round(v_j * S) mod n`.
pub fn encode_vector(v: &FeatureVector, scale: u64, n: &BigUint) -> Result<EncodedVector, EncodingError> {
    if scale == 0 {
        return Err(EncodingError::InvalidScale);
    }
    let residues = v
        .components()
        .iter()
        .enumerate()
        .map(|(index, &c)| {
            let scaled = libm::round(c * scale as f64);
            let x = BigInt::from_f64(scaled).ok_or(EncodingError::ComponentOverflow { index })?;
            // |x| < n / 2
            if (x.magnitude() << 1u8) >= *n {
                return Err(EncodingError::ComponentOverflow { index });
            }
            Ok(to_residue(&x, n))
        })
        .collect::<Result<Vec<_>, _>>()?;
    EncodedVector::new(residues, scale, n.clone())
}

/// `z` if `z < n/2`, else `z - n`.
pub fn decode_centered(z: &BigUint, n: &BigUint) -> BigInt {
    if (z << 1u8) < *n {
        BigInt::from(z.clone())
    } else {
        BigInt::from(z.clone()) - BigInt::from(n.clone())
    }
}

/// `sum_j (f_j - q_j)^2` over the reals.
pub fn plain_sq_distance(f: &FeatureVector, q: &FeatureVector) -> Result<f64, EncodingError> {
    if f.dim() != q.dim() {
        return Err(EncodingError::DimensionMismatch {
            expected: f.dim(),
            found: q.dim(),
        });
    }
    Ok(f.components()
        .iter()
        .zip(q.components())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// Integer squared distance between the centered components of two encoded
/// vectors. Exact; no modular reduction.
pub fn encoded_sq_distance(a: &EncodedVector, b: &EncodedVector) -> Result<BigUint, EncodingError> {
    if a.dim() != b.dim() {
        return Err(EncodingError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if a.modulus != b.modulus || a.scale != b.scale {
        return Err(EncodingError::ParameterMismatch);
    }
    let sum: BigInt = a
        .centered()
        .iter()
        .zip(b.centered())
        .map(|(x, y)| {
            let d = x - y;
            &d * &d
        })
        .sum();
    Ok(sum.magnitude().clone())
}

fn check_configuration(n: &BigUint, t: usize, scale: u64) -> Result<(), EncodingError> {
    if scale == 0 {
        return Err(EncodingError::InvalidScale);
    }
    if t == 0 {
        return Err(EncodingError::EmptyVector);
    }
    let s = BigUint::from(scale);
    if *n <= BigUint::from(4u8) * BigUint::from(t) * &s * &s {
        return Err(EncodingError::BoundUnsatisfiable);
    }
    Ok(())
}

/// Supremum `M = sqrt(n / (8 t)) / S` of real component magnitudes for
/// which `4 t (S M)^2 < n / 2`.
pub fn max_safe_magnitude(n: &BigUint, t: usize, scale: u64) -> Result<f64, EncodingError> {
    check_configuration(n, t, scale)?;
    let denom = 8.0 * t as f64;
    let root = if n.bits() <= 53 {
        libm::sqrt(n.to_f64().expect("fits in f64") / denom)
    } else {
        (n / BigUint::from(8 * t as u64))
            .sqrt()
            .to_f64()
            .unwrap_or(f64::INFINITY)
    };
    Ok(f64::min(root / scale as f64, f64::MAX))
}

/// Overflow guard for squared distances of `t`-dimensional encoded vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceBound {
    t: usize,
    scale: u64,
    modulus: BigUint,
    max_component_magnitude: f64,
    max_encoded_component: BigUint,
    max_sq_distance_representable: BigUint,
}

impl DistanceBound {
    pub fn new(n: &BigUint, t: usize, scale: u64) -> Result<Self, EncodingError> {
        let max_component_magnitude = max_safe_magnitude(n, t, scale)?;
        // Largest integer x with 8 t x^2 <= n - 1.
        let max_encoded_component = ((n - 1u8) / BigUint::from(8 * t as u64)).sqrt();
        Ok(Self {
            t,
            scale,
            modulus: n.clone(),
            max_component_magnitude,
            max_encoded_component,
            max_sq_distance_representable: (n - 1u8) >> 1u8,
        })
    }

    pub fn dim(&self) -> usize {
        self.t
    }

    /// Real-valued magnitude bound (supremum).
    pub fn max_component_magnitude(&self) -> f64 {
        self.max_component_magnitude
    }

    /// Largest admissible encoded component magnitude.
    pub fn max_encoded_component(&self) -> &BigUint {
        &self.max_encoded_component
    }

    /// Largest squared distance that decodes unambiguously, `(n - 1) / 2`.
    pub fn max_sq_distance_representable(&self) -> &BigUint {
        &self.max_sq_distance_representable
    }

    /// Rejects vectors whose squared distance to another admissible vector
    /// could leave the centered range.
    pub fn check(&self, v: &EncodedVector) -> Result<(), EncodingError> {
        if v.dim() != self.t {
            return Err(EncodingError::DimensionMismatch {
                expected: self.t,
                found: v.dim(),
            });
        }
        if v.modulus != self.modulus || v.scale != self.scale {
            return Err(EncodingError::ParameterMismatch);
        }
        match v
            .centered()
            .iter()
            .position(|x| x.magnitude() > &self.max_encoded_component)
        {
            Some(index) => Err(EncodingError::UnsafeMagnitude { index }),
            None => Ok(()),
        }
    }

    /// Whether every real component of magnitude at most `magnitude` encodes
    /// within the bound.
    pub fn admits_magnitude(&self, magnitude: f64) -> bool {
        if !magnitude.is_finite() || magnitude < 0.0 || magnitude >= self.max_component_magnitude {
            return false;
        }
        match BigUint::from_f64(libm::round(magnitude * self.scale as f64)) {
            Some(x) => x <= self.max_encoded_component,
            None => false,
        }
    }
}

/// `floor((threshold * S)^2)`: the match cutoff on encoded squared distances.
///
/// Exact: the product `threshold * S` is squared as a dyadic rational.
pub fn scaled_threshold(threshold: f64, scale: u64) -> Result<BigUint, EncodingError> {
    if !threshold.is_finite() || threshold < 0.0 {
        return Err(EncodingError::InvalidThreshold);
    }
    let x = threshold * scale as f64;
    if !x.is_finite() {
        return Err(EncodingError::InvalidThreshold);
    }
    if x == 0.0 {
        return Ok(BigUint::zero());
    }
    // x = mantissa * 2^exp
    let bits = x.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let (mantissa, exp) = if raw_exp == 0 {
        (bits & ((1u64 << 52) - 1), -1074)
    } else {
        ((bits & ((1u64 << 52) - 1)) | (1u64 << 52), raw_exp - 1075)
    };
    let sq = BigUint::from(mantissa) * BigUint::from(mantissa);
    let shift = 2 * exp;
    Ok(if shift >= 0 {
        sq << shift as u64
    } else {
        sq >> (-shift) as u64
    })
}

/// Whether a decrypted residue, read as a centered value, is a squared
/// distance within the cutoff. Negative readings (wrapped values) never match.
pub fn residue_within(residue: &BigUint, n: &BigUint, cutoff: &BigUint) -> bool {
    let d = decode_centered(residue, n);
    d.sign() != Sign::Minus && d.magnitude() <= cutoff
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn fv(c: &[f64]) -> FeatureVector {
        FeatureVector::new(c.to_vec()).unwrap()
    }

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn feature_vector_validation() {
        assert_eq!(FeatureVector::new(vec![]), Err(EncodingError::EmptyVector));
        assert_eq!(
            FeatureVector::new(vec![1.0, f64::NAN]),
            Err(EncodingError::NonFinite { index: 1 })
        );
        assert_eq!(
            FeatureVector::new(vec![f64::INFINITY]),
            Err(EncodingError::NonFinite { index: 0 })
        );
    }

    #[test]
    fn encode_examples() {
        let e = encode_vector(&fv(&[1.5, 2.0]), 100, &big(1_000_003)).unwrap();
        assert_eq!(e.residues(), &[big(150), big(200)]);
        let e = encode_vector(&fv(&[-2.0]), 1, &big(35)).unwrap();
        assert_eq!(e.residues(), &[big(33)]);
        let e = encode_vector(&fv(&[0.0, 0.0, -0.0]), 12345, &big(35)).unwrap();
        assert!(e.residues().iter().all(Zero::is_zero));
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        let n = big(1_000_003);
        let e = encode_vector(&fv(&[0.5, -0.5, 2.5, -2.5, 0.49]), 1, &n).unwrap();
        let c: Vec<i64> = e.centered().iter().map(|x| x.to_i64().unwrap()).collect();
        assert_eq!(c, [1, -1, 3, -3, 0]);
    }

    #[test]
    fn encode_overflow_names_the_component() {
        // 18 and -18 do not fit below 35/2.
        assert_eq!(
            encode_vector(&fv(&[1.0, 18.0]), 1, &big(35)),
            Err(EncodingError::ComponentOverflow { index: 1 })
        );
        assert_eq!(
            encode_vector(&fv(&[-18.0]), 1, &big(35)),
            Err(EncodingError::ComponentOverflow { index: 0 })
        );
        assert!(encode_vector(&fv(&[17.0, -17.0]), 1, &big(35)).is_ok());
        assert_eq!(
            encode_vector(&fv(&[1e300]), u64::MAX, &big(35)),
            Err(EncodingError::ComponentOverflow { index: 0 })
        );
        assert_eq!(encode_vector(&fv(&[1.0]), 0, &big(35)), Err(EncodingError::InvalidScale));
    }

    #[test]
    fn decode_centered_examples() {
        assert_eq!(decode_centered(&big(33), &big(35)), BigInt::from(-2));
        assert_eq!(decode_centered(&big(0), &big(1_000_003)), BigInt::from(0));
        assert_eq!(decode_centered(&big(17), &big(35)), BigInt::from(17));
        assert_eq!(decode_centered(&big(18), &big(35)), BigInt::from(-17));
        // Even modulus: n/2 itself reads as negative.
        assert_eq!(decode_centered(&big(5), &big(10)), BigInt::from(-5));
    }

    #[test]
    fn plain_distance_examples() {
        assert_eq!(plain_sq_distance(&fv(&[3.0, 4.0]), &fv(&[0.0, 0.0])), Ok(25.0));
        assert_eq!(plain_sq_distance(&fv(&[1.5, -2.0]), &fv(&[1.5, -2.0])), Ok(0.0));
        assert_eq!(
            plain_sq_distance(&fv(&[1.0, 2.0, 3.0]), &fv(&[4.0, 6.0, 3.0])),
            Ok(25.0)
        );
        assert_eq!(
            plain_sq_distance(&fv(&[1.0]), &fv(&[1.0, 2.0])),
            Err(EncodingError::DimensionMismatch { expected: 1, found: 2 })
        );
    }

    #[test]
    fn max_safe_magnitude_toy_modulus() {
        let m = max_safe_magnitude(&big(35), 2, 1).unwrap();
        assert!((m - libm::sqrt(35.0 / 16.0)).abs() < 1e-12);
        assert!((m - 1.479_019_945_774_904).abs() < 1e-12);
        let bound = DistanceBound::new(&big(35), 2, 1).unwrap();
        assert!(bound.admits_magnitude(1.0));
        assert!(!bound.admits_magnitude(2.0));
        assert_eq!(bound.max_encoded_component(), &big(1));
        assert_eq!(bound.max_sq_distance_representable(), &big(17));
    }

    #[test]
    fn max_safe_magnitude_large_modulus() {
        let n = BigUint::from(1u8) << 2047u32;
        let m = max_safe_magnitude(&n, 128, 10_000).unwrap();
        // sqrt(2^2047 / 1024) / 10^4
        assert!(m > 1e250);
        assert!((m / 3.972_378_144_230_348e302 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn doubling_scale_halves_the_bound() {
        for n in [big(1_000_003), BigUint::from(1u8) << 200u32] {
            let a = max_safe_magnitude(&n, 4, 10).unwrap();
            let b = max_safe_magnitude(&n, 4, 20).unwrap();
            assert!((a / b - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unsatisfiable_configuration() {
        // 4 * t * S^2 = 36 >= 35
        assert_eq!(
            max_safe_magnitude(&big(35), 9, 1),
            Err(EncodingError::BoundUnsatisfiable)
        );
        assert_eq!(max_safe_magnitude(&big(35), 1, 3), Err(EncodingError::BoundUnsatisfiable));
        assert!(max_safe_magnitude(&big(37), 9, 1).is_ok());
        assert_eq!(max_safe_magnitude(&big(35), 0, 1), Err(EncodingError::EmptyVector));
    }

    #[test]
    fn bound_check_flags_wraparound_inputs() {
        let n = big(35);
        let bound = DistanceBound::new(&n, 1, 1).unwrap();
        // 8 x^2 <= 34 -> x <= 2
        assert_eq!(bound.max_encoded_component(), &big(2));
        let ok = encode_vector(&fv(&[-2.0]), 1, &n).unwrap();
        assert!(bound.check(&ok).is_ok());
        let bad = encode_vector(&fv(&[5.0]), 1, &n).unwrap();
        assert_eq!(bound.check(&bad), Err(EncodingError::UnsafeMagnitude { index: 0 }));
        let wrong_dim = encode_vector(&fv(&[1.0, 1.0]), 1, &n).unwrap();
        assert!(matches!(
            bound.check(&wrong_dim),
            Err(EncodingError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn threshold_scaling_is_exact() {
        assert_eq!(scaled_threshold(5.0, 1).unwrap(), big(25));
        assert_eq!(scaled_threshold(0.0, 10_000).unwrap(), big(0));
        assert_eq!(scaled_threshold(1.5, 10).unwrap(), big(225));
        // (0.1 * 3) is slightly above 0.3 in binary: floor(0.09000000000000002) = 0
        assert_eq!(scaled_threshold(0.1, 3).unwrap(), big(0));
        assert_eq!(scaled_threshold(5.0, 10_000).unwrap(), big(2_500_000_000));
        // 2^40 squared exceeds u64.
        assert_eq!(
            scaled_threshold((1u64 << 40) as f64, 1).unwrap(),
            BigUint::from(1u8) << 80u32
        );
        assert_eq!(scaled_threshold(-1.0, 1), Err(EncodingError::InvalidThreshold));
        assert_eq!(scaled_threshold(f64::NAN, 1), Err(EncodingError::InvalidThreshold));
    }

    #[test]
    fn residue_within_rejects_wrapped_values() {
        let n = big(35);
        assert!(residue_within(&big(4), &n, &big(4)));
        assert!(!residue_within(&big(5), &n, &big(4)));
        assert!(!residue_within(&big(30), &n, &big(100)));
    }

    proptest! {
        #[test]
        fn encode_decode_roundtrip(v in proptest::collection::vec(-1.0e3f64..1.0e3, 1..16), s_pow in 0u32..6) {
            let scale = 10u64.pow(s_pow);
            let n = (BigUint::from(1u8) << 127u32) - 1u8;
            let e = encode_vector(&FeatureVector::new(v.clone()).unwrap(), scale, &n).unwrap();
            for (x, c) in e.centered().iter().zip(&v) {
                prop_assert_eq!(x.to_f64().unwrap(), libm::round(c * scale as f64));
            }
        }

        #[test]
        fn encoded_distance_tracks_real_distance(
            pairs in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..16),
        ) {
            let scale = 10_000u64;
            let n = (BigUint::from(1u8) << 127u32) - 1u8;
            let (f, q): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
            let (f, q) = (FeatureVector::new(f).unwrap(), FeatureVector::new(q).unwrap());
            let ef = encode_vector(&f, scale, &n).unwrap();
            let eq = encode_vector(&q, scale, &n).unwrap();
            let d_enc = encoded_sq_distance(&ef, &eq).unwrap().to_f64().unwrap();
            let s = scale as f64;
            let d_real = plain_sq_distance(&f, &q).unwrap() * s * s;
            // Each encoded difference is off by at most 1 from (f_j - q_j) * S.
            let tolerance: f64 = pairs.iter().map(|(a, b)| 2.0 * s * (a - b).abs() + 1.0).sum();
            prop_assert!((d_enc - d_real).abs() <= tolerance + 1e-6 * d_real);
        }
    }
}

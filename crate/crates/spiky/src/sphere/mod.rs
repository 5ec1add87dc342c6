//! Deterministic seeded sampling on S^{d-1} and stable spherical angles.

pub mod net;

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// RNG algorithm identifier recorded in every report.
///
/// Streams are ChaCha12 keyed by `master_seed` with the 64-bit stream id
/// selecting an independent substream; a (master_seed, stream_id) pair
/// reproduces the same byte stream on any thread schedule.
pub const RNG_ALGORITHM: &str = "chacha12/seed64/stream64";

/// Named stream-derivation blocks (see [`SeedSpec::derive`]).
pub mod stream_block {
    pub const NET_CANDIDATES: u64 = 1;
    pub const NET_VERIFY: u64 = 2;
    pub const BODY_POINTS: u64 = 3;
    pub const COVER_PROBES: u64 = 4;
    pub const COVER_VERIFY: u64 = 5;
    pub const ORACLE_STARTS: u64 = 6;
    pub const PROBE_SWEEP: u64 = 7;
    pub const TRIAL: u64 = 8;
    pub const POLYTOPAL_CORE: u64 = 9;
}

/// A fully reproducible random stream: (master_seed, stream_id).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> SeedSpec {
        SeedSpec { master_seed, stream_id }
    }

    /// Instantiate the stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Derive a child stream for a named purpose. The child keeps the master
    /// seed; its stream id is an FNV-1a mix of (stream_id, block, index), so
    /// distinct purposes and indices get distinct, reproducible streams.
    pub fn derive(&self, block: u64, index: u64) -> SeedSpec {
        let mut h = 0xcbf2_9ce4_8422_2325_u64;
        for word in [self.stream_id, block, index] {
            for byte in word.to_le_bytes() {
                h = (h ^ u64::from(byte)).wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        SeedSpec { master_seed: self.master_seed, stream_id: h }
    }
}

/// A point of S^{d-1}: coordinates with Euclidean norm within 1e-12 of 1.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector {
    coords: Vec<f64>,
}

pub const UNIT_NORM_TOL: f64 = 1e-12;

impl UnitVector {
    /// Scale a nonzero finite vector to unit length.
    pub fn normalized(mut coords: Vec<f64>) -> Result<UnitVector> {
        if coords.len() < 2 {
            return Err(Error::domain("unit vectors need dimension >= 2".to_string()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("unit vector coordinates must be finite".to_string()));
        }
        let norm = norm(&coords);
        if norm < 1e-300 {
            return Err(Error::domain("cannot normalize a zero vector".to_string()));
        }
        for c in &mut coords {
            *c /= norm;
        }
        Ok(UnitVector { coords })
    }

    /// Accept coordinates already on the sphere (norm within 1e-12 of 1).
    pub fn from_unit(coords: Vec<f64>) -> Result<UnitVector> {
        if coords.len() < 2 {
            return Err(Error::domain("unit vectors need dimension >= 2".to_string()));
        }
        let norm = norm(&coords);
        if (norm - 1.0).abs() > UNIT_NORM_TOL || coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain(format!(
                "coordinates are not on the unit sphere (norm = {norm})"
            )));
        }
        Ok(UnitVector { coords })
    }

    pub fn standard_basis(d: usize, i: usize) -> UnitVector {
        assert!(i < d && d >= 2);
        let mut coords = vec![0.0; d];
        coords[i] = 1.0;
        UnitVector { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn negated(&self) -> UnitVector {
        UnitVector {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        dot(&self.coords, &other.coords)
    }

    /// Spherical distance to `other`; see [`angle`].
    pub fn angle_to(&self, other: &UnitVector) -> Result<f64> {
        angle(self, other)
    }

    /// The unit vector at spherical distance `beta` from `self` toward the
    /// tangent direction `tangent` (which must be orthogonal to `self`).
    pub fn rotate_toward(&self, tangent: &UnitVector, beta: f64) -> Result<UnitVector> {
        if self.dim() != tangent.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: tangent.dim() });
        }
        let (c, s) = (beta.cos(), beta.sin());
        UnitVector::normalized(
            self.coords
                .iter()
                .zip(&tangent.coords)
                .map(|(u, t)| c * u + s * t)
                .collect(),
        )
    }

    /// Some unit tangent at `self` (orthogonal within roundoff), built by
    /// Gram-Schmidt against the least-aligned basis vector.
    pub fn any_tangent(&self) -> UnitVector {
        let i_min = self
            .coords
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap();
        let mut t = vec![0.0; self.dim()];
        t[i_min] = 1.0;
        let proj = self.coords[i_min];
        for (tc, uc) in t.iter_mut().zip(&self.coords) {
            *tc -= proj * uc;
        }
        UnitVector::normalized(t).expect("basis vector is never parallel to a unit vector")
    }
}

impl Serialize for UnitVector {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_seq(self.coords.iter().map(|c| crate::hexfloat::format_f64(*c)))
    }
}

impl<'de> Deserialize<'de> for UnitVector {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<UnitVector, D::Error> {
        let strs: Vec<String> = Vec::deserialize(de)?;
        let coords: std::result::Result<Vec<f64>, _> = strs
            .iter()
            .map(|s| crate::hexfloat::parse_f64(s).map_err(D::Error::custom))
            .collect();
        UnitVector::from_unit(coords?).map_err(D::Error::custom)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Spherical angle between two unit vectors, in [0, pi].
///
/// Bitwise-equal inputs give exactly 0, bitwise-antipodal inputs exactly pi;
/// otherwise the two-argument arctangent of (norm of the component of `v`
/// orthogonal to `u`, dot product), which is stable where acos(dot) is not.
pub fn angle(u: &UnitVector, v: &UnitVector) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { left: u.dim(), right: v.dim() });
    }
    if u.coords == v.coords {
        return Ok(0.0);
    }
    let d = u.dot(v);
    let mut orth_sq = 0.0;
    let mut antipodal = true;
    for (a, b) in u.coords.iter().zip(&v.coords) {
        let o = b - d * a;
        orth_sq += o * o;
        if *b != -*a {
            antipodal = false;
        }
    }
    if antipodal {
        return Ok(std::f64::consts::PI);
    }
    Ok(orth_sq.sqrt().atan2(d))
}

/// One uniform point of S^{d-1}: d standard normal deviates, normalized.
/// Deterministic per (seed, d); an all-zero draw retries internally.
pub fn sample_uniform(d: usize, seed: SeedSpec) -> Result<UnitVector> {
    if d < 2 {
        return Err(Error::domain(format!("sphere dimension must be >= 2, got {d}")));
    }
    let mut rng = seed.rng();
    Ok(sample_uniform_with(d, &mut rng))
}

/// Draw the next uniform point from an already-instantiated stream.
pub fn sample_uniform_with<R: Rng>(d: usize, rng: &mut R) -> UnitVector {
    loop {
        let coords: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(u) = UnitVector::normalized(coords) {
            return u;
        }
    }
}

/// A batch of uniform points from one stream.
pub fn sample_batch(d: usize, count: usize, seed: SeedSpec) -> Result<Vec<UnitVector>> {
    if d < 2 {
        return Err(Error::domain(format!("sphere dimension must be >= 2, got {d}")));
    }
    let mut rng = seed.rng();
    Ok((0..count).map(|_| sample_uniform_with(d, &mut rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn angle_exact_cases() {
        let e1 = UnitVector::standard_basis(3, 0);
        let e2 = UnitVector::standard_basis(3, 1);
        assert_eq!(angle(&e1, &e1).unwrap(), 0.0);
        assert_eq!(angle(&e1, &e1.negated()).unwrap(), PI);
        let diag = UnitVector::normalized(vec![1.0, 1.0, 0.0]).unwrap();
        assert!((angle(&e1, &diag).unwrap() - FRAC_PI_4).abs() < 1e-14);
        assert!((angle(&e1, &e2).unwrap() - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn angle_dimension_mismatch() {
        let a = UnitVector::standard_basis(3, 0);
        let b = UnitVector::standard_basis(4, 0);
        assert!(angle(&a, &b).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let seed = SeedSpec::new(42, 0);
        let a = sample_uniform(3, seed).unwrap();
        let b = sample_uniform(3, seed).unwrap();
        assert_eq!(a.coords(), b.coords());
        // distinct streams differ
        let c = sample_uniform(3, SeedSpec::new(42, 1)).unwrap();
        assert_ne!(a.coords(), c.coords());
    }

    #[test]
    fn samples_are_unit_norm() {
        let mut rng = SeedSpec::new(7, 0).rng();
        for _ in 0..100 {
            let u = sample_uniform_with(5, &mut rng);
            assert!((norm(u.coords()) - 1.0).abs() <= UNIT_NORM_TOL);
        }
    }

    #[test]
    fn derive_separates_purposes() {
        let s = SeedSpec::new(9, 3);
        let a = s.derive(stream_block::NET_CANDIDATES, 0);
        let b = s.derive(stream_block::NET_VERIFY, 0);
        let c = s.derive(stream_block::NET_CANDIDATES, 1);
        assert_eq!(a.master_seed, 9);
        assert_ne!(a.stream_id, b.stream_id);
        assert_ne!(a.stream_id, c.stream_id);
        assert_eq!(a, s.derive(stream_block::NET_CANDIDATES, 0));
    }

    #[test]
    fn rotate_toward_hits_requested_angle() {
        let u = UnitVector::normalized(vec![0.3, -1.2, 0.5, 0.1]).unwrap();
        let t = u.any_tangent();
        assert!(u.dot(&t).abs() < 1e-12);
        for beta in [0.05, 0.7, 1.4, 2.9] {
            let v = u.rotate_toward(&t, beta).unwrap();
            assert!((angle(&u, &v).unwrap() - beta).abs() < 1e-12, "beta={beta}");
        }
    }

    #[test]
    fn unit_vector_serde_round_trip() {
        let u = sample_uniform(4, SeedSpec::new(5, 5)).unwrap();
        let json = serde_json::to_string(&u).unwrap();
        let back: UnitVector = serde_json::from_str(&json).unwrap();
        assert_eq!(u.coords(), back.coords());
        // off-sphere data is rejected at parse time
        let bad = "[\"0x1.0000000000000p+1\",\"0x0p+0\"]";
        assert!(serde_json::from_str::<UnitVector>(bad).is_err());
    }

    #[test]
    fn from_unit_validates() {
        assert!(UnitVector::from_unit(vec![1.0, 1e-5]).is_err());
        assert!(UnitVector::from_unit(vec![1.0, 0.0]).is_ok());
        assert!(UnitVector::normalized(vec![0.0, 0.0]).is_err());
    }
}

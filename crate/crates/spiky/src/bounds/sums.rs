//! Gauge-sum functionals over candidate point sets: upper bounds for the
//! illumination parameter (sets whose points illuminate every spike) and
//! for the vertex index (sets whose hull contains the body).

use crate::body::SpikyBody;
use crate::error::{Error, Result};
use crate::oracle::{gauge, support, OracleOpts};
use crate::sphere::{angle, sample_batch, SeedSpec, UnitVector};
use serde::{Deserialize, Serialize};

/// The d+1 vertices of a regular simplex inscribed in S^{d-1}
/// (pairwise inner products -1/d). Every open hemisphere contains at least
/// one of them, which is why they illuminate any smooth body.
pub fn simplex_directions(d: usize) -> Vec<UnitVector> {
    assert!(d >= 2);
    // e_i - centroid in R^{d+1} live in the hyperplane sum(x) = 0 and have
    // pairwise dots -1/d after normalization; express them in an
    // orthonormal basis of that hyperplane.
    let dim_up = d + 1;
    let raw: Vec<Vec<f64>> = (0..dim_up)
        .map(|i| {
            let mut v = vec![-1.0 / dim_up as f64; dim_up];
            v[i] += 1.0;
            v
        })
        .collect();
    // Gram-Schmidt an orthonormal basis of span(raw) (dimension d)
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    for cand in &raw {
        if basis.len() == d {
            break;
        }
        let mut v = cand.clone();
        for b in &basis {
            let proj: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (vc, bc) in v.iter_mut().zip(b) {
                *vc -= proj * bc;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            for vc in &mut v {
                *vc /= norm;
            }
            basis.push(v);
        }
    }
    assert_eq!(basis.len(), d);
    raw.iter()
        .map(|u| {
            let coords: Vec<f64> = basis
                .iter()
                .map(|b| u.iter().zip(b).map(|(x, y)| x * y).sum())
                .collect();
            UnitVector::normalized(coords).expect("simplex vertices are nonzero")
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IlluminationSumReport {
    /// Sum of gauges — an upper bound for the illumination parameter
    /// restricted to this candidate set.
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub sum: f64,
    pub point_count: usize,
    #[serde(with = "crate::hexfloat::serde_vec_f64")]
    pub gauges: Vec<f64>,
    /// Spike-level validation: every signed spike is illuminated by some
    /// point of the set (via the cap criterion on the point-to-spike ray).
    pub spikes_validated: usize,
}

/// Sum of gauges of an illuminating point set.
///
/// Validity check: each signed spike ±X_i must be illuminated by at least
/// one point p of the set, decided by the cap criterion on the ray
/// direction (spike - p): the direction must fall strictly inside the open
/// alpha-cap at the spike's antipode. Points must lie outside the body
/// (gauge > 1). Fails with a witness otherwise.
pub fn illumination_parameter_sum(
    body: &SpikyBody,
    points: &[Vec<f64>],
    opts: &OracleOpts,
) -> Result<IlluminationSumReport> {
    if points.is_empty() {
        return Err(Error::InvalidSet("empty candidate point set".to_string()));
    }
    let alpha = body.alpha();
    let signed: Vec<UnitVector> = body.signed_spikes().collect();
    for (k, spike) in signed.iter().enumerate() {
        let lit = points.iter().any(|p| {
            let dir: Vec<f64> = spike
                .coords()
                .iter()
                .zip(p)
                .map(|(s, pc)| s - pc)
                .collect();
            match UnitVector::normalized(dir) {
                Ok(u) => match angle(&u, &spike.negated()) {
                    Ok(a) => a < alpha - 1e-12,
                    Err(_) => false,
                },
                Err(_) => false,
            }
        });
        if !lit {
            return Err(Error::InvalidSet(format!(
                "signed spike {} (spike {}, sign {}) is not illuminated by any candidate point",
                k,
                k / 2,
                if k % 2 == 0 { "+" } else { "-" }
            )));
        }
    }
    let mut gauges = Vec::with_capacity(points.len());
    for p in points {
        let g = gauge(body, p, opts)?.value;
        if g <= 1.0 {
            return Err(Error::InvalidSet(format!(
                "candidate point has gauge {g} <= 1 (inside the body)"
            )));
        }
        gauges.push(g);
    }
    Ok(IlluminationSumReport {
        sum: gauges.iter().sum(),
        point_count: points.len(),
        gauges,
        spikes_validated: signed.len(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContainmentSumReport {
    /// Sum of gauges — a vertex-index-style upper bound for this hull.
    #[serde(with = "crate::hexfloat::serde_f64")]
    pub sum: f64,
    pub point_count: usize,
    #[serde(with = "crate::hexfloat::serde_vec_f64")]
    pub gauges: Vec<f64>,
    /// Number of directions on which h_K <= h_hull was verified.
    pub directions_checked: usize,
}

/// Sum of gauges of a point set whose convex hull contains the body,
/// validated by a support-function sweep: h_K(w) <= h_conv(points)(w) on
/// the spikes ±X_i and `sweep` random directions.
pub fn containment_sum(
    body: &SpikyBody,
    points: &[Vec<f64>],
    sweep: usize,
    seed: SeedSpec,
    opts: &OracleOpts,
) -> Result<ContainmentSumReport> {
    if points.is_empty() {
        return Err(Error::InvalidSet("empty candidate point set".to_string()));
    }
    for p in points {
        if p.len() != body.dimension {
            return Err(Error::DimensionMismatch { left: body.dimension, right: p.len() });
        }
    }
    let hull_support = |w: &[f64]| -> f64 {
        points
            .iter()
            .map(|p| crate::sphere::dot(p, w))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut directions: Vec<UnitVector> = body.signed_spikes().collect();
    directions.extend(sample_batch(body.dimension, sweep, seed)?);
    for w in &directions {
        let hk = support(body, w.coords());
        let hp = hull_support(w.coords());
        if hk > hp + 1e-12 {
            return Err(Error::InvalidSet(format!(
                "hull does not contain the body: h_K = {hk} > h_hull = {hp} on a sweep direction"
            )));
        }
    }
    let mut gauges = Vec::with_capacity(points.len());
    for p in points {
        gauges.push(gauge(body, p, opts)?.value);
    }
    Ok(ContainmentSumReport {
        sum: gauges.iter().sum(),
        point_count: points.len(),
        gauges,
        directions_checked: directions.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_has_regular_gram_matrix() {
        for d in [2, 3, 5, 9] {
            let dirs = simplex_directions(d);
            assert_eq!(dirs.len(), d + 1);
            for (i, a) in dirs.iter().enumerate() {
                for (j, b) in dirs.iter().enumerate() {
                    let dot = a.dot(b);
                    let expect = if i == j { 1.0 } else { -1.0 / d as f64 };
                    assert!((dot - expect).abs() < 1e-12, "d={d} ({i},{j}): {dot}");
                }
            }
        }
    }

    #[test]
    fn simplex_pierces_every_open_hemisphere() {
        for d in [2, 3, 4] {
            let dirs = simplex_directions(d);
            let mut rng = SeedSpec::new(3, 0).rng();
            for _ in 0..500 {
                let u = crate::sphere::sample_uniform_with(d, &mut rng);
                let best = dirs.iter().map(|v| v.dot(&u)).fold(f64::NEG_INFINITY, f64::max);
                assert!(best > 0.0, "open hemisphere at {u:?} misses all vertices");
            }
        }
    }

    #[test]
    fn cross_polytope_containment_sum_is_2n_sqrt_n() {
        for n in [3_usize, 4, 5] {
            let ball = SpikyBody::unit_ball(n);
            let mut pts = Vec::new();
            let r = (n as f64).sqrt();
            for i in 0..n {
                let mut plus = vec![0.0; n];
                plus[i] = r;
                let mut minus = vec![0.0; n];
                minus[i] = -r;
                pts.push(plus);
                pts.push(minus);
            }
            let report =
                containment_sum(&ball, &pts, 2_000, SeedSpec::new(31, 0), &OracleOpts::fast())
                    .unwrap();
            let expect = 2.0 * (n as f64).powf(1.5);
            assert!(
                (report.sum - expect).abs() <= 1e-9 * expect,
                "n={n}: sum {} vs {expect}",
                report.sum
            );
        }
    }

    #[test]
    fn containment_rejects_too_small_hull() {
        let ball = SpikyBody::unit_ball(3);
        // cross-polytope at radius 1 does NOT contain the ball
        let mut pts = Vec::new();
        for i in 0..3 {
            let mut plus = vec![0.0; 3];
            plus[i] = 1.0;
            let mut minus = vec![0.0; 3];
            minus[i] = -1.0;
            pts.push(plus);
            pts.push(minus);
        }
        assert!(matches!(
            containment_sum(&ball, &pts, 500, SeedSpec::new(32, 0), &OracleOpts::fast()),
            Err(Error::InvalidSet(_))
        ));
    }

    #[test]
    fn illumination_sum_validates_and_errors() {
        // d=2 spiky body with spike e1, D=1.3: scaled cover directions as
        // point sources
        let body = SpikyBody::from_unit_points(
            2,
            vec![UnitVector::standard_basis(2, 0)],
            1.3,
        )
        .unwrap();
        let scale = 50.0;
        let quarter = |k: u64| {
            let a = k as f64 * std::f64::consts::FRAC_PI_2;
            vec![-scale * a.cos(), -scale * a.sin()]
        };
        let pts: Vec<Vec<f64>> = (0..4).map(quarter).collect();
        let report = illumination_parameter_sum(&body, &pts, &OracleOpts::fast()).unwrap();
        assert_eq!(report.point_count, 4);
        assert!(report.sum >= report.point_count as f64, "gauges exceed 1 outside the body");

        // empty set errors
        assert!(matches!(
            illumination_parameter_sum(&body, &[], &OracleOpts::fast()),
            Err(Error::InvalidSet(_))
        ));
        // a set that misses the +e1 spike errors with a witness
        let bad = vec![vec![50.0, 0.0]]; // only illuminates -e1, not +e1
        assert!(matches!(
            illumination_parameter_sum(&body, &bad, &OracleOpts::fast()),
            Err(Error::InvalidSet(_))
        ));
    }
}

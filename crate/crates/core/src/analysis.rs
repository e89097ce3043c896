//! Velocity extraction from ensemble-averaged entropy series and OTOC fields.

use crate::gate::{Boundary, EntropyUnit};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityFit {
    pub velocity: f64,
    pub intercept: f64,
    /// Inclusive range of layers entering the fit.
    pub window: (usize, usize),
    pub points: usize,
    pub residual_rms: f64,
    /// Standard error of the slope from the OLS residuals.
    pub stderr: f64,
    /// Decreasing steps of the fitted series (only tracked for fronts).
    pub monotonicity_violations: usize,
    pub policy_id: String,
}

/// Ordinary least squares through `(t, y)` pairs.
fn ols(points: &[(f64, f64)]) -> Result<(f64, f64, f64, f64)> {
    let m = points.len();
    if m < 2 {
        return Err(Error::Fit(format!("need at least 2 points, got {m}")));
    }
    let mf = m as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / mf;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / mf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("degenerate abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_t;
    let ssr: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let rms = (ssr / mf).sqrt();
    let stderr = if m > 2 { (ssr / (mf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok((slope, intercept, rms, stderr))
}

fn fit_points(series: &[f64], keep: impl Fn(usize, f64) -> bool, min_points: usize) -> Result<Vec<(f64, f64)>> {
    let points: Vec<(f64, f64)> =
        series.iter().enumerate().filter(|&(t, &y)| keep(t, y)).map(|(t, &y)| (t as f64, y)).collect();
    if points.len() < min_points {
        return Err(Error::Fit(format!("fit window holds {} points, need {min_points}", points.len())));
    }
    Ok(points)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyFitPolicy {
    /// Trailing fraction of the series averaged into the saturation value.
    pub tail_fraction: f64,
    pub lower: f64,
    pub upper: f64,
    /// Largest allowed drift between the two halves of the tail, in bits.
    pub plateau_tolerance_bits: f64,
    pub min_points: usize,
}

impl Default for EntropyFitPolicy {
    fn default() -> Self {
        Self { tail_fraction: 0.2, lower: 0.1, upper: 0.6, plateau_tolerance_bits: 1.0, min_points: 5 }
    }
}

impl EntropyFitPolicy {
    pub fn policy_id(&self) -> String {
        format!(
            "ve:tail{}:window{}-{}:ols",
            (self.tail_fraction * 100.0).round(),
            (self.lower * 100.0).round(),
            (self.upper * 100.0).round()
        )
    }

    fn tail_start(&self, len: usize) -> usize {
        let tail = ((len as f64) * self.tail_fraction).ceil().max(2.0) as usize;
        len.saturating_sub(tail)
    }
}

/// Saturation value and tail drift of a series. `None` when the series is
/// too short for a two-half tail comparison.
pub fn saturation(series: &[f64], policy: &EntropyFitPolicy) -> Option<(f64, f64)> {
    if series.len() < 4 {
        return None;
    }
    let tail = &series[policy.tail_start(series.len())..];
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let half = tail.len() / 2;
    Some((mean(tail), (mean(&tail[..half]) - mean(&tail[half..])).abs()))
}

/// True when the tail is flat and the series reached it well before the
/// tail began, so the tail average is a clean saturation value.
pub fn plateau_reached(series: &[f64], unit: EntropyUnit, policy: &EntropyFitPolicy, margin: usize) -> bool {
    let Some((s_sat, drift)) = saturation(series, policy) else {
        return false;
    };
    let bit = unit.per_bit();
    if drift >= policy.plateau_tolerance_bits * bit {
        return false;
    }
    let t_sat = series.iter().position(|&s| s >= s_sat - bit);
    matches!(t_sat, Some(t) if t + margin <= policy.tail_start(series.len()))
}

/// Slope of the linear growth regime of `series` (entropy per layer in the
/// series' units).
pub fn fit_entanglement_velocity(series: &[f64], unit: EntropyUnit, policy: &EntropyFitPolicy) -> Result<VelocityFit> {
    let (s_sat, drift) = saturation(series, policy).ok_or_else(|| Error::Fit("series too short".into()))?;
    if drift >= policy.plateau_tolerance_bits * unit.per_bit() {
        return Err(Error::Fit(format!("no saturation detected (tail drift {drift:.3})")));
    }
    if s_sat <= 0.0 {
        return Err(Error::Fit("no entropy growth".into()));
    }
    let (lo, hi) = (policy.lower * s_sat, policy.upper * s_sat);
    // only the first passage through the window is growth
    let end = series.iter().position(|&s| s > hi).unwrap_or(series.len());
    let points = fit_points(&series[..end], |_, s| s >= lo && s <= hi, policy.min_points)?;
    let (velocity, intercept, residual_rms, stderr) = ols(&points)?;
    Ok(VelocityFit {
        velocity,
        intercept,
        window: (points[0].0 as usize, points[points.len() - 1].0 as usize),
        points: points.len(),
        residual_rms,
        stderr,
        monotonicity_violations: 0,
        policy_id: policy.policy_id(),
    })
}

/// Averaged OTOC values, one row of `n_sites` entries per layer.
#[derive(Clone, Debug, PartialEq)]
pub struct OtocField {
    pub n_sites: usize,
    pub rows: Vec<Vec<f64>>,
}

impl OtocField {
    pub fn new(n_sites: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.iter().any(|r| r.len() != n_sites) {
            return Err(Error::Fit("ragged OTOC field".into()));
        }
        Ok(Self { n_sites, rows })
    }

    pub fn max(&self) -> f64 {
        self.rows.iter().flatten().copied().fold(0.0, f64::max)
    }
}

/// Front distance per layer: the farthest site from `center` on each side
/// with `C >= threshold`, the two sides averaged.
pub fn extract_front(field: &OtocField, center: usize, boundary: Boundary, threshold: f64) -> Result<Vec<f64>> {
    let n = field.n_sites;
    if center >= n {
        return Err(Error::SiteOutOfRange { site: center, n });
    }
    if threshold <= 0.0 || threshold > field.max() {
        return Err(Error::Fit(format!("threshold {threshold} outside (0, {}]", field.max())));
    }
    let (reach_right, reach_left) = match boundary {
        Boundary::Periodic => (n / 2, n / 2),
        Boundary::Open => (n - 1 - center, center),
    };
    let front = field
        .rows
        .iter()
        .map(|row| {
            let right = (0..=reach_right).rev().find(|&d| row[(center + d) % n] >= threshold).unwrap_or(0);
            let left = (0..=reach_left).rev().find(|&d| row[(center + n - d) % n] >= threshold).unwrap_or(0);
            (right + left) as f64 / 2.0
        })
        .collect();
    Ok(front)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontFitPolicy {
    pub threshold: f64,
    pub min_distance: f64,
    /// Upper end of the fit window as a fraction of the chain length.
    pub max_fraction: f64,
    pub min_points: usize,
}

impl Default for FrontFitPolicy {
    fn default() -> Self {
        Self { threshold: 0.1, min_distance: 5.0, max_fraction: 0.4, min_points: 5 }
    }
}

impl FrontFitPolicy {
    pub fn policy_id(&self) -> String {
        format!("vb:c{}:d{}-{}N:outermost:ols", self.threshold, self.min_distance, self.max_fraction)
    }
}

/// Slope of the front trajectory in sites per layer.
pub fn fit_butterfly_velocity(front: &[f64], n_sites: usize, policy: &FrontFitPolicy) -> Result<VelocityFit> {
    let hi = policy.max_fraction * n_sites as f64;
    let points = fit_points(front, |_, d| d >= policy.min_distance && d <= hi, policy.min_points)?;
    let (first, last) = (points[0].0 as usize, points[points.len() - 1].0 as usize);
    let monotonicity_violations = front[first..=last].windows(2).filter(|w| w[1] < w[0]).count();
    let (velocity, intercept, residual_rms, stderr) = ols(&points)?;
    Ok(VelocityFit {
        velocity,
        intercept,
        window: (first, last),
        points: points.len(),
        residual_rms,
        stderr,
        monotonicity_violations,
        policy_id: policy.policy_id(),
    })
}

pub const SENSITIVITY_THRESHOLDS: [f64; 4] = [0.1, 0.2, 0.3, 0.4];

/// `v_B` refitted at each threshold, so the dependence on `c*` is visible.
pub fn threshold_sensitivity(
    field: &OtocField,
    center: usize,
    boundary: Boundary,
    policy: &FrontFitPolicy,
    thresholds: &[f64],
) -> Vec<(f64, Result<VelocityFit>)> {
    thresholds
        .iter()
        .map(|&c| {
            let p = FrontFitPolicy { threshold: c, ..*policy };
            let fit =
                extract_front(field, center, boundary, c).and_then(|d| fit_butterfly_velocity(&d, field.n_sites, &p));
            (c, fit)
        })
        .collect()
}

/// One block's contribution to the correlation report.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub block_name: String,
    pub n: usize,
    pub gamma: f64,
    pub wp: usize,
    pub v_e: Option<VelocityFit>,
    pub v_b: Option<VelocityFit>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationReport {
    pub velocities_csv: String,
    pub ve_gamma_csv: String,
    pub vb_wp_csv: String,
    /// Blocks without both fits; left out of the tables.
    pub missing: Vec<String>,
    /// Pairs `(a, b)` with `v_E(a) < v_E(b)` but `v_B(a) > v_B(b)`.
    pub inversions: Vec<(String, String)>,
}

pub fn descriptor_correlation_report(rows: &[ReportRow]) -> CorrelationReport {
    let mut velocities = String::from("block_name,n,v_E,v_E_stderr,v_B,v_B_stderr,gamma,wp,policy_id\n");
    let mut ve_gamma = String::from("block_name,n,gamma,v_E\n");
    let mut vb_wp = String::from("block_name,n,wp,v_B\n");
    let mut missing = Vec::new();
    let mut complete = Vec::new();
    for row in rows {
        let (Some(ve), Some(vb)) = (&row.v_e, &row.v_b) else {
            missing.push(row.block_name.clone());
            continue;
        };
        velocities.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}|{}\n",
            row.block_name,
            row.n,
            ve.velocity,
            ve.stderr,
            vb.velocity,
            vb.stderr,
            row.gamma,
            row.wp,
            ve.policy_id,
            vb.policy_id
        ));
        ve_gamma.push_str(&format!("{},{},{},{}\n", row.block_name, row.n, row.gamma, ve.velocity));
        vb_wp.push_str(&format!("{},{},{},{}\n", row.block_name, row.n, row.wp, vb.velocity));
        complete.push((row.block_name.clone(), ve.velocity, vb.velocity));
    }
    let mut inversions = Vec::new();
    for a in &complete {
        for b in &complete {
            if a.1 < b.1 && a.2 > b.2 {
                inversions.push((a.0.clone(), b.0.clone()));
            }
        }
    }
    CorrelationReport { velocities_csv: velocities, ve_gamma_csv: ve_gamma, vb_wp_csv: vb_wp, missing, inversions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn capped(v: f64, cap: f64, len: usize) -> Vec<f64> {
        (0..len).map(|t| (v * t as f64).min(cap)).collect()
    }

    #[test]
    fn exact_linear_series() {
        let fit = fit_entanglement_velocity(&capped(0.5, 100.0, 600), EntropyUnit::Bits, &Default::default()).unwrap();
        assert!((fit.velocity - 0.5).abs() < 1e-9);
        assert!(fit.points >= 5);
        assert_eq!(fit.policy_id, "ve:tail20:window10-60:ols");
    }

    #[test]
    fn constant_and_short_series_fail() {
        let p = EntropyFitPolicy::default();
        assert!(fit_entanglement_velocity(&[3.0; 100], EntropyUnit::Bits, &p).is_err());
        assert!(fit_entanglement_velocity(&[0.0, 1.0], EntropyUnit::Bits, &p).is_err());
        // still growing: no plateau
        assert!(fit_entanglement_velocity(&capped(0.5, 1e9, 300), EntropyUnit::Bits, &p).is_err());
    }

    #[test]
    fn plateau_detection() {
        let p = EntropyFitPolicy::default();
        assert!(plateau_reached(&capped(0.5, 100.0, 600), EntropyUnit::Bits, &p, 20));
        assert!(!plateau_reached(&capped(0.5, 100.0, 240), EntropyUnit::Bits, &p, 20));
        assert!(!plateau_reached(&capped(0.5, 1e9, 600), EntropyUnit::Bits, &p, 20));
    }

    fn cone(v: f64, n: usize, layers: usize) -> OtocField {
        let center = n / 2;
        let rows = (0..=layers)
            .map(|t| {
                (0..n)
                    .map(|x| {
                        let d = (x as i64 - center as i64).unsigned_abs() as f64;
                        if d <= v * t as f64 {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        OtocField::new(n, rows).unwrap()
    }

    #[test]
    fn strict_cone_front() {
        let field = cone(2.0, 200, 30);
        let d = extract_front(&field, 100, Boundary::Periodic, 0.5).unwrap();
        assert_eq!(d[0], 0.0);
        for (t, &dt) in d.iter().enumerate().take(30) {
            assert_eq!(dt, (2 * t).min(100) as f64);
        }
        let fit = fit_butterfly_velocity(&d, 200, &Default::default()).unwrap();
        assert!((fit.velocity - 2.0).abs() < 1e-9);
        assert_eq!(fit.monotonicity_violations, 0);
        assert!(extract_front(&field, 100, Boundary::Periodic, 1.5).is_err());
        assert!(extract_front(&field, 100, Boundary::Periodic, 0.0).is_err());
    }

    #[test]
    fn open_front_stops_at_edges() {
        let field = cone(1.0, 20, 30);
        let d = extract_front(&field, 10, Boundary::Open, 0.5).unwrap();
        assert_eq!(d[30], (9.0 + 10.0) / 2.0);
    }

    #[test]
    fn sensitivity_covers_all_thresholds() {
        let field = cone(1.5, 200, 80);
        let s = threshold_sensitivity(&field, 100, Boundary::Periodic, &Default::default(), &SENSITIVITY_THRESHOLDS);
        assert_eq!(s.len(), 4);
        for (_, fit) in s {
            assert!((fit.unwrap().velocity - 1.5).abs() < 0.05);
        }
    }

    #[test]
    fn fits_are_pure() {
        let s = capped(0.3, 90.0, 700);
        let a = fit_entanglement_velocity(&s, EntropyUnit::Bits, &Default::default()).unwrap();
        let b = fit_entanglement_velocity(&s, EntropyUnit::Bits, &Default::default()).unwrap();
        assert_eq!(a.velocity.to_bits(), b.velocity.to_bits());
    }

    fn fit(name: &str, ve: f64, vb: f64) -> ReportRow {
        let vf = |v: f64| VelocityFit {
            velocity: v,
            intercept: 0.0,
            window: (0, 10),
            points: 11,
            residual_rms: 0.0,
            stderr: 0.01,
            monotonicity_violations: 0,
            policy_id: "p".into(),
        };
        ReportRow { block_name: name.into(), n: 6, gamma: 1.0, wp: 3, v_e: Some(vf(ve)), v_b: Some(vf(vb)) }
    }

    #[test]
    fn correlation_report() {
        let rows =
            vec![fit("g1", 0.522, 1.295), fit("g2", 0.573, 1.198), ReportRow { v_b: None, ..fit("g3", 0.1, 0.1) }];
        let r = descriptor_correlation_report(&rows);
        assert_eq!(r.velocities_csv.lines().count(), 3);
        assert_eq!(r.ve_gamma_csv.lines().count(), 3);
        assert_eq!(r.missing, vec!["g3".to_string()]);
        assert_eq!(r.inversions, vec![("g1".to_string(), "g2".to_string())]);
        let single = descriptor_correlation_report(&rows[..1]);
        assert_eq!(single.vb_wp_csv.lines().count(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn noisy_entropy_round_trip(v in 0.2f64..1.0, seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let cap = 100.0;
            let len = (cap / v * 1.6) as usize + 50;
            let series: Vec<f64> = (0..len)
                .map(|t| (v * t as f64).min(cap) + rng.random_range(-0.5..=0.5))
                .collect();
            let fit = fit_entanglement_velocity(&series, EntropyUnit::Bits, &Default::default()).unwrap();
            prop_assert!((fit.velocity - v).abs() <= 0.02 * v, "{} vs {}", fit.velocity, v);
        }

        #[test]
        fn noisy_front_round_trip(v in 0.3f64..2.0, seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 200;
            let layers = (0.45 * n as f64 / v) as usize + 5;
            let mut field = cone(v, n, layers);
            for row in &mut field.rows {
                for c in row.iter_mut() {
                    *c = (*c + rng.random_range(-0.05..=0.05)).clamp(0.0, 1.0);
                }
            }
            let d = extract_front(&field, n / 2, Boundary::Periodic, 0.2).unwrap();
            let fit = fit_butterfly_velocity(&d, n, &Default::default()).unwrap();
            prop_assert!((fit.velocity - v).abs() <= 0.02 * v, "{} vs {}", fit.velocity, v);
        }
    }
}

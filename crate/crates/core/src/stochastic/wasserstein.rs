use super::distribution::LatencyDistribution;

/// Quantile points used when the two sample sets differ in size.
pub const QUANTILE_GRID: usize = 1000;

/// 1-D Wasserstein-1 distance after scaling both sample sets by their joint
/// min and max, so the result lies in `[0, 1]`.
pub fn wasserstein(a: &LatencyDistribution, b: &LatencyDistribution) -> f64 {
    let (xa, xb) = (a.sorted(), b.sorted());
    let lo = xa[0].min(xb[0]);
    let hi = xa[xa.len() - 1].max(xb[xb.len() - 1]);
    let span = hi - lo;
    if span <= 0.0 {
        return 0.0;
    }
    let raw = if xa.len() == xb.len() {
        xa.iter().zip(xb).map(|(p, q)| (p - q).abs()).sum::<f64>() / xa.len() as f64
    } else {
        (0..QUANTILE_GRID)
            .map(|i| {
                let p = (i as f64 + 0.5) / QUANTILE_GRID as f64;
                (quantile(xa, p) - quantile(xb, p)).abs()
            })
            .sum::<f64>()
            / QUANTILE_GRID as f64
    };
    (raw / span).clamp(0.0, 1.0)
}

/// Left-continuous inverse of the empirical CDF.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let k = (p * n as f64).ceil().max(1.0) as usize;
    sorted[k.min(n) - 1]
}

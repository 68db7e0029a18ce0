use super::special::{f_sf, normal_quantile, normal_sf};
use super::{StatTestResult, StatsError};

const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
const G: [f64; 2] = [-2.273, 0.459];

fn poly(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Shapiro–Wilk W with Royston's (1995) coefficient and p-value
/// approximations, valid for 3 ≤ n ≤ 5000.
pub fn shapiro_wilk(sample: &[f64]) -> Result<StatTestResult, StatsError> {
    let n = sample.len();
    if !(3..=5000).contains(&n) {
        return Err(StatsError::SampleSize { min: 3, max: 5000, got: n });
    }
    if let Some(v) = sample.iter().find(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite(*v));
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if range < 1e-19 * x[0].abs().max(1.0) {
        return Err(StatsError::ZeroVariance);
    }

    let half = n / 2;
    let nf = n as f64;
    // a[i] pairs with x[n-1-i] (and -a[i] with x[i])
    let mut a = vec![0.0; half];
    if n == 3 {
        a[0] = std::f64::consts::FRAC_1_SQRT_2;
    } else {
        let an25 = nf + 0.25;
        let m: Vec<f64> = (1..=half)
            .map(|i| normal_quantile((i as f64 - 0.375) / an25))
            .collect();
        let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
        let ssumm2 = summ2.sqrt();
        let rsn = 1.0 / nf.sqrt();
        let a1 = poly(&C1, rsn) - m[0] / ssumm2;
        let (first, fac) = if n > 5 {
            let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
            let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
                / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
                .sqrt();
            a[1] = a2;
            (2, fac)
        } else {
            let fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
            (1, fac)
        };
        a[0] = a1;
        for i in first..half {
            a[i] = -m[i] / fac;
        }
    }

    // W as the squared correlation between the data and the coefficients
    let coef = |i: usize| -> f64 {
        if i < half {
            -a[i]
        } else if n % 2 == 1 && i == half {
            0.0
        } else {
            a[n - 1 - i]
        }
    };
    let xs: Vec<f64> = x.iter().map(|v| v / range).collect();
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_a = (0..n).map(coef).sum::<f64>() / nf;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (i, xi) in xs.iter().enumerate() {
        let da = coef(i) - mean_a;
        let dx = xi - mean_x;
        ssa += da * da;
        ssx += dx * dx;
        sax += da * dx;
    }
    let ssassx = (ssa * ssx).sqrt();
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    let w = 1.0 - w1;

    let p_value = if n == 3 {
        let pi6 = 6.0 / std::f64::consts::PI;
        let stqr = std::f64::consts::PI / 3.0;
        (pi6 * (w.sqrt().asin() - stqr)).max(0.0)
    } else {
        let mut y = w1.ln();
        let (mean, sd) = if n <= 11 {
            let gamma = poly(&G, nf);
            if y >= gamma {
                return Ok(sw_result(w, 1e-99));
            }
            y = -(gamma - y).ln();
            (poly(&C3, nf), poly(&C4, nf).exp())
        } else {
            let ln_n = nf.ln();
            (poly(&C5, ln_n), poly(&C6, ln_n).exp())
        };
        normal_sf((y - mean) / sd)
    };
    Ok(sw_result(w, p_value.clamp(0.0, 1.0)))
}

fn sw_result(w: f64, p_value: f64) -> StatTestResult {
    StatTestResult {
        test_name: "shapiro_wilk".into(),
        statistic: w,
        df: Vec::new(),
        p_value,
        pairwise: None,
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Brown–Forsythe form of Levene's test: one-way ANOVA on absolute
/// deviations from each group's median. When every deviation equals its
/// group mean the statistic is 0 (p = 1) if the group means agree too.
pub fn levene(groups: &[Vec<f64>]) -> Result<StatTestResult, StatsError> {
    let k = groups.len();
    if k < 2 {
        return Err(StatsError::TooFewGroups(k));
    }
    if let Some(g) = groups.iter().find(|g| g.len() < 2) {
        return Err(StatsError::TooFewValues { needed: 2, got: g.len() });
    }
    if let Some(v) = groups.iter().flatten().find(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite(*v));
    }
    let deviations: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            let mut s = g.clone();
            s.sort_by(f64::total_cmp);
            let med = median(&s);
            g.iter().map(|v| (v - med).abs()).collect()
        })
        .collect();
    let total: usize = deviations.iter().map(Vec::len).sum();
    let grand = deviations.iter().flatten().sum::<f64>() / total as f64;
    let mut between = 0.0;
    let mut within = 0.0;
    for d in &deviations {
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        between += d.len() as f64 * (mean - grand).powi(2);
        within += d.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    }
    let (d1, d2) = ((k - 1) as f64, (total - k) as f64);
    let (statistic, p_value) = if within == 0.0 {
        if between == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = (d2 / d1) * between / within;
        (f, f_sf(f, d1, d2).clamp(0.0, 1.0))
    };
    Ok(StatTestResult {
        test_name: "levene".into(),
        statistic,
        df: vec![d1, d2],
        p_value,
        pairwise: None,
    })
}

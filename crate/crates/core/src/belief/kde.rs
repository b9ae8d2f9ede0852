//! Weighted Gaussian KDE mode search.
//!
//! Density is computed on a linearly binned grid and read back at the
//! sample locations, so cost is `O(n + grid * kernel)` instead of `O(n^2)`.

/// Particles lighter than this fraction of the heaviest one are ignored as
/// kernel sources.
const NEGLIGIBLE: f64 = 1e-12;
const MAX_GRID: usize = 4096;
const CELLS_PER_BANDWIDTH: f64 = 16.0;
const KERNEL_REACH: f64 = 5.0;

/// Weighted Silverman rule: `1.06 * sd * n_eff^(-1/5)`.
pub fn silverman_bandwidth(xs: &[f64], ws: &[f64]) -> f64 {
    let total: f64 = ws.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mean = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / total;
    let var = xs.iter().zip(ws).map(|(x, w)| w * (x - mean).powi(2)).sum::<f64>() / total;
    let sq: f64 = ws.iter().map(|w| w * w).sum();
    let n_eff = total * total / sq;
    1.06 * var.sqrt() * n_eff.powf(-0.2)
}

/// Index of the sample at which the weighted KDE of `xs` peaks.
/// Ties go to the lowest index.
pub fn kde_mode_index(xs: &[f64], ws: &[f64]) -> usize {
    debug_assert_eq!(xs.len(), ws.len());
    let heaviest = (0..ws.len()).max_by(|&a, &b| ws[a].total_cmp(&ws[b]).then(b.cmp(&a))).unwrap_or(0);
    let max_w = ws[heaviest];
    if max_w <= 0.0 {
        return 0;
    }
    let floor = max_w * NEGLIGIBLE;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, w) in xs.iter().zip(ws) {
        if *w >= floor {
            lo = lo.min(*x);
            hi = hi.max(*x);
        }
    }
    let h = silverman_bandwidth(xs, ws);
    if !(h > 0.0) || hi <= lo {
        return heaviest;
    }

    let reach = KERNEL_REACH * h;
    let start = lo - reach;
    let span = hi - lo + 2.0 * reach;
    let cells = ((span / h * CELLS_PER_BANDWIDTH).ceil() as usize).clamp(16, MAX_GRID);
    let dx = span / (cells - 1) as f64;

    let mut binned = vec![0.0; cells];
    for (x, w) in xs.iter().zip(ws) {
        if *w < floor {
            continue;
        }
        let pos = (x - start) / dx;
        let i = (pos.floor() as usize).min(cells - 2);
        let frac = pos - i as f64;
        binned[i] += w * (1.0 - frac);
        binned[i + 1] += w * frac;
    }

    let half = ((reach / dx).ceil() as usize).max(1);
    let kernel: Vec<f64> = (0..=half)
        .map(|k| {
            let z = k as f64 * dx / h;
            (-0.5 * z * z).exp()
        })
        .collect();
    let mut density = vec![0.0; cells];
    for (i, &b) in binned.iter().enumerate() {
        if b == 0.0 {
            continue;
        }
        let from = i.saturating_sub(half);
        let to = (i + half).min(cells - 1);
        for (j, d) in density.iter_mut().enumerate().take(to + 1).skip(from) {
            *d += b * kernel[i.abs_diff(j)];
        }
    }

    let mut best = heaviest;
    let mut best_density = f64::NEG_INFINITY;
    for (idx, x) in xs.iter().enumerate() {
        let pos = (x - start) / dx;
        if pos < 0.0 || pos > (cells - 1) as f64 {
            continue;
        }
        let i = (pos.floor() as usize).min(cells - 2);
        let frac = pos - i as f64;
        let d = density[i] * (1.0 - frac) + density[i + 1] * frac;
        if d > best_density {
            best_density = d;
            best = idx;
        }
    }
    best
}

//! Box-clamped Nelder–Mead simplex descent.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadConfig {
    pub max_iter: usize,
    /// Stop when the simplex diameter falls below this.
    pub xtol: f64,
    /// Stop when the spread of vertex values falls below this.
    pub ftol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Every evaluated point with its value, in evaluation order.
    pub trace: Vec<(Vec<f64>, f64)>,
}

fn clamp(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(*lo, *hi);
    }
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b - a)
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Minimizes `f` from `x0`; every trial point is clamped into `[lower, upper]`.
///
/// A non-finite value stops the search at once; it is the last trace entry.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: &[f64],
    lower: &[f64],
    upper: &[f64],
    cfg: &NelderMeadConfig,
) -> SimplexOutcome {
    let n = x0.len();
    let mut trace = Vec::new();
    let mut eval = |x: Vec<f64>, trace: &mut Vec<(Vec<f64>, f64)>| {
        let v = f(&x);
        trace.push((x.clone(), v));
        (x, v)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut start = x0.to_vec();
    clamp(&mut start, lower, upper);
    simplex.push(eval(start.clone(), &mut trace));
    for i in 0..n {
        let mut x = start.clone();
        // step inward when the start sits on the upper face
        x[i] = if x[i] + step[i] <= upper[i] {
            x[i] + step[i]
        } else {
            x[i] - step[i]
        };
        clamp(&mut x, lower, upper);
        simplex.push(eval(x, &mut trace));
    }
    let stop = |trace: &Vec<(Vec<f64>, f64)>| trace.last().is_some_and(|e| !e.1.is_finite());

    let mut iterations = 0;
    while iterations < cfg.max_iter && !stop(&trace) {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= cfg.ftol && diameter <= cfg.xtol {
            break;
        }
        if diameter <= cfg.xtol * 1e-3 {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let mut xr = affine(&centroid, &worst.0, -1.0);
        clamp(&mut xr, lower, upper);
        let r = eval(xr, &mut trace);
        if stop(&trace) {
            break;
        }
        if r.1 < simplex[0].1 {
            let mut xe = affine(&centroid, &worst.0, -2.0);
            clamp(&mut xe, lower, upper);
            let e = eval(xe, &mut trace);
            if stop(&trace) {
                break;
            }
            simplex[n] = if e.1 < r.1 { e } else { r };
            continue;
        }
        if r.1 < simplex[n - 1].1 {
            simplex[n] = r;
            continue;
        }
        let (xc, threshold) = if r.1 < worst.1 {
            (affine(&centroid, &r.0, 0.5), r.1)
        } else {
            (affine(&centroid, &worst.0, 0.5), worst.1)
        };
        let c = eval(xc, &mut trace);
        if stop(&trace) {
            break;
        }
        if c.1 < threshold {
            simplex[n] = c;
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            *vertex = eval(affine(&best, &vertex.0, 0.5), &mut trace);
            if !vertex.1.is_finite() {
                break;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = if stop(&trace) {
        trace.last().cloned().unwrap()
    } else {
        simplex[0].clone()
    };
    SimplexOutcome {
        x,
        value,
        iterations,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CFG: NelderMeadConfig = NelderMeadConfig {
        max_iter: 500,
        xtol: 1e-10,
        ftol: 1e-14,
    };

    #[test]
    fn finds_quadratic_minimum() {
        let out = nelder_mead(
            |x| (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.1).powi(2),
            &[0.0, 0.0],
            &[0.1, 0.1],
            &[-1.0, -1.0],
            &[1.0, 1.0],
            &CFG,
        );
        assert!(
            (out.x[0] - 0.3).abs() < 1e-6 && (out.x[1] + 0.1).abs() < 1e-6,
            "{:?}",
            out.x
        );
    }

    #[test]
    fn respects_the_box() {
        let out = nelder_mead(|x| (x[0] - 5.0).powi(2), &[0.5], &[0.1], &[0.0], &[1.0], &CFG);
        assert!((out.x[0] - 1.0).abs() < 1e-8);
        assert!(out.trace.iter().all(|(x, _)| x[0] <= 1.0 && x[0] >= 0.0));
    }

    #[test]
    fn stops_on_non_finite() {
        let out = nelder_mead(
            |x| if x[0] > 0.55 { f64::NAN } else { -x[0] },
            &[0.5],
            &[0.1],
            &[0.0],
            &[1.0],
            &CFG,
        );
        assert!(!out.value.is_finite());
        assert!(!out.trace.last().unwrap().1.is_finite());
    }
}

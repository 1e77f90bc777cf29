//! Small deterministic optimizers shared by the axis search and the
//! discord minimizer: a Nelder-Mead simplex and a Fibonacci sphere lattice.

/// Nelder-Mead minimization with a fixed, seedless start simplex.
///
/// Converges when the simplex collapses below `tol` in both function value
/// spread and vertex spread, or after `max_iter` reflections.
pub(crate) fn nelder_mead<F>(
    f: F,
    start: &[f64],
    initial_step: f64,
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let spread = values[worst] - values[best];
        let geom: f64 = (0..n)
            .map(|d| {
                simplex
                    .iter()
                    .map(|v| (v[d] - simplex[best][d]).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.abs() < tol && geom < tol.sqrt() {
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for (i, v) in simplex.iter().enumerate() {
            if i == worst {
                continue;
            }
            for d in 0..n {
                centroid[d] += v[d] / n as f64;
            }
        }

        let blend = |from: &[f64], towards: &[f64], factor: f64| -> Vec<f64> {
            (0..n)
                .map(|d| from[d] + factor * (towards[d] - from[d]))
                .collect()
        };

        let reflected = blend(&centroid, &simplex[worst], -alpha);
        let fr = f(&reflected);
        if fr < values[best] {
            let expanded = blend(&centroid, &simplex[worst], -gamma);
            let fe = f(&expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            let contracted = blend(&centroid, &simplex[worst], rho);
            let fc = f(&contracted);
            if fc < values[worst] {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                let best_point = simplex[best].clone();
                for i in 0..=n {
                    if i == best {
                        continue;
                    }
                    simplex[i] = blend(&best_point, &simplex[i], sigma);
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..values.len() {
        if values[i] < values[best] {
            best = i;
        }
    }
    (simplex[best].clone(), values[best])
}

/// Deterministic near-uniform unit vectors from the golden-angle spiral.
pub(crate) fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let n = count.max(2);
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden_angle * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

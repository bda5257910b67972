//! Derivative-free Nelder–Mead simplex minimizer.

pub(crate) struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) struct NelderMead {
    pub max_iter: usize,
    /// Convergence when the largest vertex distance (sup norm) from the best
    /// vertex falls below this.
    pub diameter_tol: f64,
    pub initial_step: f64,
}

impl NelderMead {
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> NelderMeadResult {
        let dim = x0.len();
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        simplex.push(x0.to_vec());
        for i in 0..dim {
            let mut x = x0.to_vec();
            x[i] += self.initial_step;
            simplex.push(x);
        }
        let mut values: Vec<f64> = simplex.iter().map(|x| sanitize(f(x))).collect();

        let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
        let mut iterations = 0;
        let mut converged = false;

        while iterations < self.max_iter {
            let mut order: Vec<usize> = (0..=dim).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            if diameter(&simplex) < self.diameter_tol {
                converged = true;
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; dim];
            for x in &simplex[..dim] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / dim as f64;
                }
            }
            let worst = simplex[dim].clone();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let xr = along(alpha);
            let fr = sanitize(f(&xr));
            if fr < values[0] {
                let xe = along(gamma);
                let fe = sanitize(f(&xe));
                if fe < fr {
                    simplex[dim] = xe;
                    values[dim] = fe;
                } else {
                    simplex[dim] = xr;
                    values[dim] = fr;
                }
                continue;
            }
            if fr < values[dim - 1] {
                simplex[dim] = xr;
                values[dim] = fr;
                continue;
            }
            let (xc, fc) = if fr < values[dim] {
                let xc = along(rho);
                let fc = sanitize(f(&xc));
                (xc, fc)
            } else {
                let xc = along(-rho);
                let fc = sanitize(f(&xc));
                (xc, fc)
            };
            if fc < fr.min(values[dim]) {
                simplex[dim] = xc;
                values[dim] = fc;
                continue;
            }
            // shrink toward the best vertex
            let best = simplex[0].clone();
            for k in 1..=dim {
                for (x, b) in simplex[k].iter_mut().zip(&best) {
                    *x = b + sigma * (*x - b);
                }
                values[k] = sanitize(f(&simplex[k]));
            }
        }

        let best = (0..=dim)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
            .unwrap_or(0);
        NelderMeadResult {
            x: simplex[best].clone(),
            fx: values[best],
            iterations,
            converged,
        }
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let best = &simplex[0];
    simplex[1..]
        .iter()
        .flat_map(|x| x.iter().zip(best).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

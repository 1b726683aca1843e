//! Derivative-free minimization (Nelder-Mead).

/// Standard Nelder-Mead with reflection 1, expansion 2, contraction ½ and
/// shrink ½.
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub max_iterations: usize,
    /// Converged once `max f − min f` over the simplex drops below this.
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

struct Vertex {
    x: Vec<f64>,
    f: f64,
}

impl NelderMead {
    /// Minimizes `f` starting from the axis-aligned simplex `x0`,
    /// `x0 + steps[i]·e_i`. Non-finite objective values are treated as `+∞`.
    pub fn minimize<F>(&self, mut f: F, x0: &[f64], steps: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        assert_eq!(x0.len(), steps.len());
        let dim = x0.len();
        let mut evaluations = 0usize;
        let mut eval = |x: &[f64]| {
            evaluations += 1;
            let v = f(x);
            if v.is_nan() { f64::INFINITY } else { v }
        };

        let mut simplex: Vec<Vertex> = Vec::with_capacity(dim + 1);
        simplex.push(Vertex {
            x: x0.to_vec(),
            f: eval(x0),
        });
        for (i, step) in steps.iter().enumerate() {
            let mut x = x0.to_vec();
            x[i] += step;
            let f = eval(&x);
            simplex.push(Vertex { x, f });
        }

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iterations {
            // Stable sort keeps earlier vertices first on ties.
            simplex.sort_by(|p, q| p.f.total_cmp(&q.f));
            let best = simplex[0].f;
            let worst = simplex[dim].f;
            if (worst - best).abs() < self.tolerance {
                converged = true;
                break;
            }
            iterations += 1;

            let centroid: Vec<f64> = (0..dim)
                .map(|j| simplex[..dim].iter().map(|v| v.x[j]).sum::<f64>() / dim as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[dim].x)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let xr = along(1.0);
            let fr = eval(&xr);
            if fr < simplex[0].f {
                let xe = along(2.0);
                let fe = eval(&xe);
                simplex[dim] = if fe < fr {
                    Vertex { x: xe, f: fe }
                } else {
                    Vertex { x: xr, f: fr }
                };
                continue;
            }
            if fr < simplex[dim - 1].f {
                simplex[dim] = Vertex { x: xr, f: fr };
                continue;
            }

            let (xc, fc) = if fr < simplex[dim].f {
                let xc = along(0.5);
                let fc = eval(&xc);
                (xc, if fc <= fr { fc } else { f64::INFINITY })
            } else {
                let xc = along(-0.5);
                let fc = eval(&xc);
                (xc, if fc < simplex[dim].f { fc } else { f64::INFINITY })
            };
            if fc.is_finite() {
                simplex[dim] = Vertex { x: xc, f: fc };
                continue;
            }

            let anchor = simplex[0].x.clone();
            for v in simplex.iter_mut().skip(1) {
                for (xi, ai) in v.x.iter_mut().zip(&anchor) {
                    *xi = ai + 0.5 * (*xi - ai);
                }
                v.f = eval(&v.x);
            }
        }

        simplex.sort_by(|p, q| p.f.total_cmp(&q.f));
        let best = simplex.swap_remove(0);
        Minimum {
            x: best.x,
            value: best.f,
            iterations,
            evaluations,
            converged,
        }
    }
}

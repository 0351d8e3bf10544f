//! Nelder-Mead downhill simplex (minimization).

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Stop once `max f - min f` over the simplex falls below this.
    pub f_spread: f64,
    pub max_evals: usize,
    pub initial_step: f64,
}

impl SimplexOptions {
    pub fn for_dim(dim: usize) -> Self {
        SimplexOptions {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            f_spread: 1e-10,
            max_evals: 5000 * dim.max(1),
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
}

pub fn minimize<F>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if n == 0 {
        let fx = eval(x0, &mut evals);
        return SimplexResult {
            x: Vec::new(),
            f: fx,
            evals,
        };
    }

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step;
        pts.push(p);
    }
    let mut fs: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();

    let mix = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    };

    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        fs = order.iter().map(|&i| fs[i]).collect();

        let spread = fs[n] - fs[0];
        if spread.abs() < opts.f_spread || (fs[0] == fs[n] && fs[0].is_infinite()) {
            break;
        }
        if evals >= opts.max_evals {
            break;
        }

        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / n as f64;
            }
        }
        let worst = pts[n].clone();

        let reflected = mix(&centroid, &worst, -opts.reflection);
        let fr = eval(&reflected, &mut evals);
        if fr < fs[0] {
            let expanded = mix(&centroid, &worst, -opts.expansion);
            let fe = eval(&expanded, &mut evals);
            if fe < fr {
                pts[n] = expanded;
                fs[n] = fe;
            } else {
                pts[n] = reflected;
                fs[n] = fr;
            }
            continue;
        }
        if fr < fs[n - 1] {
            pts[n] = reflected;
            fs[n] = fr;
            continue;
        }
        // outside contraction when the reflection beat the worst point
        let outside = fr < fs[n];
        let target = if outside { &reflected } else { &worst };
        let contracted = mix(&centroid, target, opts.contraction);
        let fc = eval(&contracted, &mut evals);
        let accept = if outside { fc <= fr } else { fc < fs[n] };
        if accept {
            pts[n] = contracted;
            fs[n] = fc;
            continue;
        }
        let best = pts[0].clone();
        for i in 1..=n {
            pts[i] = mix(&best, &pts[i], opts.shrink);
            fs[i] = eval(&pts[i], &mut evals);
        }
    }

    SimplexResult {
        x: pts.swap_remove(0),
        f: fs[0],
        evals,
    }
}

/// Budgeted Nelder-Mead simplex minimization.
///
/// Runs until `budget` objective evaluations are spent or the simplex
/// collapses below a small spread. Returns the best point, its value, and
/// the value of every evaluation in order (the outer-loop trace).
pub fn nelder_mead(
    mut objective: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    initial_step: f64,
    budget: usize,
) -> (Vec<f64>, f64, Vec<f64>) {
    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink
    const SPREAD_TOL: f64 = 1e-10;

    let dim = start.len();
    let mut trace = Vec::with_capacity(budget);
    let mut spent = 0usize;
    let mut eval = |x: &[f64], trace: &mut Vec<f64>, spent: &mut usize| -> f64 {
        let v = objective(x);
        trace.push(v);
        *spent += 1;
        v
    };

    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += initial_step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = Vec::with_capacity(dim + 1);
    for p in &simplex {
        if spent >= budget {
            break;
        }
        values.push(eval(p, &mut trace, &mut spent));
    }
    // Budget smaller than the initial simplex: report the best vertex seen.
    while values.len() < simplex.len() {
        simplex.pop();
    }

    while spent < budget && simplex.len() == dim + 1 {
        let mut order: Vec<usize> = (0..simplex.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        if (values[worst] - values[best]).abs() < SPREAD_TOL {
            break;
        }

        let mut centroid = vec![0.0; dim];
        for &idx in &order[..dim] {
            for d in 0..dim {
                centroid[d] += simplex[idx][d];
            }
        }
        centroid.iter_mut().for_each(|c| *c /= dim as f64);

        let reflect: Vec<f64> = (0..dim)
            .map(|d| centroid[d] + ALPHA * (centroid[d] - simplex[worst][d]))
            .collect();
        let reflect_value = eval(&reflect, &mut trace, &mut spent);

        if reflect_value < values[best] {
            if spent < budget {
                let expand: Vec<f64> = (0..dim)
                    .map(|d| centroid[d] + GAMMA * (reflect[d] - centroid[d]))
                    .collect();
                let expand_value = eval(&expand, &mut trace, &mut spent);
                if expand_value < reflect_value {
                    simplex[worst] = expand;
                    values[worst] = expand_value;
                    continue;
                }
            }
            simplex[worst] = reflect;
            values[worst] = reflect_value;
            continue;
        }

        if reflect_value < values[second_worst] {
            simplex[worst] = reflect;
            values[worst] = reflect_value;
            continue;
        }

        if spent >= budget {
            break;
        }
        let contract: Vec<f64> = (0..dim)
            .map(|d| centroid[d] + RHO * (simplex[worst][d] - centroid[d]))
            .collect();
        let contract_value = eval(&contract, &mut trace, &mut spent);
        if contract_value < values[worst] {
            simplex[worst] = contract;
            values[worst] = contract_value;
            continue;
        }

        // Shrink everything toward the best vertex.
        let anchor = simplex[best].clone();
        for idx in 0..simplex.len() {
            if idx == best {
                continue;
            }
            if spent >= budget {
                break;
            }
            for d in 0..dim {
                simplex[idx][d] = anchor[d] + SIGMA * (simplex[idx][d] - anchor[d]);
            }
            let shrunk = simplex[idx].clone();
            values[idx] = eval(&shrunk, &mut trace, &mut spent);
        }
    }

    let mut best_idx = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best_idx] {
            best_idx = i;
        }
    }
    (simplex[best_idx].clone(), values[best_idx], trace)
}

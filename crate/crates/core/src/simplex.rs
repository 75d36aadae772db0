//! Dense phase-one simplex for `A x = b, x >= 0`.
//!
//! Bland's rule keeps the pivot sequence finite on the degenerate systems
//! produced by marginal constraints, which are rank deficient.

const PIVOT_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct PhaseOne {
    /// Best point for the original variables.
    pub x: Vec<f64>,
    /// Optimal sum of artificial variables; zero iff the system is feasible.
    pub infeasibility: f64,
}

pub(crate) fn phase_one(a: &[Vec<f64>], b: &[f64]) -> PhaseOne {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let width = n + m + 1;
    let rhs_col = n + m;

    let mut tab = vec![vec![0.0; width]; m];
    for (i, row) in tab.iter_mut().enumerate() {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            row[j] = sign * a[i][j];
        }
        row[n + i] = 1.0;
        row[rhs_col] = sign * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // reduced costs of minimizing the artificial sum
    let mut cost = vec![0.0; width];
    for row in &tab {
        for j in 0..n {
            cost[j] -= row[j];
        }
        cost[rhs_col] -= row[rhs_col];
    }

    while let Some(enter) = (0..n + m).find(|&j| cost[j] < -PIVOT_EPS) {
        let mut leave: Option<usize> = None;
        for i in 0..m {
            let coef = tab[i][enter];
            if coef <= PIVOT_EPS {
                continue;
            }
            let ratio = tab[i][rhs_col] / coef;
            leave = match leave {
                None => Some(i),
                Some(l) => {
                    let best = tab[l][rhs_col] / tab[l][enter];
                    if ratio < best - PIVOT_EPS
                        || (ratio <= best + PIVOT_EPS && basis[i] < basis[l])
                    {
                        Some(i)
                    } else {
                        Some(l)
                    }
                }
            };
        }
        // phase one is bounded below by zero, so a column with a negative
        // reduced cost always has a positive entry
        let Some(leave) = leave else { break };

        let pivot = tab[leave][enter];
        for v in tab[leave].iter_mut() {
            *v /= pivot;
        }
        let pivot_row = tab[leave].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i == leave {
                continue;
            }
            let f = row[enter];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
        let f = cost[enter];
        for (v, p) in cost.iter_mut().zip(&pivot_row) {
            *v -= f * p;
        }
        basis[leave] = enter;
    }

    let mut x = vec![0.0; n];
    let mut infeasibility = 0.0;
    for (i, &var) in basis.iter().enumerate() {
        let value = tab[i][rhs_col].max(0.0);
        if var < n {
            x[var] = value;
        } else {
            infeasibility += value;
        }
    }
    PhaseOne { x, infeasibility }
}

use rand::Rng;

use crate::scalar::Scalar;

/// Stochastic ranking of `(tc, violation)` pairs; returns the new order as
/// indices into `keys`.
///
/// Up to `keys.len()` bubble sweeps. Adjacent entries are compared by cost
/// when both are feasible or with probability `pf`, otherwise by violation.
/// A sweep without swaps ends the procedure.
pub fn stochastic_rank<S: Scalar, R: Rng + ?Sized>(keys: &[(S, S)], pf: f64, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    for _ in 0..keys.len() {
        let mut swapped = false;
        for j in 0..keys.len().saturating_sub(1) {
            let (a, b) = (keys[order[j]], keys[order[j + 1]]);
            let both_feasible = a.1 == S::zero() && b.1 == S::zero();
            let by_cost = both_feasible || rng.random::<f64>() < pf;
            let swap = if by_cost { a.0 > b.0 } else { a.1 > b.1 };
            if swap {
                order.swap(j, j + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    order
}

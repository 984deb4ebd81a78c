//! Integer sample-size search shared by the solvers: exponential bracketing
//! followed by bisection on a monotone feasibility predicate.

use crate::error::{Error, Result};

/// Smallest `n >= n_min` with `feasible(n)`, assuming feasibility is monotone
/// in `n`. `Err(Infeasible)` from the predicate counts as "not feasible";
/// other errors abort. `guess` seeds the bracketing (e.g. a closed-form
/// approximation) to keep the evaluation count low. Returns `(n, evaluations)`.
pub fn smallest_feasible_n<F>(
    n_min: u64,
    guess: u64,
    cap: u64,
    mut feasible: F,
) -> Result<(u64, u32)>
where
    F: FnMut(u64) -> Result<bool>,
{
    let mut evals = 0u32;
    let mut check = |n: u64, evals: &mut u32| -> Result<bool> {
        *evals += 1;
        match feasible(n) {
            Ok(ok) => Ok(ok),
            Err(Error::Infeasible(_)) => Ok(false),
            Err(e) => Err(e),
        }
    };

    if check(n_min, &mut evals)? {
        return Ok((n_min, evals));
    }
    // lo is always infeasible, hunt for a feasible hi
    let mut lo = n_min;
    let mut hi = guess.clamp(n_min + 1, cap);
    loop {
        if check(hi, &mut evals)? {
            break;
        }
        if hi >= cap {
            return Err(Error::NoSolution { cap });
        }
        lo = hi;
        hi = (hi.saturating_mul(2)).min(cap);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if check(mid, &mut evals)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((hi, evals))
}

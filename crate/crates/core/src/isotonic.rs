//! Pool-adjacent-violators for weighted isotonic (nondecreasing) regression.
//!
//! Two flavours share the same stack algorithm: a floating-point one used by
//! the iterative convex minorant steps, and an exact one for binomial data
//! where each block value is a ratio of integer sums. Adjacent blocks with
//! equal means are pooled, so the resulting blocks have strictly increasing
//! values.

#[derive(Debug, Clone, Copy)]
struct Block<T> {
    num: T,
    den: T,
    len: usize,
}

/// Weighted least-squares nondecreasing fit of `y` with positive weights `w`.
pub fn pava(y: &[f64], w: &[f64]) -> Vec<f64> {
    assert_eq!(y.len(), w.len());
    let mut stack: Vec<Block<f64>> = Vec::with_capacity(y.len());
    for (&yi, &wi) in y.iter().zip(w) {
        debug_assert!(wi > 0.0, "weights must be positive");
        let mut cur = Block { num: wi * yi, den: wi, len: 1 };
        while let Some(prev) = stack.last() {
            if prev.num / prev.den >= cur.num / cur.den {
                cur = Block { num: prev.num + cur.num, den: prev.den + cur.den, len: prev.len + cur.len };
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(cur);
    }
    expand(&stack, |b| b.num / b.den)
}

/// Nondecreasing maximum likelihood fit of binomial proportions
/// `events[i] / totals[i]` weighted by `totals[i] > 0`.
///
/// Block comparisons are exact (cross-multiplied integers) and each fitted
/// value is computed as a single division of integer sums.
pub fn pava_binomial(events: &[u64], totals: &[u64]) -> Vec<f64> {
    assert_eq!(events.len(), totals.len());
    let mut stack: Vec<Block<u64>> = Vec::with_capacity(events.len());
    for (&e, &t) in events.iter().zip(totals) {
        debug_assert!(t > 0 && e <= t);
        let mut cur = Block { num: e, den: t, len: 1 };
        while let Some(prev) = stack.last() {
            // prev.num / prev.den >= cur.num / cur.den
            if prev.num as u128 * cur.den as u128 >= cur.num as u128 * prev.den as u128 {
                cur = Block { num: prev.num + cur.num, den: prev.den + cur.den, len: prev.len + cur.len };
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(cur);
    }
    expand(&stack, |b| b.num as f64 / b.den as f64)
}

fn expand<T: Copy>(stack: &[Block<T>], value: impl Fn(&Block<T>) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(stack.iter().map(|b| b.len).sum());
    for b in stack {
        let v = value(b);
        out.extend(std::iter::repeat_n(v, b.len));
    }
    out
}

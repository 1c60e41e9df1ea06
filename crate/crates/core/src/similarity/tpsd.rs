/// Minimal mean absolute difference between two beat-grid step functions
/// over all cyclic shifts of the shorter one, compared position by position
/// across the length of the longer one. Returns `(raw, comparisons)`.
pub fn tpsd_series(a: &[f64], b: &[f64]) -> (f64, u64) {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let ls = short.len();
    let ll = long.len();
    let mut best = f64::INFINITY;
    for shift in 0..ls {
        let mut total = 0.0;
        let mut k = shift;
        for &x in long {
            total += (x - short[k]).abs();
            k += 1;
            if k == ls {
                k = 0;
            }
        }
        if total < best {
            best = total;
        }
    }
    (best / ll as f64, (ll * ls) as u64)
}

//! Small shared vector helpers. Internal only.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub(crate) fn scale_in_place(v: &mut [f64], c: f64) {
    for x in v.iter_mut() {
        *x *= c;
    }
}

/// Euclidean distance between two vectors of equal length.
pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Index of the entry with the largest magnitude; ties go to the
/// smallest index.
pub(crate) fn argmax_abs(v: &[f64]) -> usize {
    let mut best = 0;
    let mut best_abs = v[0].abs();
    for (i, x) in v.iter().enumerate().skip(1) {
        if x.abs() > best_abs {
            best = i;
            best_abs = x.abs();
        }
    }
    best
}

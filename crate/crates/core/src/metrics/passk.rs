use super::MetricsError;

/// Unbiased pass@k: `1 − C(n−c, k) / C(n, k)`.
///
/// Evaluated as `1 − Π_{i=n−c+1}^{n} (i − k)/i`, which avoids factorials.
/// The product is kept as a reduced integer fraction while it fits, so small
/// cases come out correctly rounded (pass@1 with n=5, c=2 is exactly `0.4`);
/// larger ones fall back to a floating-point product.
pub fn pass_at_k(n: u64, c: u64, k: u64) -> Result<f64, MetricsError> {
    if n == 0 || k == 0 {
        return Err(MetricsError::Invalid(format!("n and k must be positive (n={n}, k={k})")));
    }
    if c > n {
        return Err(MetricsError::Invalid(format!("c={c} exceeds n={n}")));
    }
    if k > n {
        return Err(MetricsError::Invalid(format!("k={k} exceeds n={n}")));
    }
    if n - c < k {
        return Ok(1.0);
    }
    if let Some((num, den)) = miss_fraction(n, c, k) {
        return Ok((den - num) as f64 / den as f64);
    }
    let miss: f64 = (n - c + 1..=n).map(|i| 1.0 - k as f64 / i as f64).product();
    Ok(1.0 - miss)
}

/// `Π (i − k)/i` as a reduced fraction, if it fits below 2^53.
fn miss_fraction(n: u64, c: u64, k: u64) -> Option<(u128, u128)> {
    const LIMIT: u128 = 1 << 53;
    let (mut num, mut den) = (1u128, 1u128);
    for i in n - c + 1..=n {
        num = num.checked_mul((i - k) as u128)?;
        den = den.checked_mul(i as u128)?;
        let g = gcd(num, den);
        num /= g;
        den /= g;
    }
    (den < LIMIT).then_some((num, den))
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

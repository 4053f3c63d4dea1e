//! Value parsers for flags clap cannot handle on its own.

use num_complex::Complex64;

/// `1.3`, `-0.4i`, `i`, `1.3-0.4i`, `2e-3+1j`.
pub fn complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot read {s:?} as a complex number (expected e.g. 1.3-0.4i)");
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let coeff = |c: &str| -> Result<f64, String> {
        match c {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => c.parse().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => Ok(Complex64::new(body[..k].parse().map_err(|_| bad())?, coeff(&body[k..])?)),
        None => Ok(Complex64::new(0.0, coeff(body)?)),
    }
}

/// `a..b` or `a..=b` (both inclusive), or a single integer.
pub fn label_range(s: &str) -> Result<(i64, i64), String> {
    let bad = || format!("cannot read {s:?} as a label range (expected e.g. -2..3)");
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(format!("empty label range {s:?}"));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        let c = Complex64::new;
        assert_eq!(complex("1.3").unwrap(), c(1.3, 0.0));
        assert_eq!(complex("-0.4i").unwrap(), c(0.0, -0.4));
        assert_eq!(complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(complex("1.3-0.4i").unwrap(), c(1.3, -0.4));
        assert_eq!(complex("1.3 + i").unwrap(), c(1.3, 1.0));
        assert_eq!(complex("2e-3+1e-2j").unwrap(), c(2e-3, 1e-2));
        assert_eq!(complex("-1e+2-3i").unwrap(), c(-100.0, -3.0));
        assert!(complex("abc").is_err());
        assert!(complex("1+2").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(label_range("-2..3").unwrap(), (-2, 3));
        assert_eq!(label_range("0..=2").unwrap(), (0, 2));
        assert_eq!(label_range("4").unwrap(), (4, 4));
        assert!(label_range("3..1").is_err());
        assert!(label_range("a..b").is_err());
    }
}

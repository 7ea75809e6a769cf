//! Numbers carried as `mantissa * exp(ln_scale)`.
//!
//! Pair-creation rates are suppressed by `exp(-2a sqrt(-(p+q)^2))`, which
//! for slow atoms lies thousands of e-folds below the `f64` range. The
//! observables therefore keep the exponent separately.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    /// Absolute error of the mantissa.
    pub error: f64,
    pub ln_scale: f64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled {
        mantissa: 0.0,
        error: 0.0,
        ln_scale: 0.0,
    };

    pub fn new(mantissa: f64, error: f64, ln_scale: f64) -> Self {
        Scaled {
            mantissa,
            error,
            ln_scale,
        }
    }

    pub fn exact(value: f64) -> Self {
        Scaled::new(value, 0.0, 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    /// Plain `f64` value; underflows to zero for strongly suppressed rates.
    pub fn value(&self) -> f64 {
        self.mantissa * self.ln_scale.exp()
    }

    pub fn error_value(&self) -> f64 {
        self.error * self.ln_scale.exp()
    }

    /// Natural log of `|value|`, `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.abs().ln() + self.ln_scale
    }

    pub fn relative_error(&self) -> f64 {
        if self.mantissa == 0.0 {
            if self.error == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.error / self.mantissa.abs()
        }
    }

    pub fn scale(self, factor: f64) -> Scaled {
        Scaled::new(self.mantissa * factor, self.error * factor.abs(), self.ln_scale)
    }

    /// Same number expressed with a different exponent.
    pub fn with_ln_scale(self, ln_scale: f64) -> Scaled {
        if self.mantissa == 0.0 && self.error == 0.0 {
            return Scaled::new(0.0, 0.0, ln_scale);
        }
        let f = (self.ln_scale - ln_scale).exp();
        Scaled::new(self.mantissa * f, self.error * f, ln_scale)
    }

    /// `self / other` as a plain number.
    pub fn ratio(&self, other: &Scaled) -> f64 {
        (self.mantissa / other.mantissa) * (self.ln_scale - other.ln_scale).exp()
    }

    /// Decimal rendering with an unbounded exponent, e.g. `3.25e-2171`.
    pub fn to_decimal(&self, significant: usize) -> String {
        format_decimal(self.mantissa, self.ln_scale, significant)
    }

    pub fn error_to_decimal(&self, significant: usize) -> String {
        format_decimal(self.error, self.ln_scale, significant)
    }
}

impl fmt::Display for Scaled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().map_or(10, |p| p + 1);
        f.write_str(&self.to_decimal(digits))
    }
}

/// Formats `mantissa * exp(ln_scale)` in scientific notation without
/// going through an `f64` that could overflow or underflow.
pub fn format_decimal(mantissa: f64, ln_scale: f64, significant: usize) -> String {
    let significant = significant.max(1);
    if mantissa == 0.0 {
        return "0".to_string();
    }
    if !mantissa.is_finite() || !ln_scale.is_finite() {
        return format!("{}", mantissa * ln_scale.exp());
    }
    let sign = if mantissa < 0.0 { "-" } else { "" };
    let log10 = mantissa.abs().log10() + ln_scale / std::f64::consts::LN_10;
    let mut exponent = log10.floor();
    let mut digits = format!("{:.*}", significant - 1, 10f64.powf(log10 - exponent));
    if digits.starts_with("10") {
        // rounding carried into the next decade
        exponent += 1.0;
        digits = format!("{:.*}", significant - 1, 1.0);
    }
    format!("{sign}{digits}e{}", exponent as i64)
}

/// Parses the output of [`format_decimal`] (or any `f64` literal) into
/// `(mantissa, ln_scale)` with the mantissa in `[1, 10)`.
pub fn parse_decimal(text: &str) -> Option<(f64, f64)> {
    let text = text.trim();
    let (digits, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i64>().ok()?),
        None => (text, 0),
    };
    let mantissa: f64 = digits.parse().ok()?;
    Some((mantissa, exponent as f64 * std::f64::consts::LN_10))
}

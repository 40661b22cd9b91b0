//! SNR grids written `from:step:to` (inclusive) or as a single value.

use anyhow::{bail, Context, Result};

/// Points are `from + i·step`, rounded to 12 decimals so that `0:0.1:1`
/// prints as `0.3` rather than `0.30000000000000004`.
pub fn parse_snr_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| -> Result<f64> {
        let v: f64 = t.trim().parse().with_context(|| format!("'{t}' is not a number"))?;
        if !v.is_finite() {
            bail!("'{t}' is not finite");
        }
        Ok(v)
    };
    match parts.as_slice() {
        [one] => Ok(vec![num(one)?]),
        [from, step, to] => {
            let (from, step, to) = (num(from)?, num(step)?, num(to)?);
            if from > to {
                bail!("empty SNR range: from {from} is greater than to {to}");
            }
            if !(step > 0.0) {
                bail!("SNR step must be positive, got {step}");
            }
            let count = ((to - from) / step + 1e-9).floor() as usize + 1;
            if count > 100_000 {
                bail!("SNR grid has {count} points");
            }
            Ok((0..count)
                .map(|i| {
                    let v = from + i as f64 * step;
                    (v * 1e12).round() / 1e12
                })
                .collect())
        }
        _ => bail!("expected 'from:step:to' or a single value, got '{s}'"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_snr_grid("0:0.5:2").unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(parse_snr_grid("0:0.1:0.3").unwrap(), vec![0.0, 0.1, 0.2, 0.3]);
        assert_eq!(parse_snr_grid("-5").unwrap(), vec![-5.0]);
        assert_eq!(parse_snr_grid("1:1:1").unwrap(), vec![1.0]);
        assert_eq!(parse_snr_grid("0:0.3:1").unwrap(), vec![0.0, 0.3, 0.6, 0.9]);
    }

    #[test]
    fn bad_grids() {
        assert!(parse_snr_grid("3:1:2").is_err());
        assert!(parse_snr_grid("0:0:2").is_err());
        assert!(parse_snr_grid("0:1").is_err());
        assert!(parse_snr_grid("a:1:2").is_err());
        assert!(parse_snr_grid("0:1:inf").is_err());
    }
}

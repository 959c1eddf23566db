use std::str::FromStr;

use anyhow::{bail, Context};

/// Inclusive `min:max:count` grid, or a single value.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl FromStr for GridSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| -> anyhow::Result<f64> {
            let x: f64 = p.trim().parse().with_context(|| format!("`{p}` is not a number"))?;
            if !x.is_finite() {
                bail!("`{p}` is not finite");
            }
            Ok(x)
        };
        match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                Ok(Self { min: v, max: v, count: 1 })
            }
            [a, b, n] => {
                let count: usize = n
                    .trim()
                    .parse()
                    .with_context(|| format!("`{n}` is not a point count"))?;
                if count == 0 {
                    bail!("grid `{s}` is empty");
                }
                let (min, max) = (num(a)?, num(b)?);
                if count == 1 && min != max {
                    bail!("grid `{s}` has one point but distinct endpoints");
                }
                if max < min {
                    bail!("grid `{s}` has max below min");
                }
                Ok(Self { min, max, count })
            }
            _ => bail!("grid `{s}` must be `value` or `min:max:count`"),
        }
    }
}

impl GridSpec {
    pub fn points(&self, log: bool) -> anyhow::Result<Vec<f64>> {
        if self.count == 1 {
            return Ok(vec![self.min]);
        }
        let n = (self.count - 1) as f64;
        if log {
            if self.min <= 0.0 {
                bail!("log-spaced grid needs a positive minimum, got {}", self.min);
            }
            let (a, b) = (self.min.ln(), self.max.ln());
            Ok((0..self.count)
                .map(|i| match i {
                    0 => self.min,
                    i if i == self.count - 1 => self.max,
                    i => (a + (b - a) * i as f64 / n).exp(),
                })
                .collect())
        } else {
            Ok((0..self.count)
                .map(|i| match i {
                    i if i == self.count - 1 => self.max,
                    i => self.min + (self.max - self.min) * i as f64 / n,
                })
                .collect())
        }
    }
}

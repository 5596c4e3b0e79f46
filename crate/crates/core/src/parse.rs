//! Shared grammar for `name:key=value,key=value` strings.

use crate::error::{Error, Result};

pub(crate) struct Tagged<'a> {
    pub input: &'a str,
    pub name: &'a str,
    /// `(key, value, 1-based column of value)`
    pub params: Vec<(&'a str, &'a str, usize)>,
}

impl<'a> Tagged<'a> {
    pub fn parse(input: &'a str) -> Result<Self> {
        let (name, rest, rest_start) = match input.find(':') {
            Some(i) => (&input[..i], &input[i + 1..], i + 1),
            None => (input, "", input.len()),
        };
        let name = name.trim();
        if name.is_empty() {
            return Err(err(input, 1, "missing name before `:`"));
        }
        let mut params = Vec::new();
        if !rest.is_empty() {
            let mut offset = rest_start;
            for item in rest.split(',') {
                let eq = item
                    .find('=')
                    .ok_or_else(|| err(input, offset + 1, "expected `key=value`"))?;
                let key = item[..eq].trim();
                if key.is_empty() {
                    return Err(err(input, offset + 1, "empty parameter name"));
                }
                params.push((key, item[eq + 1..].trim(), offset + eq + 2));
                offset += item.len() + 1;
            }
        }
        Ok(Tagged {
            input,
            name,
            params,
        })
    }

    pub fn number(&self, key: &str) -> Result<f64> {
        let (_, value, column) =
            self.params
                .iter()
                .find(|(k, _, _)| *k == key)
                .ok_or_else(|| {
                    err(
                        self.input,
                        self.input.len() + 1,
                        &format!("missing parameter `{key}`"),
                    )
                })?;
        value
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| {
                err(
                    self.input,
                    *column,
                    &format!("`{value}` is not a finite number"),
                )
            })
    }

    pub fn expect_keys(&self, allowed: &[&str]) -> Result<()> {
        for (key, _, column) in &self.params {
            if !allowed.contains(key) {
                return Err(err(
                    self.input,
                    column - key.len() - 1,
                    &format!("unknown parameter `{key}` for `{}`", self.name),
                ));
            }
        }
        Ok(())
    }

    pub fn unknown_name(&self, expected: &str) -> Error {
        err(
            self.input,
            1,
            &format!("unknown name `{}`; expected one of {expected}", self.name),
        )
    }
}

pub(crate) fn err(input: &str, column: usize, message: &str) -> Error {
    Error::Parse {
        input: input.to_string(),
        column,
        message: message.to_string(),
    }
}

/// Comma-separated decimals, e.g. `1,1` or `2,0.5`.
pub(crate) fn number_list(input: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for item in input.split(',') {
        let trimmed = item.trim();
        let value = trimmed
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| {
                err(
                    input,
                    offset + 1,
                    &format!("`{trimmed}` is not a finite number"),
                )
            })?;
        out.push(value);
        offset += item.len() + 1;
    }
    Ok(out)
}

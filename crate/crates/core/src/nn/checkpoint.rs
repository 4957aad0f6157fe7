//! Flat-text model checkpoints.
//!
//! Layout (one item per line):
//!
//! ```text
//! guidg-mlp v1
//! activation <tanh|relu|identity>
//! sizes <s0> <s1> ... <sk>
//! params <count>
//! <param 0>
//! ...
//! <param count-1>
//! ```
//!
//! Parameters appear layer by layer, weights row-major then biases, printed
//! with Rust's shortest round-trip `f64` formatting, so save → load is
//! bit-exact.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::{Activation, MlpModel};

const MAGIC: &str = "guidg-mlp v1";

pub fn write_model_block(model: &MlpModel, out: &mut String) {
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("activation {}\n", model.activation().name()));
    let sizes: Vec<String> = model.layer_sizes().iter().map(|s| s.to_string()).collect();
    out.push_str(&format!("sizes {}\n", sizes.join(" ")));
    let flat = model.params_flat();
    out.push_str(&format!("params {}\n", flat.len()));
    for p in flat {
        out.push_str(&format!("{p:?}\n"));
    }
}

fn expect_line<'a, I: Iterator<Item = &'a str>>(lines: &mut I, what: &str) -> Result<&'a str> {
    lines
        .next()
        .ok_or_else(|| Error::Parse(format!("model block truncated: expected {what}")))
}

pub fn read_model_block<'a, I: Iterator<Item = &'a str>>(lines: &mut I) -> Result<MlpModel> {
    let magic = expect_line(lines, "magic line")?;
    if magic.trim() != MAGIC {
        return Err(Error::Parse(format!("bad model magic `{magic}`")));
    }
    let act_line = expect_line(lines, "activation line")?;
    let activation = match act_line.trim().strip_prefix("activation ") {
        Some(name) => Activation::from_name(name.trim())?,
        None => return Err(Error::Parse(format!("bad activation line `{act_line}`"))),
    };
    let sizes_line = expect_line(lines, "sizes line")?;
    let sizes: Vec<usize> = match sizes_line.trim().strip_prefix("sizes ") {
        Some(rest) => rest
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad layer size `{t}`")))
            })
            .collect::<Result<_>>()?,
        None => return Err(Error::Parse(format!("bad sizes line `{sizes_line}`"))),
    };
    let count_line = expect_line(lines, "params line")?;
    let count: usize = match count_line.trim().strip_prefix("params ") {
        Some(n) => n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad param count `{n}`")))?,
        None => return Err(Error::Parse(format!("bad params line `{count_line}`"))),
    };
    let mut model = MlpModel::zeros(&sizes, activation)?;
    if count != model.param_count() {
        return Err(Error::Parse(format!(
            "param count {} does not match architecture ({} expected)",
            count,
            model.param_count()
        )));
    }
    let mut flat = Vec::with_capacity(count);
    for i in 0..count {
        let line = expect_line(lines, "parameter value")?;
        let v: f64 = line
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad parameter {i}: `{line}`")))?;
        flat.push(v);
    }
    model.set_params_flat(&flat)?;
    Ok(model)
}

pub fn save_model(model: &MlpModel, path: &Path) -> Result<()> {
    let mut out = String::new();
    write_model_block(model, &mut out);
    fs::write(path, out)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    read_model_block(&mut lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let model = MlpModel::seeded(&[3, 7, 7, 2], Activation::Tanh, 99).unwrap();
        let mut text = String::new();
        write_model_block(&model, &mut text);
        let restored = read_model_block(&mut text.lines()).unwrap();
        let a: Vec<u64> = model.params_flat().iter().map(|x| x.to_bits()).collect();
        let b: Vec<u64> = restored.params_flat().iter().map(|x| x.to_bits()).collect();
        assert_eq!(a, b);
        assert_eq!(model.layer_sizes(), restored.layer_sizes());
        assert_eq!(model.activation(), restored.activation());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        let model = MlpModel::seeded(&[1, 40, 40, 1], Activation::Tanh, 12).unwrap();
        save_model(&model, &path).unwrap();
        let restored = load_model(&path).unwrap();
        assert_eq!(model.params_flat(), restored.params_flat());
    }

    #[test]
    fn rejects_corrupt_blocks() {
        let model = MlpModel::seeded(&[2, 2], Activation::Relu, 5).unwrap();
        let mut text = String::new();
        write_model_block(&model, &mut text);
        let truncated: String = text.lines().take(5).collect::<Vec<_>>().join("\n");
        assert!(read_model_block(&mut truncated.lines()).is_err());
        let wrong_magic = text.replacen("guidg-mlp v1", "guidg-mlp v9", 1);
        assert!(read_model_block(&mut wrong_magic.lines()).is_err());
    }
}

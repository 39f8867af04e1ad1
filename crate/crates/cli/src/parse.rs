use num_complex::Complex64 as C64;
use weakclone::tensor::{HermitianObservable, Matrix, StateVector, NORM_TOL};

use crate::CliError;

fn numbers(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::Config(format!("{what}: `{t}` is not a finite number")))
        })
        .collect()
}

fn pairs(values: &[f64]) -> Vec<C64> {
    values.chunks(2).map(|c| C64::new(c[0], c[1])).collect()
}

/// Parses `a0re,a0im,a1re,a1im,...`. A state whose norm is off by more than
/// the tolerance is normalized and `warn` is called.
pub fn parse_state(text: &str, mut warn: impl FnMut(String)) -> Result<StateVector, CliError> {
    let values = numbers(text, "state")?;
    if values.len() % 2 != 0 || values.len() < 4 {
        return Err(CliError::Config(format!(
            "state needs an even number of at least 4 values (re,im pairs), got {}",
            values.len()
        )));
    }
    let state = StateVector::qudit(pairs(&values))?;
    let norm = state.norm();
    if norm == 0.0 {
        return Err(CliError::Config("state is the zero vector".into()));
    }
    if (norm - 1.0).abs() > NORM_TOL {
        warn(format!("state norm is {norm}; normalizing"));
        return Ok(state.normalize()?);
    }
    Ok(state)
}

/// `sx`, `sy`, `sz`, or `h:` followed by row-major re,im pairs.
pub fn parse_observable(text: &str) -> Result<HermitianObservable, CliError> {
    match text.trim() {
        "sx" => Ok(HermitianObservable::pauli_x()),
        "sy" => Ok(HermitianObservable::pauli_y()),
        "sz" => Ok(HermitianObservable::pauli_z()),
        other => {
            let body = other.strip_prefix("h:").ok_or_else(|| {
                CliError::Config(format!("unknown observable `{other}`; use sx, sy, sz or h:<entries>"))
            })?;
            let values = numbers(body, "observable")?;
            let n = ((values.len() / 2) as f64).sqrt().round() as usize;
            if values.len() % 2 != 0 || n * n * 2 != values.len() || n < 2 {
                return Err(CliError::Config(format!(
                    "observable needs 2·N² values for an N×N matrix, got {}",
                    values.len()
                )));
            }
            Ok(HermitianObservable::new(Matrix::from_row_major(n, pairs(&values))?)?)
        }
    }
}

use super::{BoxState, Forecast};
use crate::{Error, Real};

/// Centre distance at every offset.
pub fn displacement_errors<T: Real>(
    predicted: &Forecast<T>,
    actual: &[BoxState<T>],
) -> Result<Vec<T>, Error> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch {
            predicted: predicted.len(),
            actual: actual.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::EmptyForecast);
    }
    Ok(predicted
        .boxes()
        .zip(actual)
        .map(|(p, a)| (p.center() - a.center()).norm())
        .collect())
}

/// Average displacement error over all offsets.
pub fn ade<T: Real>(predicted: &Forecast<T>, actual: &[BoxState<T>]) -> Result<T, Error> {
    let d = displacement_errors(predicted, actual)?;
    let n = T::lit(d.len() as f64);
    Ok(d.into_iter().fold(T::zero(), |a, x| a + x) / n)
}

/// Displacement error at the final offset.
pub fn fde<T: Real>(predicted: &Forecast<T>, actual: &[BoxState<T>]) -> Result<T, Error> {
    let d = displacement_errors(predicted, actual)?;
    Ok(*d.last().expect("non-empty by construction"))
}

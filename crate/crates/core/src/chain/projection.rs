use std::collections::BTreeMap;

use num_traits::Zero;

use super::{Configuration, Content, StationaryVector};
use crate::error::{Error, Result};
use crate::numeric::Rational;

/// A weakly order-preserving map on species `0..=s`, stored as its values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneMap {
    values: Vec<usize>,
}

impl MonotoneMap {
    /// Rejects maps that are not weakly increasing.
    pub fn new(values: Vec<usize>) -> Result<Self> {
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Precondition(format!("{values:?} is not weakly increasing")));
        }
        Ok(MonotoneMap { values })
    }

    pub fn identity(s: usize) -> Self {
        MonotoneMap {
            values: (0..=s).collect(),
        }
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn apply(&self, v: usize) -> Result<usize> {
        self.values.get(v).copied().ok_or(Error::IndexOutOfRange {
            index: v,
            limit: self.values.len(),
        })
    }

    pub fn fixes_zero(&self) -> bool {
        self.values.first() == Some(&0)
    }

    /// Image content. Projecting stationary laws needs `phi(0) = 0`, since
    /// vacancies must stay vacancies.
    pub fn project_content(&self, content: &Content) -> Result<Content> {
        if !self.fixes_zero() {
            return Err(Error::Precondition("projection must send 0 to 0".into()));
        }
        let lambda: Vec<usize> = content.lambda().iter().map(|&v| self.apply(v)).collect::<Result<_>>()?;
        Content::from_lambda(&lambda)
    }
}

/// Applies `phi` site by site.
pub fn project_config(phi: &MonotoneMap, eta: &Configuration) -> Result<Configuration> {
    eta.0.iter().map(|&v| phi.apply(v)).collect::<Result<Vec<_>>>().map(Configuration)
}

/// Pushes a stationary law forward along `phi`.
pub fn project_stationary(phi: &MonotoneMap, pi: &StationaryVector) -> Result<StationaryVector> {
    let content = phi.project_content(&pi.content)?;
    let mut acc: BTreeMap<Configuration, Rational> = BTreeMap::new();
    for (eta, p) in pi.iter() {
        *acc.entry(project_config(phi, eta)?).or_insert_with(Rational::zero) += p;
    }
    let (states, probs) = acc.into_iter().rev().unzip();
    Ok(StationaryVector { content, states, probs })
}

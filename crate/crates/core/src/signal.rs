use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::GaussianRational;

/// Finite complex sequence indexed by `D = {0, ..., N-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "SignalRepr", into = "SignalRepr")]
pub struct Signal {
    components: Vec<GaussianRational>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignalRepr {
    n: usize,
    components: Vec<GaussianRational>,
}

impl TryFrom<SignalRepr> for Signal {
    type Error = Error;
    fn try_from(r: SignalRepr) -> Result<Self> {
        if r.components.len() != r.n {
            return Err(Error::InvalidArgument(format!(
                "signal declares n = {} but has {} components",
                r.n,
                r.components.len()
            )));
        }
        Ok(Signal { components: r.components })
    }
}

impl From<Signal> for SignalRepr {
    fn from(s: Signal) -> Self {
        SignalRepr { n: s.components.len(), components: s.components }
    }
}

impl Signal {
    pub fn new(components: Vec<GaussianRational>) -> Self {
        Signal { components }
    }

    pub fn zeros(n: usize) -> Self {
        Signal { components: vec![GaussianRational::zero(); n] }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[GaussianRational] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [GaussianRational] {
        &mut self.components
    }

    pub fn into_components(self) -> Vec<GaussianRational> {
        self.components
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GaussianRational> {
        self.components.iter()
    }

    /// Indices of nonzero components.
    pub fn support(&self) -> Vec<usize> {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, z)| !z.is_zero())
            .map(|(k, _)| k)
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(GaussianRational::is_zero)
    }

    pub fn sub(&self, other: &Signal) -> Signal {
        assert_eq!(self.len(), other.len(), "signal lengths differ");
        Signal::new(self.iter().zip(other.iter()).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Signal) -> Signal {
        assert_eq!(self.len(), other.len(), "signal lengths differ");
        Signal::new(self.iter().zip(other.iter()).map(|(a, b)| a + b).collect())
    }

    /// Sum of all components.
    pub fn total(&self) -> GaussianRational {
        self.iter().fold(GaussianRational::zero(), |acc, z| &acc + z)
    }
}

impl Index<usize> for Signal {
    type Output = GaussianRational;
    fn index(&self, k: usize) -> &GaussianRational {
        &self.components[k]
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, z) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{z}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ratio;

    #[test]
    fn json_schema() {
        let s = Signal::new(vec![GaussianRational::real(ratio(5, 8)), GaussianRational::zero()]);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"n":2,"components":[{"re":"5/8","im":"0"},{"re":"0","im":"0"}]}"#);
        assert_eq!(serde_json::from_str::<Signal>(&j).unwrap(), s);
        assert!(serde_json::from_str::<Signal>(r#"{"n":3,"components":[]}"#).is_err());
    }
}

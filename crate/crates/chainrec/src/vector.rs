//! Finitely supported scalar assignments on tree vertices.
//!
//! Canonical form: no stored entry is exactly zero and all entries share one
//! arithmetic mode.

use crate::error::{Error, Result};
use crate::scalar::{Mode, Scalar};
use crate::tree::VertexId;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeqVector {
    entries: BTreeMap<VertexId, Scalar>,
}

impl SeqVector {
    pub fn zero() -> SeqVector {
        SeqVector::default()
    }

    /// The canonical unit sequence e_v.
    pub fn basis(v: VertexId, mode: Mode) -> SeqVector {
        let mut entries = BTreeMap::new();
        entries.insert(v, Scalar::one(mode));
        SeqVector { entries }
    }

    pub fn from_entries<I>(entries: I) -> Result<SeqVector>
    where
        I: IntoIterator<Item = (VertexId, Scalar)>,
    {
        let mut f = SeqVector::zero();
        for (v, c) in entries {
            let cur = match f.entries.remove(&v) {
                Some(old) => old.add(&c)?,
                None => c,
            };
            if !cur.is_zero() {
                f.check_mode(&cur)?;
                f.entries.insert(v, cur);
            }
        }
        Ok(f)
    }

    fn check_mode(&self, c: &Scalar) -> Result<()> {
        if let Some((_, first)) = self.entries.iter().next() {
            if first.mode() != c.mode() {
                return Err(Error::MixedScalarModes);
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn support(&self) -> impl Iterator<Item = &VertexId> {
        self.entries.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexId, &Scalar)> {
        self.entries.iter()
    }

    /// Coordinate value; absent entries are zero (in the vector's mode, or
    /// exact zero for the empty vector).
    pub fn get(&self, v: &VertexId) -> Scalar {
        self.entries
            .get(v)
            .cloned()
            .unwrap_or_else(|| Scalar::zero(self.mode().unwrap_or(Mode::Exact)))
    }

    /// Mode of the entries; None for the zero vector (compatible with any).
    pub fn mode(&self) -> Option<Mode> {
        self.entries.values().next().map(|c| c.mode())
    }

    fn modes_compatible(&self, other: &SeqVector) -> Result<()> {
        if let (Some(a), Some(b)) = (self.mode(), other.mode()) {
            if a != b {
                return Err(Error::MixedScalarModes);
            }
        }
        Ok(())
    }

    /// αf + g in canonical form.
    pub fn axpy(alpha: &Scalar, f: &SeqVector, g: &SeqVector) -> Result<SeqVector> {
        f.modes_compatible(g)?;
        if let Some(m) = f.mode() {
            if m != alpha.mode() && !f.is_zero() {
                return Err(Error::MixedScalarModes);
            }
        }
        let mut out = g.entries.clone();
        for (v, c) in &f.entries {
            let term = alpha.mul(c)?;
            let cur = match out.remove(v) {
                Some(old) => old.add(&term)?,
                None => term,
            };
            if !cur.is_zero() {
                out.insert(*v, cur);
            }
        }
        Ok(SeqVector { entries: out })
    }

    pub fn add(&self, other: &SeqVector) -> Result<SeqVector> {
        let one = Scalar::one(self.mode().or(other.mode()).unwrap_or(Mode::Exact));
        SeqVector::axpy(&one, self, other)
    }

    pub fn sub(&self, other: &SeqVector) -> Result<SeqVector> {
        let minus_one = Scalar::one(self.mode().or(other.mode()).unwrap_or(Mode::Exact)).neg();
        SeqVector::axpy(&minus_one, other, self)
    }

    pub fn scale(&self, alpha: &Scalar) -> Result<SeqVector> {
        SeqVector::axpy(alpha, self, &SeqVector::zero())
    }

    /// Sparse JSON form: {"vertex": "coefficient", ...}.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .entries
            .iter()
            .map(|(v, c)| (v.to_string(), serde_json::Value::String(c.to_string())))
            .collect();
        serde_json::Value::Object(map)
    }
}

use serde::{Deserialize, Serialize};

use super::EmbedError;

/// A finite real vector in an embedding space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self, EmbedError> {
        if values.is_empty() {
            return Err(EmbedError::Empty);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EmbedError::NonFinite);
        }
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Self) -> Result<f64, EmbedError> {
        check_dims(self.dim(), other.dim())?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    pub fn sub(&self, other: &Self) -> Result<Self, EmbedError> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn add(&self, other: &Self) -> Result<Self, EmbedError> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|a| a * factor).collect())
    }

    pub fn euclidean_distance(&self, other: &Self) -> Result<f64, EmbedError> {
        Ok(self.sub(other)?.norm())
    }
}

impl TryFrom<Vec<f64>> for EmbeddingVector {
    type Error = EmbedError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        EmbeddingVector::new(v)
    }
}

impl From<EmbeddingVector> for Vec<f64> {
    fn from(v: EmbeddingVector) -> Self {
        v.0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(a: usize, b: usize) -> Result<(), EmbedError> {
    if a != b {
        return Err(EmbedError::DimensionMismatch { expected: a, actual: b });
    }
    Ok(())
}

pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, EmbedError> {
    let d = a.dot(b)?;
    let (na2, nb2) = (dot(&a.0, &a.0), dot(&b.0, &b.0));
    if na2 == 0.0 || nb2 == 0.0 {
        return Err(EmbedError::ZeroVector);
    }
    // sqrt(fl(x²)) = x exactly, so a vector has similarity exactly 1 with itself.
    Ok((d / (na2 * nb2).sqrt()).clamp(-1.0, 1.0))
}

pub fn cosine_distance(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, EmbedError> {
    Ok(1.0 - cosine_similarity(a, b)?)
}

/// Sum of absolute component differences.
pub fn manhattan_distance(a: &[f64], b: &[f64]) -> Result<f64, EmbedError> {
    check_dims(a.len(), b.len())?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum())
}

/// Fraction of the population strictly below `value`, plus half the ties.
pub fn percentile_rank(value: f64, population: &[f64]) -> Result<f64, EmbedError> {
    if population.is_empty() {
        return Err(EmbedError::Empty);
    }
    let below = population.iter().filter(|p| **p < value).count() as f64;
    let ties = population.iter().filter(|p| **p == value).count() as f64;
    Ok((below + 0.5 * ties) / population.len() as f64)
}

pub fn centroid(vectors: &[EmbeddingVector]) -> Result<EmbeddingVector, EmbedError> {
    let first = vectors.first().ok_or(EmbedError::Empty)?;
    let mut acc = vec![0.0; first.dim()];
    for v in vectors {
        check_dims(first.dim(), v.dim())?;
        for (a, x) in acc.iter_mut().zip(&v.0) {
            *a += x;
        }
    }
    let n = vectors.len() as f64;
    Ok(EmbeddingVector(acc.into_iter().map(|a| a / n).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn cosine_cases() {
        let a = v(&[1.0, 2.0, -0.5]);
        let e1 = v(&[1.0, 0.0, 0.0]);
        let e2 = v(&[0.0, 1.0, 0.0]);
        assert!((cosine_similarity(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&e1, &e2).unwrap(), 0.0);
        assert!((cosine_similarity(&a, &a.scale(-1.0)).unwrap() + 1.0).abs() < 1e-15);
        assert!(cosine_distance(&a, &a).unwrap().abs() < 1e-15);
        assert_eq!(cosine_distance(&e1, &e2).unwrap(), 1.0);
        assert!((cosine_distance(&a, &a.scale(-1.0)).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(
            cosine_similarity(&a, &EmbeddingVector::zeros(3)),
            Err(EmbedError::ZeroVector)
        ));
        assert!(matches!(
            cosine_similarity(&a, &v(&[1.0])),
            Err(EmbedError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn manhattan_cases() {
        let zero = [0.0; 14];
        let ones = [1.0; 14];
        assert_eq!(manhattan_distance(&zero, &zero).unwrap(), 0.0);
        assert_eq!(manhattan_distance(&zero, &ones).unwrap(), 14.0);
        let mut a = [0.0; 14];
        let mut b = [0.0; 14];
        a[0] = 1.0;
        b[1] = 1.0;
        assert_eq!(manhattan_distance(&a, &b).unwrap(), 2.0);
        assert!(manhattan_distance(&a, &b[..13]).is_err());
    }

    #[test]
    fn percentile_cases() {
        let pop: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(percentile_rank(0.0, &pop).unwrap(), 0.0);
        assert_eq!(percentile_rank(11.0, &pop).unwrap(), 1.0);
        assert_eq!(percentile_rank(3.0, &[3.0]).unwrap(), 0.5);
        assert!(percentile_rank(1.0, &[]).is_err());
    }

    #[test]
    fn centroid_cases() {
        let a = v(&[1.0, -2.0]);
        assert_eq!(centroid(std::slice::from_ref(&a)).unwrap(), a);
        assert_eq!(
            centroid(&[a.clone(), a.scale(-1.0)]).unwrap(),
            EmbeddingVector::zeros(2)
        );
        // (1,2,3) + (4,5,6) + (-2,1,0) = (3,8,9), / 3
        let c = centroid(&[v(&[1.0, 2.0, 3.0]), v(&[4.0, 5.0, 6.0]), v(&[-2.0, 1.0, 0.0])]).unwrap();
        assert_eq!(c.as_slice(), &[1.0, 8.0 / 3.0, 3.0]);
        assert!(centroid(&[]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(EmbeddingVector::new(vec![f64::NAN]).is_err());
        assert!(serde_json::from_str::<EmbeddingVector>("[]").is_err());
    }

    fn vec_strategy() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0..10.0f64, 8)
    }

    proptest! {
        #[test]
        fn cosine_scale_invariance(a in vec_strategy(), b in vec_strategy(), s in 0.01..100.0f64, t in 0.01..100.0f64) {
            let (a, b) = (v(&a), v(&b));
            prop_assume!(a.norm() > 1e-6 && b.norm() > 1e-6);
            let c1 = cosine_similarity(&a, &b).unwrap();
            let c2 = cosine_similarity(&a.scale(s), &b.scale(t)).unwrap();
            prop_assert!((c1 - c2).abs() < 1e-12);
            let d = cosine_distance(&a, &b).unwrap();
            prop_assert!((0.0..=2.0).contains(&d));
            prop_assert!((d - cosine_distance(&b, &a).unwrap()).abs() < 1e-15);
            prop_assert!(cosine_distance(&a, &a.scale(s)).unwrap().abs() < 1e-12);
        }

        #[test]
        fn percentile_monotone(pop in proptest::collection::vec(-5.0..5.0f64, 1..30), x in -6.0..6.0f64, dx in 0.0..3.0f64) {
            let lo = percentile_rank(x, &pop).unwrap();
            let hi = percentile_rank(x + dx, &pop).unwrap();
            prop_assert!(lo <= hi);
            prop_assert!((0.0..=1.0).contains(&lo));
        }
    }
}

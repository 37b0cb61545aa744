use crate::error::{Error, Result};
use crate::scalars::Rational;

/// Finite metric space carrying a geometric radius schedule `r(mu) = R / 2^mu`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PropagationSpace {
    labels: Vec<String>,
    dist: Vec<Rational>,
    radius_base: Rational,
}

impl PropagationSpace {
    /// Validates the metric and requires `radius_base >= diameter` so that
    /// every kernel has a filtration degree of at least zero.
    pub fn new(labels: Vec<String>, dist: Vec<Vec<Rational>>, radius_base: Rational) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidSpace("no points".into()));
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidSpace(format!("distance table must be {n}x{n}")));
        }
        for i in 0..n {
            if !dist[i][i].is_zero() {
                return Err(Error::InvalidSpace(format!("d({i},{i}) must be 0")));
            }
            for j in 0..n {
                if dist[i][j] != dist[j][i] {
                    return Err(Error::InvalidSpace(format!("d({i},{j}) != d({j},{i})")));
                }
                if i != j && (dist[i][j].is_negative() || dist[i][j].is_zero()) {
                    return Err(Error::InvalidSpace(format!("d({i},{j}) must be positive")));
                }
                for k in 0..n {
                    if dist[i][k] > &dist[i][j] + &dist[j][k] {
                        return Err(Error::InvalidSpace(format!(
                            "triangle inequality fails for ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        let space = PropagationSpace { labels, dist: dist.into_iter().flatten().collect(), radius_base };
        if space.radius_base.is_negative() || space.radius_base.is_zero() {
            return Err(Error::InvalidSpace("radius base must be positive".into()));
        }
        if space.radius_base < space.diameter() {
            return Err(Error::InvalidSpace(format!(
                "radius base {} is smaller than the diameter {}",
                space.radius_base,
                space.diameter()
            )));
        }
        Ok(space)
    }

    /// Points `0..n` on a line with `d(i, j) = |i - j|`.
    pub fn line(n: usize, radius_base: Rational) -> Result<Self> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let dist = (0..n)
            .map(|i| (0..n).map(|j| Rational::from_int(i.abs_diff(j) as i64)).collect())
            .collect();
        Self::new(labels, dist, radius_base)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dist(&self, i: usize, j: usize) -> &Rational {
        &self.dist[i * self.len() + j]
    }

    pub fn radius_base(&self) -> &Rational {
        &self.radius_base
    }

    pub fn diameter(&self) -> Rational {
        self.dist.iter().max().cloned().unwrap_or_default()
    }

    /// The radius `R / 2^mu` attached to filtration index `mu`.
    pub fn radius(&self, mu: u32) -> Rational {
        self.radius_base.mul_pow2(-(mu as i32))
    }

    /// Largest `mu <= max_level` with `d <= r(mu)`; distance zero sits at the top.
    pub fn level_for_distance(&self, d: &Rational, max_level: u32) -> u32 {
        if d.is_zero() {
            return max_level;
        }
        let mut mu = 0;
        while mu < max_level && d.mul_pow2(mu as i32 + 1) <= self.radius_base {
            mu += 1;
        }
        mu
    }

    /// Induced subspace on the given point indices, in the given order.
    pub fn subspace(&self, points: &[usize]) -> Result<Self> {
        if let Some(&p) = points.iter().find(|&&p| p >= self.len()) {
            return Err(Error::InvalidSpace(format!("point index {p} out of range")));
        }
        let labels = points.iter().map(|&p| self.labels[p].clone()).collect();
        let dist = points
            .iter()
            .map(|&i| points.iter().map(|&j| self.dist(i, j).clone()).collect())
            .collect();
        Self::new(labels, dist, self.radius_base.clone())
    }
}

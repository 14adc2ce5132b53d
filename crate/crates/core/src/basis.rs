//! Polynomial feature bases evaluated through their three-term recurrences.
//!
//! Standard (unnormalized) conventions: Chebyshev `T_k`, Legendre `P_k`,
//! probabilists' Hermite `He_k`, Laguerre `L_k`, plain monomials. Inputs are
//! not rescaled; callers map data into the family's natural interval.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Chebyshev,
    Legendre,
    Hermite,
    Laguerre,
    Monomial,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Chebyshev,
        Family::Legendre,
        Family::Hermite,
        Family::Laguerre,
        Family::Monomial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Chebyshev => "chebyshev",
            Family::Legendre => "legendre",
            Family::Hermite => "hermite",
            Family::Laguerre => "laguerre",
            Family::Monomial => "monomial",
        }
    }

    /// `Q_{k+1}(t)` from `Q_k(t)` and `Q_{k-1}(t)`, `k >= 1`.
    #[inline]
    fn next(self, k: usize, t: f64, qk: f64, qkm1: f64) -> f64 {
        let kf = k as f64;
        match self {
            Family::Chebyshev => 2.0 * t * qk - qkm1,
            Family::Legendre => ((2.0 * kf + 1.0) * t * qk - kf * qkm1) / (kf + 1.0),
            Family::Hermite => t * qk - kf * qkm1,
            Family::Laguerre => ((2.0 * kf + 1.0 - t) * qk - kf * qkm1) / (kf + 1.0),
            Family::Monomial => t * qk,
        }
    }

    fn first(self, t: f64) -> f64 {
        match self {
            Family::Laguerre => 1.0 - t,
            _ => t,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// Family plus the number `d` of polynomials `Q_0..Q_{d-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub family: Family,
    pub degree_count: usize,
}

impl BasisSpec {
    pub fn new(family: Family, degree_count: usize) -> Result<Self> {
        if degree_count == 0 {
            return Err(Error::InvalidParameter("basis needs at least one polynomial".into()));
        }
        Ok(BasisSpec {
            family,
            degree_count,
        })
    }

    /// `(Q_0(t), …, Q_{d-1}(t))`
    pub fn evaluate(&self, t: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.degree_count);
        self.evaluate_into(t, &mut out);
        out
    }

    fn evaluate_into(&self, t: f64, out: &mut Vec<f64>) {
        let d = self.degree_count;
        out.push(1.0);
        if d == 1 {
            return;
        }
        let mut prev = 1.0;
        let mut cur = self.family.first(t);
        out.push(cur);
        for k in 1..d - 1 {
            let next = self.family.next(k, t, cur, prev);
            out.push(next);
            prev = cur;
            cur = next;
        }
    }

    /// Row-major `points.len() × d` feature matrix.
    pub fn evaluate_batch(&self, points: &[f64]) -> Result<Vec<f64>> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("no points to evaluate".into()));
        }
        let mut out = Vec::with_capacity(points.len() * self.degree_count);
        for (i, &t) in points.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::InvalidParameter(format!("point {i} is not finite")));
            }
            self.evaluate_into(t, &mut out);
        }
        Ok(out)
    }
}

pub fn evaluate_basis(spec: &BasisSpec, t: f64) -> Vec<f64> {
    spec.evaluate(t)
}

pub fn evaluate_basis_batch(spec: &BasisSpec, points: &[f64]) -> Result<Vec<f64>> {
    spec.evaluate_batch(points)
}

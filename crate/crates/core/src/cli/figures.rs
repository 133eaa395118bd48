//! Plot-ready grids of the characteristic polynomials.

use serde::Serialize;

use crate::characteristic::{build_quartic, limit_polynomial, linear_quadratic, real_roots};
use crate::error::{Error, Result};

pub const DEFAULT_POINTS: usize = 401;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureDataset {
    pub id: Option<u32>,
    pub l: u32,
    /// `n` per value column; `None` marks the `n = infinity` limit curve.
    pub n_list: Vec<Option<f64>>,
    pub lambda: Vec<f64>,
    /// `values[i][j]` is curve `j` at `lambda[i]`.
    pub values: Vec<Vec<f64>>,
}

impl FigureDataset {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["lambda".to_string()];
        for n in &self.n_list {
            h.push(match n {
                Some(n) => format!("phi(n={n})"),
                None => "phi(n=inf)".to_string(),
            });
        }
        h
    }

    pub fn rows(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        self.lambda.iter().zip(&self.values).map(|(&x, v)| {
            let mut row = vec![x];
            row.extend_from_slice(v);
            row
        })
    }
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

/// Range covering both pencil eigenvalues and every real root over `n_list`.
pub fn covering_range(l: u32, n_list: &[f64]) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (-(l as f64) - 1.0, -(l as f64));
    for &n in n_list {
        for r in real_roots(&build_quartic(l, n))? {
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    let pad = 0.25 * (hi - lo).max(1.0);
    Ok((lo - pad, hi + pad))
}

pub fn char_scan(l: u32, n_list: &[f64], range: Option<(f64, f64)>, points: usize) -> Result<FigureDataset> {
    if l == 0 {
        return Err(Error::InvalidArgument("l must be >= 1".into()));
    }
    if n_list.is_empty() || n_list.iter().any(|n| !(*n >= 0.0) || !n.is_finite()) {
        return Err(Error::InvalidArgument(
            "n-list must be nonempty, finite and >= 0".into(),
        ));
    }
    let (lo, hi) = match range {
        Some(r) => r,
        None => covering_range(l, n_list)?,
    };
    if !(lo < hi) {
        return Err(Error::InvalidArgument("lambda range must satisfy min < max".into()));
    }
    let quartics: Vec<_> = n_list.iter().map(|&n| build_quartic(l, n)).collect();
    let lambda = grid(lo, hi, points);
    let values = lambda
        .iter()
        .map(|&x| quartics.iter().map(|q| q.eval(x)).collect())
        .collect();
    Ok(FigureDataset {
        id: None,
        l,
        n_list: n_list.iter().map(|&n| Some(n)).collect(),
        lambda,
        values,
    })
}

/// `(l, steps, denominator)`: the caption lists `n = i / denominator`, `i = 0..=steps`.
fn caption(id: u32) -> Option<(u32, usize, f64)> {
    match id {
        3 => Some((1, 20, 10.0)),
        4 => Some((2, 5, 10.0)),
        5 => Some((3, 10, 100.0)),
        6 => Some((4, 10, 1000.0)),
        _ => None,
    }
}

/// Figure 2 is the `l = 2` limit curve with the `n = 0` quadratic; figures
/// 3 to 6 are `Phi_l` for `l = 1..4` over their captions' `n` values.
pub fn emit_figure(id: u32, points: usize) -> Result<FigureDataset> {
    if id == 2 {
        let f = limit_polynomial(2);
        let lambda = grid(-4.0, 0.0, points);
        let values = lambda
            .iter()
            .map(|&x| vec![f.eval(x), linear_quadratic(2, x)])
            .collect();
        return Ok(FigureDataset {
            id: Some(2),
            l: 2,
            n_list: vec![None, Some(0.0)],
            lambda,
            values,
        });
    }
    let (l, count, denom) =
        caption(id).ok_or_else(|| Error::InvalidArgument(format!("figure id must be in 2..=6, got {id}")))?;
    let n_list: Vec<f64> = (0..=count).map(|i| i as f64 / denom).collect();
    let mut ds = char_scan(l, &n_list, None, points)?;
    ds.id = Some(id);
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_are_rectangular() {
        for id in 2..=6 {
            let ds = emit_figure(id, 101).unwrap();
            assert_eq!(ds.lambda.len(), 101);
            assert!(ds.values.iter().all(|r| r.len() == ds.n_list.len()));
            assert_eq!(ds.header().len(), ds.n_list.len() + 1);
        }
        assert!(emit_figure(7, 10).is_err());
    }

    #[test]
    fn caption_lists() {
        assert_eq!(emit_figure(3, 3).unwrap().n_list.len(), 21);
        let ds = emit_figure(4, 3).unwrap();
        assert_eq!(ds.n_list, [0.0, 0.1, 0.2, 0.3, 0.4, 0.5].map(Some).to_vec());
        assert_eq!(ds.header()[2], "phi(n=0.1)");
        assert_eq!(emit_figure(6, 3).unwrap().n_list[10], Some(0.01));
    }

    #[test]
    fn l1_curves_pass_through_minus_one() {
        let ds = emit_figure(3, 3).unwrap();
        for &n in ds.n_list.iter().flatten() {
            let q = build_quartic(1, n);
            assert!(q.eval(-1.0).abs() <= 1e-12 * q.a0.abs().max(1.0));
        }
    }

    #[test]
    fn l2_root_pair_disappears() {
        let ds = emit_figure(4, 4001).unwrap();
        let sign_changes = |j: usize| {
            ds.values
                .windows(2)
                .filter(|w| w[0][j].signum() != w[1][j].signum())
                .count()
        };
        assert_eq!(sign_changes(1), 2);
        assert_eq!(sign_changes(2), 0);
    }

    #[test]
    fn limit_curve_minimum() {
        let ds = emit_figure(2, 4001).unwrap();
        let min = ds.values.iter().map(|r| r[0]).fold(f64::INFINITY, f64::min);
        let exact = limit_polynomial(2).global_minimum().unwrap().value;
        assert!(min >= exact && min - exact < 1e-5);
    }
}

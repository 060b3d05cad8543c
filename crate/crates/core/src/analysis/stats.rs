//! Chi-square tests over categorical samples.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Observed counts against a reference law, with the chi-square verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub variable: String,
    pub categories: Vec<String>,
    pub observed: Vec<u64>,
    /// Reference probability of each category.
    pub reference: Vec<f64>,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
    pub samples: u64,
}

impl DistributionReport {
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value > significance
    }
}

/// Goodness of fit of `observed` to `reference`. Categories with zero
/// reference mass must be empty and do not count towards the degrees of freedom.
pub fn goodness_of_fit(
    variable: &str,
    categories: Vec<String>,
    observed: Vec<u64>,
    reference: Vec<f64>,
    constraints: usize,
) -> Result<DistributionReport> {
    if observed.len() != reference.len() || categories.len() != observed.len() {
        return Err(Error::Analysis("category count mismatch".into()));
    }
    let samples: u64 = observed.iter().sum();
    if samples == 0 {
        return Err(Error::Analysis("no samples".into()));
    }
    let n = samples as f64;
    let mut chi = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(&reference) {
        if p <= 0.0 {
            if o > 0 {
                chi = f64::INFINITY;
            }
            continue;
        }
        cells += 1;
        let e = n * p;
        chi += (o as f64 - e).powi(2) / e;
    }
    let dof = cells.saturating_sub(constraints).max(1);
    let p_value = if chi.is_finite() {
        ChiSquared::new(dof as f64)
            .map_err(|e| Error::Analysis(e.to_string()))?
            .sf(chi)
            .clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(DistributionReport {
        variable: variable.to_string(),
        categories,
        observed,
        reference,
        chi_square: chi,
        dof,
        p_value,
        samples,
    })
}

/// Pearson independence test on a `rows × cols` table of counts.
pub fn independence(variable: &str, row_names: &[String], col_names: &[String], table: &[Vec<u64>]) -> Result<DistributionReport> {
    let n: u64 = table.iter().flatten().sum();
    if n == 0 {
        return Err(Error::Analysis("no samples".into()));
    }
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64 / n as f64).collect();
    let cols: Vec<f64> = (0..col_names.len())
        .map(|j| table.iter().map(|r| r[j]).sum::<u64>() as f64 / n as f64)
        .collect();
    let live_rows = rows.iter().filter(|&&p| p > 0.0).count();
    let live_cols = cols.iter().filter(|&&p| p > 0.0).count();
    let mut categories = Vec::new();
    let mut observed = Vec::new();
    let mut reference = Vec::new();
    for (i, r) in row_names.iter().enumerate() {
        for (j, c) in col_names.iter().enumerate() {
            categories.push(format!("{r}|{c}"));
            observed.push(table[i][j]);
            reference.push(rows[i] * cols[j]);
        }
    }
    let mut rep = goodness_of_fit(variable, categories, observed, reference, 0)?;
    rep.dof = (live_rows.saturating_sub(1) * live_cols.saturating_sub(1)).max(1);
    rep.p_value = if rep.chi_square.is_finite() {
        ChiSquared::new(rep.dof as f64)
            .map_err(|e| Error::Analysis(e.to_string()))?
            .sf(rep.chi_square)
            .clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit_has_p_one() {
        let r = goodness_of_fit("v", vec!["a".into(), "b".into()], vec![50, 50], vec![0.5, 0.5], 1).unwrap();
        assert_eq!(r.chi_square, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        assert_eq!(r.samples, 100);
    }

    #[test]
    fn known_statistic() {
        // chi^2 = (60-50)^2/50 * 2 = 4 on 1 dof; survival ≈ 0.0455.
        let r = goodness_of_fit("v", vec!["a".into(), "b".into()], vec![60, 40], vec![0.5, 0.5], 1).unwrap();
        assert!((r.chi_square - 4.0).abs() < 1e-12);
        assert!((r.p_value - 0.045_500_263_9).abs() < 1e-8);
    }

    #[test]
    fn impossible_cell_fails() {
        let r = goodness_of_fit("v", vec!["a".into(), "b".into()], vec![1, 9], vec![0.0, 1.0], 1).unwrap();
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn dependent_table_detected() {
        let names = ["0".to_string(), "1".to_string()];
        let r = independence("v", &names, &names, &[vec![500, 0], vec![0, 500]]).unwrap();
        assert!(r.p_value < 1e-10);
        let r = independence("v", &names, &names, &[vec![250, 250], vec![250, 250]]).unwrap();
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }
}

//! Correspondence analysis: mapping the χ²-metric cloud of row profiles
//! into a Euclidean factor space by decomposition of inertia.
//!
//! The decomposition target is the standardized residual matrix with
//! entries `(f_ij − f_i·f_j) / sqrt(f_i·f_j)`. Its singular values squared
//! are the factor moments of inertia `λ_α`, and the principal coordinates
//! are the singular vectors scaled by the singular value and divided by
//! the square root of the point mass. In the resulting space the plain
//! (unweighted) squared Euclidean distance between two row points equals
//! their squared χ² profile distance, which is what makes the factor
//! space a faithful stage for the clustering in
//! [`chronocluster`](crate::chronocluster).
//!
//! Both [`total_inertia`] and [`chi2_sq_distance`] are computed directly
//! from the frequencies, independently of the decomposition, so they can
//! serve as cross-checks on [`analyze`].

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::contingency::{ContingencyTable, FrequencyView};
use crate::error::{Error, Result};
use crate::json::{fmt_f64, json_string};

/// A factor is discarded when its singular value drops below this factor
/// of the leading one (or all factors, when the leading singular value is
/// itself below the same absolute threshold). Numerically null factors are
/// artifacts of the exact linear dependency introduced by centering.
const NULL_FACTOR_RATIO: f64 = 1e-10;

/// Result of decomposing a table's inertia: eigenvalues in non-increasing
/// order and the principal coordinates of both clouds.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorModel {
    /// Moments of inertia `λ_α` (squared singular values), non-increasing.
    pub eigenvalues: Vec<f64>,
    /// Row principal coordinates, `|I| × N`; row order equals table row order.
    pub row_coords: DMatrix<f64>,
    /// Column principal coordinates, `|J| × N`.
    pub col_coords: DMatrix<f64>,
    /// Row masses `f_i`.
    pub row_masses: Vec<f64>,
    /// Column masses `f_j`.
    pub col_masses: Vec<f64>,
    /// Total inertia of the cloud (direct double sum, not `Σλ`).
    pub total_inertia: f64,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

/// Total inertia of the profile cloud: the χ² divergence between the
/// joint frequencies and the product of the marginals,
/// `Σ_ij (f_ij − f_i·f_j)² / (f_i·f_j)`.
pub fn total_inertia(table: &ContingencyTable) -> f64 {
    let fv = FrequencyView::new(table);
    let mut m2 = 0.0;
    for i in 0..fv.f().nrows() {
        for j in 0..fv.f().ncols() {
            let expected = fv.row_masses()[i] * fv.col_masses()[j];
            let dev = fv.f()[(i, j)] - expected;
            m2 += dev * dev / expected;
        }
    }
    m2
}

/// Squared χ² distance between the profiles of rows `i` and `i2`:
/// `Σ_j (1/f_j) · (f_ij/f_i − f_i2j/f_i2)²`.
pub fn chi2_sq_distance(table: &ContingencyTable, i: usize, i2: usize) -> Result<f64> {
    let n = table.n_rows();
    if i >= n || i2 >= n {
        return Err(Error::usage(format!(
            "row index out of range: ({i}, {i2}) for a table with {n} rows"
        )));
    }
    let fv = FrequencyView::new(table);
    let mut d = 0.0;
    for j in 0..fv.f().ncols() {
        let p = fv.f()[(i, j)] / fv.row_masses()[i];
        let q = fv.f()[(i2, j)] / fv.row_masses()[i2];
        d += (p - q) * (p - q) / fv.col_masses()[j];
    }
    Ok(d)
}

/// Decomposes the table's inertia into a [`FactorModel`].
///
/// Requires at least two rows and two columns; numerically null factors
/// are excluded, so an independence-structured table yields zero factors.
/// The output is deterministic: factors are ordered by non-increasing
/// eigenvalue and each factor's sign is fixed so that the row coordinate
/// of largest absolute value is positive (ties broken by earliest row).
pub fn analyze(table: &ContingencyTable) -> Result<FactorModel> {
    let (n, m) = (table.n_rows(), table.n_cols());
    if n < 2 || m < 2 {
        return Err(Error::domain(format!(
            "degenerate cloud: need at least 2 rows and 2 columns, got {n}x{m}"
        )));
    }

    let fv = FrequencyView::new(table);
    let residuals = DMatrix::from_fn(n, m, |i, j| {
        let expected = fv.row_masses()[i] * fv.col_masses()[j];
        (fv.f()[(i, j)] - expected) / expected.sqrt()
    });

    let (u, sv, v) = crate::svd::jacobi_svd(&residuals);

    let rank_cap = (n - 1).min(m - 1);
    let sigma1 = sv[0];
    let n_factors = if sigma1 < NULL_FACTOR_RATIO {
        0
    } else {
        sv.iter()
            .take(rank_cap)
            .filter(|&&sigma| sigma >= NULL_FACTOR_RATIO * sigma1)
            .count()
    };

    let mut row_coords = DMatrix::zeros(n, n_factors);
    let mut col_coords = DMatrix::zeros(m, n_factors);
    let mut eigenvalues = Vec::with_capacity(n_factors);
    for (alpha, &sigma) in sv.iter().take(n_factors).enumerate() {
        eigenvalues.push(sigma * sigma);
        for i in 0..n {
            row_coords[(i, alpha)] = sigma * u[(i, alpha)] / fv.row_masses()[i].sqrt();
        }
        for j in 0..m {
            col_coords[(j, alpha)] = sigma * v[(j, alpha)] / fv.col_masses()[j].sqrt();
        }
    }

    // Sign convention: the row coordinate of largest magnitude on each
    // factor is positive; ties go to the earliest row. A flip must be
    // applied to both clouds to keep the transition relation intact.
    for alpha in 0..n_factors {
        let mut best = 0usize;
        for i in 1..n {
            if row_coords[(i, alpha)].abs() > row_coords[(best, alpha)].abs() {
                best = i;
            }
        }
        if row_coords[(best, alpha)] < 0.0 {
            for i in 0..n {
                row_coords[(i, alpha)] = -row_coords[(i, alpha)];
            }
            for j in 0..m {
                col_coords[(j, alpha)] = -col_coords[(j, alpha)];
            }
        }
    }

    Ok(FactorModel {
        eigenvalues,
        row_coords,
        col_coords,
        row_masses: fv.row_masses().iter().copied().collect(),
        col_masses: fv.col_masses().iter().copied().collect(),
        total_inertia: total_inertia(table),
        row_labels: table.row_labels().to_vec(),
        col_labels: table.col_labels().to_vec(),
    })
}

impl FactorModel {
    /// Number of retained factors `N`.
    pub fn n_factors(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Fraction of the total inertia carried by the first `top_k` factors.
    ///
    /// Returns 1.0 for the degenerate zero-inertia model (where `top_k`
    /// can only be 0); `top_k` beyond the factor count is a usage error.
    pub fn explained_ratio(&self, top_k: usize) -> Result<f64> {
        let n = self.n_factors();
        if top_k > n {
            return Err(Error::usage(format!(
                "top_k {top_k} exceeds the number of factors {n}"
            )));
        }
        if self.total_inertia == 0.0 && n == 0 {
            return Ok(1.0);
        }
        Ok(self.eigenvalues[..top_k].iter().sum::<f64>() / self.total_inertia)
    }

    /// Full-dimensional factor coordinates of every row, in table row
    /// order. Squared Euclidean distances between these points reproduce
    /// the squared χ² profile distances.
    pub fn row_points(&self) -> Vec<Vec<f64>> {
        (0..self.row_coords.nrows())
            .map(|i| self.row_coords.row(i).iter().copied().collect())
            .collect()
    }

    /// Serializes the model to its JSON interchange form, with every
    /// number printed to 17 significant digits (bit-exact round trip).
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\"eigenvalues\":[");
        push_join(&mut out, self.eigenvalues.iter().map(|&x| fmt_f64(x)));
        out.push_str("],\"total_inertia\":");
        out.push_str(&fmt_f64(self.total_inertia));
        out.push_str(",\"row_coords\":");
        push_matrix(&mut out, &self.row_coords);
        out.push_str(",\"col_coords\":");
        push_matrix(&mut out, &self.col_coords);
        out.push_str(",\"row_labels\":[");
        push_join(&mut out, self.row_labels.iter().map(|l| json_string(l)));
        out.push_str("],\"col_labels\":[");
        push_join(&mut out, self.col_labels.iter().map(|l| json_string(l)));
        out.push_str("]}");
        out
    }

    /// Reads a model from its JSON interchange form.
    ///
    /// The interchange format does not carry the point masses (they live
    /// in the source table, and no downstream consumer needs them), so
    /// the mass vectors of the returned model are empty.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Repr {
            eigenvalues: Vec<f64>,
            total_inertia: f64,
            row_coords: Vec<Vec<f64>>,
            col_coords: Vec<Vec<f64>>,
            row_labels: Vec<String>,
            col_labels: Vec<String>,
        }
        let repr: Repr = serde_json::from_str(text)
            .map_err(|e| Error::parse(format!("invalid factor model JSON: {e}")))?;

        let n_factors = repr.eigenvalues.len();
        let check = |rows: &[Vec<f64>], what: &str| -> Result<()> {
            for r in rows {
                if r.len() != n_factors {
                    return Err(Error::parse(format!(
                        "invalid factor model JSON: {what} row has {} coordinates, expected {n_factors}",
                        r.len()
                    )));
                }
            }
            Ok(())
        };
        check(&repr.row_coords, "row_coords")?;
        check(&repr.col_coords, "col_coords")?;
        if repr.row_labels.len() != repr.row_coords.len()
            || repr.col_labels.len() != repr.col_coords.len()
        {
            return Err(Error::parse(
                "invalid factor model JSON: label and coordinate counts disagree",
            ));
        }

        let flatten = |rows: &[Vec<f64>]| -> DMatrix<f64> {
            let cells: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
            DMatrix::from_row_slice(rows.len(), n_factors, &cells)
        };
        Ok(FactorModel {
            eigenvalues: repr.eigenvalues,
            row_coords: flatten(&repr.row_coords),
            col_coords: flatten(&repr.col_coords),
            row_masses: Vec::new(),
            col_masses: Vec::new(),
            total_inertia: repr.total_inertia,
            row_labels: repr.row_labels,
            col_labels: repr.col_labels,
        })
    }
}

fn push_join(out: &mut String, items: impl Iterator<Item = String>) {
    let mut first = true;
    for item in items {
        if !first {
            out.push(',');
        }
        out.push_str(&item);
        first = false;
    }
}

fn push_matrix(out: &mut String, m: &DMatrix<f64>) {
    out.push('[');
    for i in 0..m.nrows() {
        if i > 0 {
            out.push(',');
        }
        out.push('[');
        push_join(out, m.row(i).iter().map(|&x| fmt_f64(x)));
        out.push(']');
    }
    out.push(']');
}

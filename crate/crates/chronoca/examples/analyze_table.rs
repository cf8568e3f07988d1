//! Load a contingency table from CSV and decompose its inertia.
//!
//! ```bash
//! cargo run --example analyze_table
//! ```

use chronoca::{analyze, chi2_sq_distance, total_inertia, ContingencyTable};

fn main() -> chronoca::Result<()> {
    // four ordered observations crossed by three attributes
    let csv = "\
obs,cafe,street,airport
t1,20,70,10
t2,25,65,15
t3,70,20,30
t4,75,15,40
";
    let (table, warnings) = ContingencyTable::from_csv(csv.as_bytes())?;
    assert!(warnings.is_empty());

    println!("table: {} rows x {} cols, grand total {}", table.n_rows(), table.n_cols(), table.grand_total());
    println!("total inertia (direct double sum): {:.6}", total_inertia(&table));

    let model = analyze(&table)?;
    println!("factors: {}", model.n_factors());
    for (alpha, lambda) in model.eigenvalues.iter().enumerate() {
        println!(
            "  factor {}: lambda = {lambda:.6} ({:.1}% of inertia)",
            alpha + 1,
            100.0 * lambda / model.total_inertia
        );
    }

    println!("row coordinates (full dimension):");
    for (label, point) in model.row_labels.iter().zip(model.row_points()) {
        let coords: Vec<String> = point.iter().map(|c| format!("{c:+.4}")).collect();
        println!("  {label}: [{}]", coords.join(", "));
    }

    // the factor space is an isometric image of the chi-squared geometry
    let points = model.row_points();
    let d_factor: f64 = points[0]
        .iter()
        .zip(&points[2])
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let d_chi2 = chi2_sq_distance(&table, 0, 2)?;
    println!("squared distance rows 1-3: factor space {d_factor:.12}, chi2 {d_chi2:.12}");
    Ok(())
}

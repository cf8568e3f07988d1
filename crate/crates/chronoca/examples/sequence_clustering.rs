//! Cluster an ordered point sequence under the contiguity constraint and
//! inspect the induced ultrametric.
//!
//! ```bash
//! cargo run --example sequence_clustering
//! ```

use chronoca::{cluster_sequence, verify_ultrametric};
use nalgebra::DMatrix;

fn main() -> chronoca::Result<()> {
    // two tight pairs separated by a wide gap
    let points: Vec<Vec<f64>> = [0.0, 1.0, 10.0, 11.0].iter().map(|&x| vec![x]).collect();
    let dend = cluster_sequence(&points)?;

    println!("merges (only adjacent segments may fuse):");
    for m in dend.merges() {
        println!(
            "  {} + {} -> span {:?} at height {}",
            m.left, m.right, m.span, m.height
        );
    }

    println!("cophenetic matrix (the induced ultrametric):");
    let coph = dend.cophenetic();
    for i in 0..dend.n_leaves() {
        let row: Vec<String> = (0..dend.n_leaves()).map(|j| format!("{:4}", coph[(i, j)])).collect();
        println!("  {}", row.join(" "));
    }
    assert!(verify_ultrametric(&coph)?.is_empty());
    println!("strong triangle inequality holds for every triple");

    // an ordinary Euclidean line is not ultrametric: 0, 1, 2
    let line = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0]);
    for v in verify_ultrametric(&line)? {
        println!(
            "collinear points violate it: d({},{}) = {} > max = {} (via {})",
            v.x, v.y, v.lhs, v.rhs, v.z
        );
    }
    Ok(())
}

//! Render the factor plane and the dendrogram as SVG files.
//!
//! ```bash
//! cargo run --example render_plots
//! ```

use chronoca::{analyze, cluster_sequence, render_dendrogram, render_factor_map, ContingencyTable};

fn main() -> chronoca::Result<()> {
    let csv = "\
obs,int,ext,day,night
s1,6,1,5,2
s2,5,2,1,6
s3,1,6,6,1
s4,2,5,2,5
s5,6,2,6,2
s6,1,5,1,5
";
    let (table, _) = ContingencyTable::from_csv(csv.as_bytes())?;
    let model = analyze(&table)?;

    let map = render_factor_map(&model, (1, 2))?;
    let dend = cluster_sequence(&model.row_points())?;
    let tree = render_dendrogram(&dend, table.row_labels())?;

    let dir = std::env::temp_dir();
    let map_path = dir.join("chronoca_factor_map.svg");
    let tree_path = dir.join("chronoca_dendrogram.svg");
    std::fs::write(&map_path, &map)?;
    std::fs::write(&tree_path, &tree)?;

    println!("factor map ({} bytes): {}", map.len(), map_path.display());
    println!("dendrogram ({} bytes): {}", tree.len(), tree_path.display());
    Ok(())
}

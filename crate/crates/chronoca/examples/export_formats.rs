//! The interchange formats: factor-model JSON, dendrogram JSON, Newick.
//!
//! ```bash
//! cargo run --example export_formats
//! ```

use chronoca::{analyze, cluster_sequence, ContingencyTable, Dendrogram, FactorModel};

fn main() -> chronoca::Result<()> {
    let csv = "obs,a,b\nt1,20,80\nt2,25,75\nt3,70,30\nt4,75,25";
    let (table, _) = ContingencyTable::from_csv(csv.as_bytes())?;
    let model = analyze(&table)?;

    // numbers carry 17 significant digits, so the round trip is bit-exact
    let factors_json = model.to_json();
    println!("factors.json:\n{factors_json}\n");
    let restored = FactorModel::from_json(&factors_json)?;
    assert_eq!(restored.to_json(), factors_json);

    let dend = cluster_sequence(&model.row_points())?;
    let dend_json = dend.to_json();
    println!("dendrogram.json:\n{dend_json}\n");
    let restored = Dendrogram::from_json(&dend_json)?;
    assert_eq!(restored, dend);

    // leaf depth equals the root height: branch = parent height - own height
    println!("newick:\n{}", dend.to_newick(table.row_labels())?);
    Ok(())
}

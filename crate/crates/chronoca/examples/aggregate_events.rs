//! Sum a timestamped event log into calendar bins.
//!
//! ```bash
//! cargo run --example aggregate_events
//! ```

use chronoca::{EventLog, TimeBin};

fn main() -> chronoca::Result<()> {
    // header "date,<attr>,..."; dates are ISO-8601
    let csv = "\
date,clashes,attacks
1988-01-05,2,0
1988-01-20,3,1
1988-02-01,1,4
1988-04-17,5,5
1989-01-02,7,0
";
    let log = EventLog::from_csv(csv.as_bytes())?;
    println!("{} events, attributes {:?}", log.records().len(), log.attr_labels());

    let (monthly, pruned) = log.aggregate(TimeBin::Month)?;
    // 1988-03 had no events: its empty bin is dropped with a warning
    for warning in pruned.warnings() {
        eprintln!("{warning}");
    }
    println!("monthly rows ({}):", monthly.n_rows());
    for (i, label) in monthly.row_labels().iter().enumerate() {
        let cells: Vec<String> = (0..monthly.n_cols())
            .map(|j| format!("{}", monthly.counts()[(i, j)]))
            .collect();
        println!("  {label}: {}", cells.join(" "));
    }

    let (yearly, _) = log.aggregate(TimeBin::Year)?;
    println!("yearly rows: {:?}", yearly.row_labels());
    Ok(())
}

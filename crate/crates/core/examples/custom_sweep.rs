//! A generic one-axis sweep over a configuration path, written out through
//! the same tables the command-line tool emits.

use hybridmem::cli::{compute_tables, parse_document, render, Format, Scenario, MANIFEST_FILE};

fn main() -> hybridmem::Result<()> {
    let doc = parse_document(include_str!("../configs/custom-sweep.json"), &[])?;
    for table in compute_tables(Scenario::CustomSweep, &doc)? {
        let csv = render(&table, Format::Csv, MANIFEST_FILE)?;
        print!("{}", String::from_utf8_lossy(&csv));
    }
    Ok(())
}

//! Loading data-driven means from CSV.
//!
//! Schema: a header row `x,y,value`, then one row per grid node. The nodes
//! must form a full rectangular grid; the mean's domain is the overlap of
//! the x and y ranges. Values are interpolated bilinearly and clipped into
//! `[min(x, y), max(x, y)]`.

use std::io::Read;
use std::path::Path;

use gauss_means::{MeanSpec, TableMean};

use crate::CliError;

pub const TABLE_PREFIX: &str = "table:";

pub const TABLE_SCHEMA: &str = "CSV with header `x,y,value` and one row per node of a full rectangular grid";

pub fn read_table<R: Read>(reader: R) -> Result<TableMean, CliError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| CliError::Usage(format!("table: {e}")))?;
    if headers.iter().collect::<Vec<_>>() != ["x", "y", "value"] {
        return Err(CliError::Usage(format!(
            "table: expected header x,y,value ({TABLE_SCHEMA})"
        )));
    }
    let mut triples = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::Usage(format!("table: {e}")))?;
        let field = |i: usize| -> Result<f64, CliError> {
            record
                .get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| CliError::Usage(format!("table: bad number on data row {}", line + 1)))
        };
        triples.push((field(0)?, field(1)?, field(2)?));
    }
    TableMean::from_triples(&triples).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn load_table(path: &Path) -> Result<MeanSpec, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Usage(format!("table {}: {e}", path.display())))?;
    Ok(MeanSpec::table(read_table(file)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use gauss_means::Mean;

    #[test]
    fn reads_grid() {
        let csv = "x,y,value\n0,0,0\n0,2,1\n2,0,1\n2,2,2\n";
        let m = MeanSpec::table(read_table(csv.as_bytes()).unwrap());
        assert_eq!(m.eval(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(m.eval(0.0, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_table("a,b,c\n0,0,0\n".as_bytes()).is_err());
        assert!(read_table("x,y,value\n0,0,zero\n".as_bytes()).is_err());
        assert!(read_table("x,y,value\n0,0,0\n1,1,1\n".as_bytes()).is_err());
    }
}

//! CSV panel ingestion and export.
//!
//! Dialect: comma-separated, header required, UTF-8, '.' decimal point,
//! booleans as 0/1. One row per (individual, time) cell.

use crate::{CliError, CliResult};
use std::path::Path;
use twofe::panel::{build_panel, DropLog, Key, PanelData, RegressorKind, Row};

/// Column roles for ingestion.
#[derive(Debug, Clone)]
pub struct ColumnRoles {
    pub outcome: String,
    pub indiv: String,
    pub time: String,
    /// (column name, kind) in report order.
    pub regressors: Vec<(String, RegressorKind)>,
    /// Optional marker naming which regressor is the lagged outcome.
    pub lag_regressor: Option<String>,
}

impl ColumnRoles {
    pub fn validate(&self) -> CliResult<()> {
        let mut names: Vec<&str> = vec![&self.outcome, &self.indiv, &self.time];
        names.extend(self.regressors.iter().map(|(n, _)| n.as_str()));
        let mut sorted = names.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(CliError::Usage("column roles must be distinct".into()));
        }
        if let Some(lag) = &self.lag_regressor {
            if !self.regressors.iter().any(|(n, _)| n == lag) {
                return Err(CliError::Usage(format!(
                    "lag regressor `{lag}` is not among the declared regressors"
                )));
            }
        }
        Ok(())
    }
}

fn parse_f64(field: &str, row: usize, col: &str) -> CliResult<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        CliError::Data(format!(
            "line {}: column `{col}`: `{field}` is not a number",
            row + 2
        ))
    })
}

/// Read a panel CSV. Row numbers in errors refer to file lines (1-based,
/// header included).
pub fn read_panel_csv(path: &Path, roles: &ColumnRoles) -> CliResult<(PanelData, DropLog)> {
    roles.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let headers = rdr.headers()?.clone();
    let find = |name: &str| -> CliResult<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("missing column `{name}` in header")))
    };
    let c_out = find(&roles.outcome)?;
    let c_ind = find(&roles.indiv)?;
    let c_time = find(&roles.time)?;
    let c_regs: Vec<usize> = roles
        .regressors
        .iter()
        .map(|(n, _)| find(n))
        .collect::<CliResult<_>>()?;

    let mut rows = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Data(format!("line {}: {e}", r + 2)))?;
        let get = |c: usize, name: &str| -> CliResult<&str> {
            rec.get(c)
                .ok_or_else(|| CliError::Data(format!("line {}: missing column `{name}`", r + 2)))
        };
        let y = parse_f64(get(c_out, &roles.outcome)?, r, &roles.outcome)?;
        let time_raw = get(c_time, &roles.time)?.trim();
        let time = time_raw.parse::<i64>().map_err(|_| {
            CliError::Data(format!(
                "line {}: column `{}`: `{time_raw}` is not an integer period",
                r + 2,
                roles.time
            ))
        })?;
        let indiv = Key::from(get(c_ind, &roles.indiv)?.trim());
        let x = c_regs
            .iter()
            .zip(&roles.regressors)
            .map(|(&c, (name, _))| parse_f64(get(c, name)?, r, name))
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(Row { indiv, time, y, x });
    }
    let names: Vec<String> = roles.regressors.iter().map(|(n, _)| n.clone()).collect();
    let kinds: Vec<RegressorKind> = roles.regressors.iter().map(|(_, k)| *k).collect();
    Ok(build_panel(rows, names, kinds)?)
}

/// Export a panel in the same dialect (used for round trips and examples).
pub fn write_panel_csv(path: &Path, panel: &PanelData, roles: &ColumnRoles) -> CliResult<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    let mut header = vec![
        roles.indiv.clone(),
        roles.time.clone(),
        roles.outcome.clone(),
    ];
    header.extend(panel.names().iter().cloned());
    wtr.write_record(&header)?;
    for row in panel.to_rows() {
        let mut rec = vec![
            row.indiv.to_string(),
            row.time.to_string(),
            row.y.to_string(),
        ];
        rec.extend(row.x.iter().map(|v| v.to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

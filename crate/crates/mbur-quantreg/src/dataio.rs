//! CSV ingestion, predictor transformation, and design assembly.
//!
//! Tables are rectangular with a header row and a row-label first column;
//! empty cells are missing values. Model building drops every row with a
//! missing value in a used column (listwise deletion), applies the
//! divide-by-100-then-log transformation to predictors, and prepends the
//! intercept column.

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::qreg::{DesignData, ModelSpec};
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::{Read, Write};

/// The bundled OECD better-life indicator extract, embedded verbatim.
const OECD_BLI_CSV: &str = include_str!("../data/oecd_bli.csv");

/// A rectangular table of optional numeric cells keyed by row label.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    /// Header of the label column (for example "country").
    pub label_name: String,
    pub column_names: Vec<String>,
    pub row_labels: Vec<String>,
    /// Row-major cells; `None` is a missing value.
    pub cells: Vec<Vec<Option<f64>>>,
}

impl DataTable {
    pub fn n_rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.column_names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// One column, missing values included.
    pub fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let idx = self.column_index(name)?;
        Ok(self.cells.iter().map(|row| row[idx]).collect())
    }

    /// The values of one column with missing cells dropped.
    pub fn column_complete(&self, name: &str) -> Result<Vec<f64>> {
        Ok(self.column(name)?.into_iter().flatten().collect())
    }

    /// Rows complete in every named column, as (labels, per-column values).
    pub fn listwise_complete(
        &self,
        names: &[String],
    ) -> Result<(Vec<String>, Vec<(String, Vec<f64>)>)> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.column_index(n))
            .collect::<Result<_>>()?;
        let mut labels = Vec::new();
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
        for (r, row) in self.cells.iter().enumerate() {
            if idx.iter().all(|&c| row[c].is_some()) {
                labels.push(self.row_labels[r].clone());
                for (k, &c) in idx.iter().enumerate() {
                    cols[k].push(row[c].unwrap());
                }
            }
        }
        Ok((
            labels,
            names.iter().cloned().zip(cols).collect(),
        ))
    }

    /// Writes the table back out as CSV, cell-exact for reloading.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = vec![self.label_name.clone()];
        header.extend(self.column_names.iter().cloned());
        writeln!(w, "{}", header.join(","))?;
        for (label, row) in self.row_labels.iter().zip(&self.cells) {
            let mut fields = vec![label.clone()];
            for cell in row {
                fields.push(match cell {
                    Some(v) => format!("{v}"),
                    None => String::new(),
                });
            }
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

/// Parses a CSV table: header row, label first column, "." decimal
/// separator, empty string for missing. Ragged rows, duplicate labels and
/// unparseable cells are rejected with coordinates.
pub fn load_csv<R: Read>(source: R) -> Result<DataTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader.headers()?.clone();
    if headers.len() < 2 {
        return Err(Error::Domain(
            "load_csv: need a label column and at least one data column".into(),
        ));
    }
    let label_name = headers[0].to_string();
    let column_names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();

    let mut row_labels: Vec<String> = Vec::new();
    let mut cells = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let label = record[0].to_string();
        if row_labels.contains(&label) {
            return Err(Error::DuplicateLabel(label));
        }
        let mut row = Vec::with_capacity(column_names.len());
        for (c, field) in record.iter().skip(1).enumerate() {
            if field.is_empty() {
                row.push(None);
            } else {
                let value: f64 = field.parse().map_err(|_| Error::Parse {
                    row: r + 2,
                    column: c + 2,
                    message: format!("cannot parse '{field}' as a number"),
                })?;
                row.push(Some(value));
            }
        }
        row_labels.push(label);
        cells.push(row);
    }
    Ok(DataTable {
        label_name,
        column_names,
        row_labels,
        cells,
    })
}

/// The embedded OECD table (41 countries, 9 indicators).
pub fn oecd_bli() -> DataTable {
    load_csv(OECD_BLI_CSV.as_bytes()).expect("embedded fixture parses")
}

/// Element-wise ln(x / 100); every entry must be positive.
pub fn transform_div100_log(x: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = x.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Domain(format!(
            "transform_div100_log: nonpositive value {} at index {bad}",
            x[bad]
        )));
    }
    Ok(x.iter().map(|v| (v / 100.0).ln()).collect())
}

/// Per-column transformation kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TransformKind {
    Identity,
    Div100Log,
}

/// Which transformation each predictor receives. Responses are always used
/// untransformed (they are already proportions).
#[derive(Debug, Clone)]
pub struct TransformSpec {
    predictor_default: TransformKind,
    overrides: BTreeMap<String, TransformKind>,
}

impl TransformSpec {
    /// The standard pipeline: every predictor divided by 100 and logged.
    pub fn standard() -> Self {
        TransformSpec {
            predictor_default: TransformKind::Div100Log,
            overrides: BTreeMap::new(),
        }
    }

    /// No transformation anywhere.
    pub fn identity() -> Self {
        TransformSpec {
            predictor_default: TransformKind::Identity,
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_override(mut self, column: &str, kind: TransformKind) -> Self {
        self.overrides.insert(column.to_string(), kind);
        self
    }

    pub fn kind_for(&self, column: &str) -> TransformKind {
        self.overrides
            .get(column)
            .copied()
            .unwrap_or(self.predictor_default)
    }

    pub fn predictor_default(&self) -> TransformKind {
        self.predictor_default
    }
}

/// Assembles the regression design for `spec`: listwise deletion over the
/// used columns, predictor transformation, intercept column, and response
/// range validation.
pub fn build_design(
    table: &DataTable,
    spec: &ModelSpec,
    transforms: &TransformSpec,
) -> Result<DesignData> {
    let mut used = vec![spec.response.clone()];
    used.extend(spec.predictors.iter().cloned());
    let (labels, columns) = table.listwise_complete(&used)?;
    let n = labels.len();
    let k = spec.predictors.len();
    if n < k + 2 {
        return Err(Error::InsufficientData(format!(
            "build_design: {n} complete rows for {} parameters",
            k + 1
        )));
    }

    let y = columns[0].1.clone();
    let mut transformed: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (name, values) in &columns[1..] {
        let t = match transforms.kind_for(name) {
            TransformKind::Identity => values.clone(),
            TransformKind::Div100Log => transform_div100_log(values).map_err(|e| {
                Error::Domain(format!("predictor '{name}': {e}"))
            })?,
        };
        transformed.push(t);
    }

    let mut entries = Vec::with_capacity(n * (k + 1));
    for r in 0..n {
        entries.push(1.0);
        for col in &transformed {
            entries.push(col[r]);
        }
    }
    DesignData::new(y, Matrix::new(n, k + 1, entries)?, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::links::LinkKind;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fixture_shape() {
        let t = oecd_bli();
        assert_eq!(t.n_rows(), 41);
        assert_eq!(t.column_names.len(), 9);
        assert_eq!(t.label_name, "country");
        // Japan has no education-attainment value
        let edu = t.column("education_attainment").unwrap();
        let japan = t.row_labels.iter().position(|l| l == "Japan").unwrap();
        assert!(edu[japan].is_none());
        assert_eq!(edu.iter().filter(|c| c.is_some()).count(), 40);
    }

    #[test]
    fn parse_error_carries_coordinates() {
        let bad = "id,a,b\nr1,1.5,abc\n";
        match load_csv(bad.as_bytes()) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, 3);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let dup = "id,a\nr1,1\nr1,2\n";
        assert!(matches!(
            load_csv(dup.as_bytes()),
            Err(Error::DuplicateLabel(_))
        ));
        let ragged = "id,a,b\nr1,1\n";
        assert!(load_csv(ragged.as_bytes()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = oecd_bli();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = load_csv(buf.as_slice()).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn transform_examples() {
        assert_abs_diff_eq!(
            transform_div100_log(&[100.0]).unwrap()[0],
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            transform_div100_log(&[70.0]).unwrap()[0],
            -0.356_674_943_938_732_3,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            transform_div100_log(&[0.9]).unwrap()[0],
            -4.710_530_701_645_918,
            epsilon = 1e-12
        );
        let err = transform_div100_log(&[1.0, 0.0]).unwrap_err();
        assert!(err.to_string().contains("index 1"));
    }

    #[test]
    fn design_drops_incomplete_rows_in_order() {
        let t = oecd_bli();
        let spec = ModelSpec::new("education_attainment", &["employment_rate"], LinkKind::Logit)
            .unwrap();
        let d = build_design(&t, &spec, &TransformSpec::standard()).unwrap();
        assert_eq!(d.n, 40);
        assert!(!d.row_labels.contains(&"Japan".to_string()));
        // order-stable listwise deletion
        let expected: Vec<String> = t
            .row_labels
            .iter()
            .filter(|l| *l != "Japan")
            .cloned()
            .collect();
        assert_eq!(d.row_labels, expected);
        // transformed predictor in column 1
        let australia = d.row_labels.iter().position(|l| l == "Australia").unwrap();
        assert_abs_diff_eq!(d.x[(australia, 1)], (73.0_f64 / 100.0).ln(), epsilon = 1e-12);

        let spec_water =
            ModelSpec::new("water_quality", &["employment_rate"], LinkKind::Logit).unwrap();
        let dw = build_design(&t, &spec_water, &TransformSpec::standard()).unwrap();
        assert_eq!(dw.n, 41);

        let missing = ModelSpec::new("nonexistent", &["employment_rate"], LinkKind::Logit).unwrap();
        assert!(matches!(
            build_design(&t, &missing, &TransformSpec::standard()),
            Err(Error::UnknownColumn(_))
        ));
    }

    #[test]
    fn listwise_count_matches_recount() {
        let t = oecd_bli();
        let used = vec![
            "education_attainment".to_string(),
            "employment_rate".to_string(),
            "air_pollution".to_string(),
        ];
        let (labels, _) = t.listwise_complete(&used).unwrap();
        let recount = t
            .cells
            .iter()
            .filter(|row| {
                used.iter()
                    .all(|name| row[t.column_index(name).unwrap()].is_some())
            })
            .count();
        assert_eq!(labels.len(), recount);
    }

    #[test]
    fn no_transform_keeps_raw_scale() {
        let t = oecd_bli();
        let spec = ModelSpec::new("water_quality", &["employment_rate"], LinkKind::Logit).unwrap();
        let d = build_design(&t, &spec, &TransformSpec::identity()).unwrap();
        assert_abs_diff_eq!(d.x[(0, 1)], 73.0, epsilon = 1e-12);
    }
}

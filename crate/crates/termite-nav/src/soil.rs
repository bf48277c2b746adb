//! Soil rasters: a CSV of integer cat values plus a JSON cat-value table.

use std::collections::BTreeMap;

use termite_nav_core::grid::Grid;
use termite_nav_core::terrain::{categorize_soil, CatMapping, SoilCategory};

use crate::error::{Error, Result};

/// Parses a headerless CSV of integers into a raster.
pub fn read_cat_csv(bytes: &[u8]) -> Result<Grid<i64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes);
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::malformed("soil CSV", e))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(n) if n != record.len() => {
                return Err(Error::malformed(
                    "soil CSV",
                    format!("row {} has {} values, expected {n}", line + 1, record.len()),
                ))
            }
            _ => {}
        }
        for field in &record {
            let v = field.parse::<i64>().map_err(|_| {
                Error::malformed("soil CSV", format!("row {}: {field:?} is not an integer", line + 1))
            })?;
            values.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::malformed("soil CSV", "no rows"))?;
    Ok(Grid::from_vec(rows, cols, values).expect("row lengths checked"))
}

/// Parses `{"catValue": "CategoryName", ...}`.
pub fn read_cat_mapping(bytes: &[u8]) -> Result<CatMapping> {
    let raw: BTreeMap<String, String> =
        serde_json::from_slice(bytes).map_err(|e| Error::malformed("cat mapping", e))?;
    cat_mapping_from(&raw)
}

pub fn cat_mapping_from(raw: &BTreeMap<String, String>) -> Result<CatMapping> {
    raw.iter()
        .map(|(k, v)| {
            let key = k
                .trim()
                .parse::<i64>()
                .map_err(|_| Error::malformed("cat mapping", format!("key {k:?} is not an integer")))?;
            let cat = SoilCategory::from_name(v)
                .ok_or_else(|| Error::malformed("cat mapping", format!("unknown soil category {v:?}")))?;
            Ok((key, cat))
        })
        .collect()
}

/// Loads a soil raster and checks it against the `(rows, cols)` of the
/// sub-sampled height grid.
pub fn load_soilmap(bytes: &[u8], mapping: &CatMapping, expected: (usize, usize)) -> Result<Grid<SoilCategory>> {
    let cats = read_cat_csv(bytes)?;
    Ok(categorize_soil(&cats, mapping, expected)?)
}

/// Writes a soil raster back as cat values using the first cat value mapped
/// to each category.
pub fn write_cat_csv(soil: &Grid<SoilCategory>, mapping: &CatMapping) -> Result<Vec<u8>> {
    let mut reverse = BTreeMap::new();
    for (&v, &cat) in mapping {
        reverse.entry(cat).or_insert(v);
    }
    let mut out = String::new();
    for r in 0..soil.rows() {
        let row: Result<Vec<String>> = (0..soil.cols())
            .map(|c| {
                let cat = soil[(r, c)];
                reverse
                    .get(&cat)
                    .map(i64::to_string)
                    .ok_or_else(|| Error::Usage(format!("no cat value maps to {cat}")))
            })
            .collect();
        out.push_str(&row?.join(","));
        out.push('\n');
    }
    Ok(out.into_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use termite_nav_core::terrain::TerrainError;

    fn mapping() -> CatMapping {
        read_cat_mapping(br#"{"1": "Gravel", "2": "rock"}"#).unwrap()
    }

    #[test]
    fn two_by_two() {
        let soil = load_soilmap(b"1,1\n2,2", &mapping(), (2, 2)).unwrap();
        assert_eq!(soil.as_slice(), &[SoilCategory::Gravel, SoilCategory::Gravel, SoilCategory::Rock, SoilCategory::Rock]);
        assert_eq!(write_cat_csv(&soil, &mapping()).unwrap(), b"1,1\n2,2\n");
    }

    #[test]
    fn unknown_cat_value() {
        let e = load_soilmap(b"1,3\n2,2", &mapping(), (2, 2)).unwrap_err();
        assert!(matches!(e, Error::Terrain(TerrainError::UnknownCatValue(3))));
    }

    #[test]
    fn dimension_mismatch() {
        let e = load_soilmap(b"1,1,1\n1,1,1\n1,1,1", &mapping(), (2, 2)).unwrap_err();
        assert!(matches!(e, Error::Terrain(TerrainError::DimensionMismatch { .. })));
    }

    #[test]
    fn ragged_and_garbage() {
        assert!(matches!(read_cat_csv(b"1,1\n1"), Err(Error::MalformedFormat { .. })));
        assert!(matches!(read_cat_csv(b"1,x"), Err(Error::MalformedFormat { .. })));
        assert!(matches!(read_cat_csv(b""), Err(Error::MalformedFormat { .. })));
        assert!(matches!(read_cat_mapping(br#"{"a": "Gravel"}"#), Err(Error::MalformedFormat { .. })));
        assert!(matches!(read_cat_mapping(br#"{"1": "Lava"}"#), Err(Error::MalformedFormat { .. })));
    }

    #[test]
    fn spaces_and_blank_lines() {
        let g = read_cat_csv(b" 1 , 2\n\n3,4\n").unwrap();
        assert_eq!((g.rows(), g.cols()), (2, 2));
        assert_eq!(g.as_slice(), &[1, 2, 3, 4]);
    }
}

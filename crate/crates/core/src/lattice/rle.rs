//! One-line run-length text form of configurations, used for snapshot dumps.
//!
//! ```text
//! exclusion left=-4 out_right=0 out_right_particles=0 cells=2*0,3*1,3*0
//! spread anchor=-9 mass=2 out_right=1 out_right_particles=0 births_left=0 births_right=0 cells=4*1,4*0
//! ```

use std::collections::HashMap;

use super::{ExclusionConfig, SpreadConfig};
use crate::error::{Error, Result};

pub fn encode_cells(cells: &[u8]) -> String {
    let mut runs: Vec<String> = Vec::new();
    let mut i = 0;
    while i < cells.len() {
        let v = cells[i];
        let mut j = i;
        while j < cells.len() && cells[j] == v {
            j += 1;
        }
        runs.push(format!("{}*{}", j - i, v));
        i = j;
    }
    runs.join(",")
}

pub fn decode_cells(text: &str) -> Result<Vec<u8>> {
    let mut cells = Vec::new();
    if text.is_empty() {
        return Ok(cells);
    }
    for run in text.split(',') {
        let (count, value) = run
            .split_once('*')
            .ok_or_else(|| Error::Parse(format!("run `{run}` is not COUNT*VALUE")))?;
        let count: usize = count
            .parse()
            .map_err(|_| Error::Parse(format!("bad run length in `{run}`")))?;
        let value: u8 = match value {
            "0" => 0,
            "1" => 1,
            _ => return Err(Error::Parse(format!("bad cell value in `{run}`"))),
        };
        cells.extend(std::iter::repeat_n(value, count));
    }
    Ok(cells)
}

fn fields<'a>(line: &'a str, kind: &str) -> Result<HashMap<&'a str, &'a str>> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(kind) {
        return Err(Error::Parse(format!("expected a `{kind}` record")));
    }
    parts
        .map(|p| {
            p.split_once('=')
                .ok_or_else(|| Error::Parse(format!("field `{p}` is not KEY=VALUE")))
        })
        .collect()
}

fn field<T: std::str::FromStr>(map: &HashMap<&str, &str>, key: &str) -> Result<T> {
    map.get(key)
        .ok_or_else(|| Error::Parse(format!("missing field `{key}`")))?
        .parse()
        .map_err(|_| Error::Parse(format!("bad value for `{key}`")))
}

pub fn exclusion_to_rle(c: &ExclusionConfig) -> String {
    format!(
        "exclusion left={} out_right={} out_right_particles={} cells={}",
        c.window_left(),
        c.out_right(),
        c.out_right_particles(),
        encode_cells(c.cells())
    )
}

pub fn exclusion_from_rle(line: &str) -> Result<ExclusionConfig> {
    let map = fields(line, "exclusion")?;
    let cells = decode_cells(map.get("cells").copied().unwrap_or(""))?;
    Ok(
        ExclusionConfig::new(field(&map, "left")?, cells)?.with_audit(
            field(&map, "out_right")?,
            field(&map, "out_right_particles")?,
        ),
    )
}

pub fn spread_to_rle(c: &SpreadConfig) -> String {
    format!(
        "spread anchor={} mass={} out_right={} out_right_particles={} births_left={} births_right={} cells={}",
        c.anchor(),
        c.mass_n(),
        c.out_right(),
        c.out_right_particles(),
        c.births_left(),
        c.births_right(),
        encode_cells(c.cells())
    )
}

pub fn spread_from_rle(line: &str) -> Result<SpreadConfig> {
    let map = fields(line, "spread")?;
    let cells = decode_cells(map.get("cells").copied().unwrap_or(""))?;
    Ok(
        SpreadConfig::new(cells, field(&map, "anchor")?, field(&map, "mass")?)?.with_audit(
            field(&map, "out_right")?,
            field(&map, "out_right_particles")?,
            field(&map, "births_left")?,
            field(&map, "births_right")?,
        ),
    )
}

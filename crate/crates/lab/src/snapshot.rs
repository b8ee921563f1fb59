//! Field snapshots: one line of JSON header, then the physical samples of
//! every field as little-endian `f64`, concatenated in header order.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use oldroyd_core::oldroyd::FluidState;
use oldroyd_core::{GridSpec, SpectralField};
use serde::{Deserialize, Serialize};

use crate::error::LabError;

pub const LAYOUT: &str = "row-major";
pub const SCALAR: &str = "float64-le";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub dim: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub fields: Vec<String>,
    pub layout: String,
    pub scalar: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub grid: GridSpec,
    pub time: Option<f64>,
    pub fields: Vec<(String, SpectralField)>,
}

impl Snapshot {
    pub fn field(&self, name: &str) -> Option<&SpectralField> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }
}

pub fn write_snapshot<W: Write>(out: &mut W, time: Option<f64>, fields: &[(String, &SpectralField)]) -> std::io::Result<()> {
    let grid = match fields.first() {
        Some((_, f)) => *f.grid(),
        None => return Err(std::io::Error::new(std::io::ErrorKind::InvalidInput, "a snapshot needs at least one field")),
    };
    let header = SnapshotHeader {
        dim: grid.dim(),
        m: grid.points(),
        fields: fields.iter().map(|(n, _)| n.clone()).collect(),
        layout: LAYOUT.into(),
        scalar: SCALAR.into(),
        time,
    };
    serde_json::to_writer(&mut *out, &header)?;
    out.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(8 * grid.len());
    for (_, f) in fields {
        buf.clear();
        for x in f.to_samples() {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(input: R) -> Result<Snapshot, String> {
    let mut reader = BufReader::new(input);
    let mut line = Vec::new();
    reader.read_until(b'\n', &mut line).map_err(|e| e.to_string())?;
    if line.last() != Some(&b'\n') {
        return Err("missing header line".into());
    }
    let header: SnapshotHeader = serde_json::from_slice(&line).map_err(|e| format!("bad header: {e}"))?;
    if header.layout != LAYOUT || header.scalar != SCALAR {
        return Err(format!("unsupported layout {:?} / scalar {:?}", header.layout, header.scalar));
    }
    if header.fields.is_empty() {
        return Err("header lists no fields".into());
    }
    let grid = GridSpec::new(header.dim, header.m).map_err(|e| e.to_string())?;
    let mut fields = Vec::with_capacity(header.fields.len());
    let mut bytes = vec![0u8; 8 * grid.len()];
    for name in &header.fields {
        reader
            .read_exact(&mut bytes)
            .map_err(|_| format!("data of field {name:?} is truncated"))?;
        let samples: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(format!("field {name:?} holds non-finite samples"));
        }
        fields.push((name.clone(), SpectralField::from_samples(&grid, &samples).map_err(|e| e.to_string())?));
    }
    let mut rest = [0u8; 1];
    if reader.read(&mut rest).map_err(|e| e.to_string())? != 0 {
        return Err("trailing bytes after the last field".into());
    }
    Ok(Snapshot {
        grid,
        time: header.time,
        fields,
    })
}

pub fn load(path: &Path) -> Result<Snapshot, LabError> {
    let file = std::fs::File::open(path).map_err(|e| LabError::Snapshot {
        path: path.into(),
        reason: e.to_string(),
    })?;
    read_snapshot(file).map_err(|reason| LabError::Snapshot { path: path.into(), reason })
}

/// Field names of a state: `sigma`, `v0…`, `h00…` (row-major) and `grad_p0…`.
pub fn state_fields(state: &FluidState) -> Vec<(String, &SpectralField)> {
    let d = state.dim();
    let mut out = vec![("sigma".to_string(), &state.sigma)];
    out.extend(state.velocity.iter().enumerate().map(|(i, f)| (format!("v{i}"), f)));
    out.extend(state.h.iter().enumerate().map(|(k, f)| (format!("h{}{}", k / d, k % d), f)));
    out.extend(state.pressure_grad.iter().enumerate().map(|(i, f)| (format!("grad_p{i}"), f)));
    out
}

/// Rebuilds `(σ, v, H)` from a state snapshot; the pressure gradient is kept
/// when present.
pub fn fluid_state(snapshot: &Snapshot) -> Result<FluidState, String> {
    let d = snapshot.grid.dim();
    let get = |name: String| snapshot.field(&name).cloned().ok_or(format!("missing field {name:?}"));
    let sigma = get("sigma".into())?;
    let velocity = (0..d).map(|i| get(format!("v{i}"))).collect::<Result<Vec<_>, _>>()?;
    let h = (0..d * d).map(|k| get(format!("h{}{}", k / d, k % d))).collect::<Result<Vec<_>, _>>()?;
    let mut state = FluidState::new(sigma, velocity, h).map_err(|e| e.to_string())?;
    if let Ok(gp) = (0..d).map(|i| get(format!("grad_p{i}"))).collect::<Result<Vec<_>, _>>() {
        state.pressure_grad = gp;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let grid = GridSpec::new(2, 16).unwrap();
        let a = SpectralField::cosine(&grid, &[1, 2], 0.5);
        let b = SpectralField::sine(&grid, &[3, 0], 2.0);
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, Some(0.25), &[("a".into(), &a), ("b".into(), &b)]).unwrap();
        let s = read_snapshot(&bytes[..]).unwrap();
        assert_eq!(s.time, Some(0.25));
        assert!(s.field("a").unwrap().max_abs_difference(&a) < 1e-15);
        assert!(s.field("b").unwrap().max_abs_difference(&b) < 1e-15);
    }

    #[test]
    fn header_is_one_json_line() {
        let grid = GridSpec::new(2, 16).unwrap();
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, None, &[("u".into(), &SpectralField::zeros(&grid))]).unwrap();
        let end = bytes.iter().position(|b| *b == b'\n').unwrap();
        let v: serde_json::Value = serde_json::from_slice(&bytes[..end]).unwrap();
        assert_eq!(v["M"], 16);
        assert_eq!(v["scalar"], "float64-le");
        assert_eq!(bytes.len() - end - 1, 8 * 256);
    }

    #[test]
    fn malformed_input_is_rejected() {
        let grid = GridSpec::new(2, 16).unwrap();
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, None, &[("u".into(), &SpectralField::zeros(&grid))]).unwrap();
        assert!(read_snapshot(&bytes[..bytes.len() - 1]).is_err());
        let mut longer = bytes.clone();
        longer.push(0);
        assert!(read_snapshot(&longer[..]).is_err());
        assert!(read_snapshot(&b"not json\n"[..]).is_err());
        assert!(read_snapshot(&b""[..]).is_err());
    }

    #[test]
    fn states_survive_a_round_trip() {
        let grid = GridSpec::new(3, 16).unwrap();
        let c = SpectralField::cosine(&grid, &[1, 0, 1], 0.1);
        let z = SpectralField::zeros(&grid);
        let mut h = vec![z.clone(); 9];
        h[5] = c.clone();
        let state = FluidState::new(c.clone(), vec![z.clone(), z.clone(), z], h).unwrap();
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, Some(0.0), &state_fields(&state)).unwrap();
        let back = fluid_state(&read_snapshot(&bytes[..]).unwrap()).unwrap();
        assert!(back.l2_distance(&state) < 1e-15);
    }
}

//! Flat little-endian field snapshots.
//!
//! Layout: `d: u64`, `N: u64`, `ℓ: f64`, `t: f64`, `k: u64`, `k` extension values
//! (`f64`), then `N^d` node triples (`f64`) in grid index order (axis 0 fastest).
//! Micro snapshots have `k = 0`; homogenized snapshots store `A^H` row-major (`k = d²`).

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::grid::{PeriodicGrid, VectorField};

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub extension: Vec<f64>,
    pub field: VectorField,
}

pub fn write_snapshot<W: Write>(
    mut w: W,
    field: &VectorField,
    t: f64,
    extension: &[f64],
) -> Result<()> {
    let g = field.grid;
    let mut buf = Vec::with_capacity(40 + 8 * extension.len() + 24 * g.len());
    buf.extend_from_slice(&(g.dim() as u64).to_le_bytes());
    buf.extend_from_slice(&(g.n() as u64).to_le_bytes());
    buf.extend_from_slice(&g.ell().to_le_bytes());
    buf.extend_from_slice(&t.to_le_bytes());
    buf.extend_from_slice(&(extension.len() as u64).to_le_bytes());
    for v in extension {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for node in &field.data {
        for v in node {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

fn take8(bytes: &[u8], pos: &mut usize) -> Result<[u8; 8]> {
    let end = *pos + 8;
    let chunk = bytes
        .get(*pos..end)
        .ok_or_else(|| Error::Parse(format!("snapshot truncated at byte {}", *pos)))?;
    *pos = end;
    Ok(chunk.try_into().expect("eight bytes"))
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut pos = 0;
    let d = u64::from_le_bytes(take8(&bytes, &mut pos)?) as usize;
    let n = u64::from_le_bytes(take8(&bytes, &mut pos)?) as usize;
    let ell = f64::from_le_bytes(take8(&bytes, &mut pos)?);
    let t = f64::from_le_bytes(take8(&bytes, &mut pos)?);
    let k = u64::from_le_bytes(take8(&bytes, &mut pos)?) as usize;
    if k > 9 {
        return Err(Error::Parse(format!(
            "snapshot extension length {k} is implausible"
        )));
    }
    let grid =
        PeriodicGrid::new(d, n, ell).map_err(|e| Error::Parse(format!("snapshot header: {e}")))?;
    let extension = (0..k)
        .map(|_| take8(&bytes, &mut pos).map(f64::from_le_bytes))
        .collect::<Result<Vec<_>>>()?;
    let expected = pos + 24 * grid.len();
    if bytes.len() != expected {
        return Err(Error::Parse(format!(
            "snapshot has {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let mut field = VectorField::zeros(grid);
    for node in field.data.iter_mut() {
        for v in node.iter_mut() {
            *v = f64::from_le_bytes(take8(&bytes, &mut pos)?);
        }
    }
    Ok(Snapshot {
        t,
        extension,
        field,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = PeriodicGrid::new(2, 5, 1.5).unwrap();
        let f = VectorField::from_fn(g, |x| [x[0], -x[1], 0.125]);
        let mut buf = vec![];
        write_snapshot(&mut buf, &f, 1.25e-4, &[0.6, 0.02, 0.02, 0.7]).unwrap();
        assert_eq!(buf.len(), 40 + 32 + 24 * 25);
        assert_eq!(&buf[..8], &2u64.to_le_bytes());
        let s = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(s.field, f);
        assert_eq!(s.t, 1.25e-4);
        assert_eq!(s.extension, vec![0.6, 0.02, 0.02, 0.7]);
    }

    #[test]
    fn truncated_input_is_rejected() {
        let g = PeriodicGrid::new(1, 4, 1.0).unwrap();
        let mut buf = vec![];
        write_snapshot(&mut buf, &VectorField::zeros(g), 0.0, &[]).unwrap();
        buf.pop();
        assert!(matches!(
            read_snapshot(buf.as_slice()),
            Err(Error::Parse(_))
        ));
        assert!(matches!(read_snapshot(&buf[..12]), Err(Error::Parse(_))));
    }
}

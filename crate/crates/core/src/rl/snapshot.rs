//! Portable policy snapshots: a small versioned header, layer dims, then
//! raw little-endian weights.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use thiserror::Error;

use crate::snn::{DenseActivation, DenseNetwork, LifParams, SpikingNetwork};

use super::policy::{Backbone, PolicyHead};

const MAGIC: [u8; 4] = *b"SBPL";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a policy snapshot (bad magic)")]
    BadMagic,
    #[error("snapshot version {0} not supported")]
    BadVersion(u32),
    #[error("snapshot is truncated or inconsistent: {0}")]
    Corrupt(String),
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], SnapshotError> {
        if self.pos + n > self.buf.len() {
            return Err(SnapshotError::Corrupt(format!(
                "needed {n} bytes at offset {}",
                self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn read_u32(&mut self) -> Result<u32, SnapshotError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn read_f64(&mut self) -> Result<f64, SnapshotError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn save_policy(path: &Path, policy: &PolicyHead) -> Result<(), SnapshotError> {
    let mut out: Vec<u8> = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let (backend, lif) = match &policy.backbone {
        Backbone::Spiking(net) => (0u8, *net.lif()),
        Backbone::Dense(_) => (1u8, LifParams::default()),
    };
    out.push(backend);
    out.extend_from_slice(&[0u8; 3]);
    out.extend_from_slice(&(policy.num_vehicles() as u32).to_le_bytes());
    out.extend_from_slice(&policy.power_fill.to_le_bytes());
    out.extend_from_slice(&lif.leak.to_le_bytes());
    out.extend_from_slice(&lif.threshold.to_le_bytes());
    out.extend_from_slice(&lif.reset.to_le_bytes());
    out.extend_from_slice(&(lif.steps as u32).to_le_bytes());
    out.extend_from_slice(&lif.surrogate_sharpness.to_le_bytes());
    let dims = policy.backbone.layer_dims();
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for w in policy.backbone.weights() {
        for v in w.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    for v in policy.log_std.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = File::create(path)?;
    f.write_all(&out)?;
    Ok(())
}

pub fn load_policy(path: &Path) -> Result<PolicyHead, SnapshotError> {
    let mut buf = Vec::new();
    File::open(path)?.read_to_end(&mut buf)?;
    let mut c = Cursor { buf: &buf, pos: 0 };
    if c.take(4)? != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let version = c.read_u32()?;
    if version != VERSION {
        return Err(SnapshotError::BadVersion(version));
    }
    let backend = c.take(4)?[0];
    let num_vehicles = c.read_u32()? as usize;
    let power_fill = c.read_f64()?;
    let lif = LifParams {
        leak: c.read_f64()?,
        threshold: c.read_f64()?,
        reset: c.read_f64()?,
        steps: c.read_u32()? as usize,
        surrogate_sharpness: c.read_f64()?,
    };
    let n_dims = c.read_u32()? as usize;
    if n_dims < 2 || n_dims > 64 {
        return Err(SnapshotError::Corrupt(format!("{n_dims} layer dims")));
    }
    let mut dims = Vec::with_capacity(n_dims);
    for _ in 0..n_dims {
        dims.push(c.read_u32()? as usize);
    }
    if *dims.last().unwrap() != 2 * num_vehicles {
        return Err(SnapshotError::Corrupt(format!(
            "output dim {} does not match 2 * {num_vehicles} beams",
            dims.last().unwrap()
        )));
    }
    let mut backbone = match backend {
        0 => Backbone::Spiking(
            SpikingNetwork::zeros(dims.clone(), lif)
                .map_err(|e| SnapshotError::Corrupt(e.to_string()))?,
        ),
        1 => Backbone::Dense(
            DenseNetwork::zeros(dims.clone(), DenseActivation::Tanh)
                .map_err(|e| SnapshotError::Corrupt(e.to_string()))?,
        ),
        other => return Err(SnapshotError::Corrupt(format!("backend tag {other}"))),
    };
    for w in backbone.weights_mut() {
        let (rows, cols) = (w.nrows(), w.ncols());
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(c.read_f64()?);
        }
        *w = Array2::from_shape_vec((rows, cols), data).unwrap();
    }
    let mut log_std = Vec::with_capacity(2 * num_vehicles);
    for _ in 0..2 * num_vehicles {
        log_std.push(c.read_f64()?);
    }
    if c.pos != buf.len() {
        return Err(SnapshotError::Corrupt(format!(
            "{} trailing bytes",
            buf.len() - c.pos
        )));
    }
    let mut policy = PolicyHead::new(backbone, num_vehicles, 0.0, power_fill);
    policy.log_std = Array1::from_vec(log_std);
    Ok(policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rl::policy::build_backbone;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_policy(spiking: bool) -> PolicyHead {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let backbone = build_backbone(
            spiking,
            vec![12, 16, 16, 6],
            LifParams::default(),
            2.0,
            &mut rng,
        )
        .unwrap();
        let mut p = PolicyHead::new(backbone, 3, -0.4, 0.9);
        p.log_std[2] = -1.25;
        p
    }

    #[test]
    fn round_trip_preserves_behavior() {
        for spiking in [true, false] {
            let policy = sample_policy(spiking);
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("policy.bin");
            save_policy(&path, &policy).unwrap();
            let loaded = load_policy(&path).unwrap();
            assert_eq!(loaded.num_vehicles(), 3);
            assert_eq!(loaded.power_fill, 0.9);
            assert_eq!(loaded.log_std, policy.log_std);
            let obs = vec![0.2; 12];
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let a = policy.act(&obs, 10.0, true, &mut rng).unwrap();
            let b = loaded.act(&obs, 10.0, true, &mut rng).unwrap();
            assert_eq!(a.action, b.action);
            assert_eq!(a.log_prob.to_bits(), b.log_prob.to_bits());
        }
    }

    #[test]
    fn rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"not a snapshot").unwrap();
        assert!(matches!(load_policy(&path), Err(SnapshotError::BadMagic)));

        let policy = sample_policy(true);
        let good = dir.path().join("good.bin");
        save_policy(&good, &policy).unwrap();
        let mut bytes = std::fs::read(&good).unwrap();
        bytes.truncate(bytes.len() - 10);
        let trunc = dir.path().join("trunc.bin");
        std::fs::write(&trunc, &bytes).unwrap();
        assert!(matches!(load_policy(&trunc), Err(SnapshotError::Corrupt(_))));
    }
}

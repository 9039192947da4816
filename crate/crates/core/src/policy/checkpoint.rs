//! Binary checkpoint format: magic `NNET1`, a little-endian u32 layer count,
//! then per layer u32 input and output sizes, f32 row-major weights and f32
//! biases; then the normalization stats (u32 dimension, f32 minima, f32
//! maxima) and a u32-length-prefixed JSON policy config.

use super::data::Normalizer;
use super::net::{Linear, NoiseNet};
use super::{PolicyConfig, PolicyError, TrainedPolicy};
use std::io::{Read, Write};

pub const NNET_MAGIC: &[u8; 5] = b"NNET1";

fn put_u32(w: &mut impl Write, v: usize) -> Result<(), PolicyError> {
    let v = u32::try_from(v).map_err(|_| PolicyError::Checkpoint(format!("{v} does not fit in u32")))?;
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_f32s(w: &mut impl Write, vals: &[f64]) -> Result<(), PolicyError> {
    let mut buf = Vec::with_capacity(vals.len() * 4);
    for &v in vals {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn write_checkpoint(policy: &TrainedPolicy, mut w: impl Write) -> Result<(), PolicyError> {
    w.write_all(NNET_MAGIC)?;
    put_u32(&mut w, policy.net.layers.len())?;
    for l in &policy.net.layers {
        put_u32(&mut w, l.inp)?;
        put_u32(&mut w, l.out)?;
        put_f32s(&mut w, &l.w)?;
        put_f32s(&mut w, &l.b)?;
    }
    put_u32(&mut w, policy.normalizer.min.len())?;
    put_f32s(&mut w, &policy.normalizer.min)?;
    put_f32s(&mut w, &policy.normalizer.max)?;
    let json = serde_json::to_vec(&policy.config).map_err(|e| PolicyError::Checkpoint(e.to_string()))?;
    put_u32(&mut w, json.len())?;
    w.write_all(&json)?;
    Ok(())
}

struct Cursor<'a> {
    data: &'a [u8],
    at: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], PolicyError> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.data.len()).ok_or_else(|| PolicyError::Checkpoint("truncated".into()))?;
        let s = &self.data[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize, PolicyError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f64>, PolicyError> {
        let bytes = self.take(n.checked_mul(4).ok_or_else(|| PolicyError::Checkpoint("size overflow".into()))?)?;
        Ok(bytes.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64).collect())
    }
}

pub fn read_checkpoint(mut r: impl Read) -> Result<TrainedPolicy, PolicyError> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    let mut c = Cursor { data: &data, at: 0 };
    if c.take(NNET_MAGIC.len())? != NNET_MAGIC {
        return Err(PolicyError::Checkpoint("bad magic".into()));
    }
    let n = c.u32()?;
    let mut layers = Vec::with_capacity(n.min(64));
    for _ in 0..n {
        let (inp, out) = (c.u32()?, c.u32()?);
        let w = c.f32s(inp.checked_mul(out).ok_or_else(|| PolicyError::Checkpoint("size overflow".into()))?)?;
        let b = c.f32s(out)?;
        layers.push(Linear { inp, out, w, b });
    }
    let dim = c.u32()?;
    let normalizer = Normalizer { min: c.f32s(dim)?, max: c.f32s(dim)? };
    let len = c.u32()?;
    let config: PolicyConfig = serde_json::from_slice(c.take(len)?).map_err(|e| PolicyError::Checkpoint(e.to_string()))?;
    if c.at != data.len() {
        return Err(PolicyError::Checkpoint("trailing bytes".into()));
    }
    let net = NoiseNet::from_layers(config.net.clone(), layers);
    let expected = NoiseNet::new(config.net.clone(), &mut crate::rng::stream(0, &["shape"]));
    let shapes_match = expected.layers.len() == net.layers.len() && expected.layers.iter().zip(&net.layers).all(|(a, b)| (a.inp, a.out) == (b.inp, b.out));
    if !shapes_match {
        return Err(PolicyError::Checkpoint("layer shapes do not match the stored config".into()));
    }
    Ok(TrainedPolicy { config, net, normalizer })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::Variant;
    use crate::rng::stream;

    #[test]
    fn round_trip_is_f32_exact() {
        let config = PolicyConfig::for_variant(Variant::Attn2d);
        let net = NoiseNet::new(config.net.clone(), &mut stream(1, &["ck"]));
        let p = TrainedPolicy { config, net, normalizer: Normalizer { min: vec![-0.3, -0.4, 0.0, 0.0], max: vec![0.3, 0.4, 0.3, 1.0] } };
        let mut buf = Vec::new();
        write_checkpoint(&p, &mut buf).unwrap();
        assert_eq!(&buf[..5], b"NNET1");
        let q = read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(q.config, p.config);
        for (a, b) in p.net.params().zip(q.net.params()) {
            assert_eq!(*a as f32 as f64, *b);
        }
        let mut again = Vec::new();
        write_checkpoint(&q, &mut again).unwrap();
        assert_eq!(buf, again);
        assert!(read_checkpoint(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_checkpoint(bad.as_slice()).is_err());
    }
}
